#include <iostream>

#include "cnls/cli.hpp"

int main(int argc, char** argv) { return cnls::cli::dispatch(argc, argv, std::cout, std::cerr); }
