#pragma once

// Command-line front end: subcommands phase-portrait, orbit, exact, riccati,
// mi-gain, simulate, verify and recipes.  Exit codes: 0 success, 2 usage or
// input error, 3 numerical failure.

#include <iosfwd>
#include <string>

namespace cnls::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitNumerical = 3;

// Default output directory when --out is absent.
inline constexpr const char* kOutDirEnv = "CNLS_OUT_DIR";

int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

// CLI invocations that regenerate the data behind each published figure.
std::string figure_recipes();

}  // namespace cnls::cli
