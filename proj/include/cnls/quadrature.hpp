#pragma once

#include <functional>
#include <span>
#include <vector>

namespace cnls {

using TimeFunction = std::function<double(double)>;

inline constexpr double kDefaultQuadratureTol = 1e-10;
inline constexpr int kMaxQuadratureDepth = 40;

// Adaptive Simpson quadrature of f over [t0, t1] (t1 < t0 gives the negated
// integral).  Throws ConvergenceError if a subinterval still misses its share
// of tol at depth kMaxQuadratureDepth.
double integrate(const TimeFunction& f, double t0, double t1, double tol = kDefaultQuadratureTol);

// out[i] = integral of f from grid[0] to grid[i]; panels between consecutive
// nodes share tol in proportion to their width.
std::vector<double> cumulative_integral(const TimeFunction& f, std::span<const double> grid,
                                        double tol = kDefaultQuadratureTol);

}  // namespace cnls
