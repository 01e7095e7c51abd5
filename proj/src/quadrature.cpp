#include "cnls/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cnls/errors.hpp"

namespace cnls {

namespace {

constexpr int kInitialPanels = 8;

struct SimpsonPanel {
  double a, m, b;
  double fa, fm, fb;
  double whole;
};

double refine(const TimeFunction& f, const SimpsonPanel& p, double tol, int depth) {
  const double lm = 0.5 * (p.a + p.m);
  const double rm = 0.5 * (p.m + p.b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (p.m - p.a) / 6.0 * (p.fa + 4.0 * flm + p.fm);
  const double right = (p.b - p.m) / 6.0 * (p.fm + 4.0 * frm + p.fb);
  const double delta = left + right - p.whole;
  const double roundoff = 64.0 * std::numeric_limits<double>::epsilon() * (std::abs(left) + std::abs(right));
  if (std::abs(delta) <= 15.0 * tol || std::abs(delta) <= roundoff) {
    return left + right + delta / 15.0;
  }
  if (depth >= kMaxQuadratureDepth || !(p.a < lm && lm < p.m && p.m < rm && rm < p.b)) {
    throw ConvergenceError("adaptive quadrature did not converge near t = " + std::to_string(p.m));
  }
  return refine(f, {p.a, lm, p.m, p.fa, flm, p.fm, left}, 0.5 * tol, depth + 1) +
         refine(f, {p.m, rm, p.b, p.fm, frm, p.fb, right}, 0.5 * tol, depth + 1);
}

double integrate_panel(const TimeFunction& f, double a, double b, double tol) {
  const double m = 0.5 * (a + b);
  const double fa = f(a);
  const double fm = f(m);
  const double fb = f(b);
  return refine(f, {a, m, b, fa, fm, fb, (b - a) / 6.0 * (fa + 4.0 * fm + fb)}, tol, 0);
}

}  // namespace

double integrate(const TimeFunction& f, double t0, double t1, double tol) {
  if (t0 == t1) {
    return 0.0;
  }
  if (t1 < t0) {
    return -integrate(f, t1, t0, tol);
  }
  const double width = (t1 - t0) / kInitialPanels;
  double sum = 0.0;
  for (int i = 0; i < kInitialPanels; ++i) {
    const double a = t0 + i * width;
    const double b = (i + 1 == kInitialPanels) ? t1 : t0 + (i + 1) * width;
    sum += integrate_panel(f, a, b, tol / kInitialPanels);
  }
  return sum;
}

std::vector<double> cumulative_integral(const TimeFunction& f, std::span<const double> grid, double tol) {
  std::vector<double> out(grid.size(), 0.0);
  if (grid.size() < 2) {
    return out;
  }
  const double span = std::abs(grid.back() - grid.front());
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double a = grid[i - 1];
    const double b = grid[i];
    const double share = span > 0.0 ? tol * std::abs(b - a) / span : tol;
    double piece = 0.0;
    if (a < b) {
      piece = integrate_panel(f, a, b, share);
    } else if (b < a) {
      piece = -integrate_panel(f, b, a, share);
    }
    out[i] = out[i - 1] + piece;
  }
  return out;
}

}  // namespace cnls
