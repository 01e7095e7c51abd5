#include "cnls/elliptic.hpp"

#include <array>
#include <cmath>
#include <numbers>

#include "cnls/errors.hpp"

namespace cnls::elliptic {

namespace {

constexpr int kMaxAgmIterations = 20;
constexpr double kAgmTol = 1e-15;

}  // namespace

Modulus::Modulus(double l) : l_(l) {
  if (!(l >= 0.0 && l <= 1.0)) {
    throw DomainError("elliptic modulus must lie in [0, 1], got " + std::to_string(l));
  }
}

double Modulus::complementary() const noexcept { return std::sqrt((1.0 - l_) * (1.0 + l_)); }

JacobiTriple jacobi(double u, Modulus modulus) {
  if (!std::isfinite(u)) {
    throw DomainError("elliptic function argument must be finite");
  }
  const double l = modulus.value();
  if (l < kDegenerateModulusTol) {
    return {std::sin(u), std::cos(u), 1.0};
  }
  if (l > 1.0 - kDegenerateModulusTol) {
    const double sech = 1.0 / std::cosh(u);
    return {std::tanh(u), sech, sech};
  }

  // Descending Landen transformation via the arithmetic-geometric mean.
  const double lhat2 = (1.0 - l) * (1.0 + l);
  std::array<double, kMaxAgmIterations + 1> ratio{};  // c_n / a_n
  double a = 1.0;
  double b = std::sqrt(lhat2);
  int n = 0;
  while (n < kMaxAgmIterations) {
    const double c = 0.5 * (a - b);
    const double a_next = 0.5 * (a + b);
    b = std::sqrt(a * b);
    a = a_next;
    ++n;
    ratio[n] = c / a;
    if (std::abs(c) < kAgmTol) {
      break;
    }
  }

  double phi = std::ldexp(a * u, n);
  for (int k = n; k >= 1; --k) {
    phi = 0.5 * (phi + std::asin(ratio[k] * std::sin(phi)));
  }
  const double s = std::sin(phi);
  const double c = std::cos(phi);
  // dn^2 = 1 - l^2 sn^2 = cn^2 + lhat^2 sn^2, the second form has no cancellation.
  const double d = std::sqrt(c * c + lhat2 * s * s);
  return {s, c, d};
}

double jacobi_sn(double u, Modulus l) { return jacobi(u, l).sn; }
double jacobi_cn(double u, Modulus l) { return jacobi(u, l).cn; }
double jacobi_dn(double u, Modulus l) { return jacobi(u, l).dn; }

double complete_elliptic_K(Modulus modulus) {
  const double l = modulus.value();
  if (l >= 1.0 - kDegenerateModulusTol) {
    throw DomainError("complete elliptic integral K diverges as l -> 1");
  }
  double a = 1.0;
  double b = modulus.complementary();
  for (int n = 0; n < kMaxAgmIterations && std::abs(a - b) > kAgmTol * a; ++n) {
    const double a_next = 0.5 * (a + b);
    b = std::sqrt(a * b);
    a = a_next;
  }
  return std::numbers::pi / (2.0 * a);
}

}  // namespace cnls::elliptic
