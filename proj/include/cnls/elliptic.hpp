#pragma once

// Jacobi elliptic functions sn, cn, dn and the complete elliptic integral K.
//
// Convention: every function here takes the *modulus* l (0 <= l <= 1), not the
// parameter m = l^2 that many libraries (Boost, mpmath, Abramowitz-Stegun)
// use.  sn(u; l) is the inverse of
//
//     u = integral_0^phi dtheta / sqrt(1 - l^2 sin^2 theta),   sn = sin(phi).
//
// The complementary modulus is lhat = sqrt(1 - l^2).

namespace cnls::elliptic {

class Modulus {
 public:
  // Throws DomainError unless 0 <= l <= 1.
  explicit Modulus(double l);

  double value() const noexcept { return l_; }
  double complementary() const noexcept;  // lhat, computed without cancellation

 private:
  double l_;
};

struct JacobiTriple {
  double sn;
  double cn;
  double dn;
};

// All three functions from one AGM sweep.  Throws DomainError for non-finite u.
JacobiTriple jacobi(double u, Modulus l);

double jacobi_sn(double u, Modulus l);
double jacobi_cn(double u, Modulus l);
double jacobi_dn(double u, Modulus l);

// Quarter period K(l).  Throws DomainError for l >= 1 - 1e-12, where K diverges.
double complete_elliptic_K(Modulus l);

// Moduli this close to 0 or 1 use the circular / hyperbolic limits directly.
inline constexpr double kDegenerateModulusTol = 1e-12;

}  // namespace cnls::elliptic
