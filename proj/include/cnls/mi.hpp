#pragma once

// Modulational instability of continuous-wave backgrounds of the trap-free
// system (b = 0).

#include <complex>
#include <string>
#include <string_view>
#include <vector>

#include "cnls/coeffexpr.hpp"
#include "cnls/interp.hpp"

namespace cnls::mi {

using Complex = std::complex<double>;

// psi0 = A0(t) e^{i theta1(t)}, phi0 = B0(t) e^{i theta2(t)} with
// A0(t) = A0 e^{-int d}, B0(t) = B0 e^{-int d}, theta1(t) = theta1(0) - int (g + h S)
// and theta2(t) = theta2(0) + int (g + h S).  The integral of d is tabulated
// on [0, t_cache] and interpolated; phases and later times use direct
// quadrature.
class CWBackground {
 public:
  CWBackground(CoefficientFunctions coeffs, double A0, double B0, double theta1_0, double theta2_0,
               double t_cache = 10.0);

  double A0() const { return A0_; }
  double B0() const { return B0_; }
  double theta1_0() const { return theta1_0_; }
  double theta2_0() const { return theta2_0_; }
  const CoefficientFunctions& coeffs() const { return coeffs_; }

  double integral_d(double t) const;
  double amplitude_psi(double t) const;
  double amplitude_phi(double t) const;
  double theta1(double t) const;
  double theta2(double t) const;
  Complex psi0(double t) const;
  Complex phi0(double t) const;
  // |psi0|^2 + |phi0|^2 = (A0^2 + B0^2) e^{-2 int d}.
  double total_intensity(double t) const;

 private:
  double phase_integral(double t) const;

  CoefficientFunctions coeffs_;
  double A0_, B0_, theta1_0_, theta2_0_;
  HermiteSeries int_d_;
};

// Throws AdmissibilityError if b is not identically zero (sampled on [0, t_cache]).
CWBackground cw_background(const CoefficientFunctions& coeffs, double A0, double B0, double theta1_0 = 0.0,
                           double theta2_0 = 0.0, double t_cache = 10.0);

enum class Branch { Plus, Minus };

// omega^2 = a^2 k^4 + a h k^2 S +/- |a h| k^2 S, principal root (Im >= 0).
// Values of omega^2 within roundoff of zero are snapped to zero.
Complex dispersion_relation(const CWBackground& cw, double k, double t, Branch branch);
double dispersion_squared(const CWBackground& cw, double k, double t, Branch branch);

// The branch with the smaller omega^2.
Branch unstable_branch(const CWBackground& cw, double t);

// det M of the 4x4 linearisation matrix, by LU with partial pivoting.
Complex determinant_oracle(const CWBackground& cw, double k, double t, Complex omega);
// Largest entry modulus of M, for relative determinant checks.
double matrix_scale(const CWBackground& cw, double k, double t, Complex omega);

// B(t) with unstable set k^2 < B^2; zero when a h >= 0.
double instability_region(const CWBackground& cw, double t);

// Lambda = 2 Im omega on the unstable branch; exactly 0 when stable.
double gain(const CWBackground& cw, double k, double t);

struct GainPeak {
  double k_max;
  double gain_max;
};

GainPeak gain_peak(const CWBackground& cw, double t);

struct Preset {
  std::string name;  // "1+", "1-", "2", "3"
  CoefficientSet coeffs;
  CWBackground cw;
  // The printed closed form of the gain for this preset.
  double (*closed_form)(double k, double t);
};

// Case studies with A0 = B0 = 1 and zero initial phases.  Preset 1 comes in
// two variants (d = t and d = -t).  Throws DomainError for an unknown id.
std::vector<Preset> gain_presets(int id);
Preset gain_preset(std::string_view name);

}  // namespace cnls::mi
