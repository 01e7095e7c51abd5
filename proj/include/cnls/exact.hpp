#pragma once

// Closed-form solution families psi = e^{i theta} G(xi), phi = e^{-i theta} G(xi),
// where G solves G'' = g0 G + 2 h0 G^3 on the level H(G, G') = H0, and a
// residual oracle that checks sampled fields against the coupled equations
//
//   i psi_t = -a psi_xx + b x^2 psi - i c x psi_x - i d psi + g psi + h S psi
//   i phi_t =  a phi_xx - b x^2 phi - i c x phi_x - i d phi - g phi - h S phi
//
// with S = |psi|^2 + |phi|^2.

#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "cnls/coeffexpr.hpp"
#include "cnls/riccati.hpp"

namespace cnls::exact {

using Complex = std::complex<double>;

enum class Regime {
  Case1a,  // h0 < 0 < g0, g0^2/(8 h0) < H0 < 0: closed orbits
  Case1b,  // h0 < 0 < g0, H0 = 0: homoclinic
  Case1c,  // h0 < 0 < g0, H0 = g0^2/(8 h0): fixed points
  Case1d,  // h0 < 0 < g0, H0 > 0: orbits around all three fixed points
  Case2a,  // g0 < 0 < h0, 0 < H0 < g0^2/(8 h0): closed orbits
  Case2b,  // g0 < 0 < h0, H0 = g0^2/(8 h0): heteroclinic
};

const char* regime_name(Regime r);

struct HamiltonianLevel {
  double g0, h0, H0;
  Regime regime;
  std::optional<double> G1sq, G2sq, G3sq;
};

// Relative tolerance for recognising the boundary level g0^2/(8 h0).
inline constexpr double kLevelTol = 1e-12;

// Throws AdmissibilityError when (g0, h0, H0) fits none of the cases.
HamiltonianLevel level_roots(double g0, double h0, double H0);

enum class Kind { Dnoidal, Bright, PlaneWave, Cnoidal, Snoidal, Dark };

const char* kind_name(Kind k);
Kind kind_from_name(const std::string& name);  // throws DomainError
Regime regime_of(Kind k);

// The level H0 forced by the kind (Bright, PlaneWave, Dark), else nullopt.
std::optional<double> implied_level(Kind k, double g0, double h0);

struct FamilySpec {
  Kind kind = Kind::Bright;
  double g0 = 1.0;
  double h0 = -1.0;
  std::optional<double> H0;  // required for Dnoidal, Cnoidal, Snoidal
  double xi0 = 0.0;
  int sign = 1;
};

// Real envelope G(xi) of a family: amplitude, rate, modulus and shape.
class Envelope {
 public:
  Envelope(Kind kind, const HamiltonianLevel& level, double xi0, int sign);

  double operator()(double xi) const;
  double derivative(double xi) const;

  Kind kind() const { return kind_; }
  double amplitude() const { return amp_; }
  double rate() const { return rate_; }
  double modulus() const { return l_; }

 private:
  Kind kind_;
  double amp_ = 0.0;
  double rate_ = 0.0;
  double l_ = 0.0;
  double xi0_ = 0.0;
};

struct FieldSample {
  Complex psi;
  Complex phi;
};

class SolutionFamily {
 public:
  const FamilySpec& spec() const { return spec_; }
  const HamiltonianLevel& level() const { return level_; }
  const Envelope& envelope() const { return envelope_; }
  const riccati::RiccatiSolution& riccati() const { return riccati_; }
  // a, b, c as supplied; d = -2 a alpha, g = g0 a beta^2, h = h0 a beta^2.
  const CoefficientFunctions& coefficients() const { return coeffs_; }

  FieldSample operator()(double x, double t) const;

 private:
  friend SolutionFamily build_family(const FamilySpec&, const riccati::RiccatiSolution&, const CoefficientFunctions&);
  SolutionFamily(FamilySpec spec, HamiltonianLevel level, Envelope env, riccati::RiccatiSolution ric,
                 CoefficientFunctions coeffs);

  FamilySpec spec_;
  HamiltonianLevel level_;
  Envelope envelope_;
  riccati::RiccatiSolution riccati_;
  CoefficientFunctions coeffs_;
};

// Builds the family and its consistent coefficient set from a Section2
// Riccati solution and the a, b, c it was solved with (d, g, h of `abc` are
// ignored).  Throws AdmissibilityError when the kind does not match the
// level's regime or the Riccati solution is not the Section2 variant.
SolutionFamily build_family(const FamilySpec& spec, const riccati::RiccatiSolution& ric,
                            const CoefficientFunctions& abc);

// Convenience: solves the Section2 Riccati system numerically on [0, t_end].
SolutionFamily build_family(const FamilySpec& spec, const CoefficientFunctions& abc, riccati::InitialData init,
                            double t_end);

FieldSample eval_fields(const SolutionFamily& fam, double x, double t);

// Fields on a uniform grid, row-major in t: index it * x.size() + ix.
struct FieldGrid {
  std::vector<double> x;
  std::vector<double> t;
  std::vector<Complex> psi;
  std::vector<Complex> phi;

  Complex& psi_at(std::size_t it, std::size_t ix) { return psi[it * x.size() + ix]; }
  Complex& phi_at(std::size_t it, std::size_t ix) { return phi[it * x.size() + ix]; }
  const Complex& psi_at(std::size_t it, std::size_t ix) const { return psi[it * x.size() + ix]; }
  const Complex& phi_at(std::size_t it, std::size_t ix) const { return phi[it * x.size() + ix]; }
};

FieldGrid sample_family(const SolutionFamily& fam, const std::vector<double>& x, const std::vector<double>& t);

struct ResidualReport {
  double max_residual_psi = 0.0;
  double max_residual_phi = 0.0;
  double max() const { return std::max(max_residual_psi, max_residual_phi); }
};

// Fourth-order centred x stencils, three-point centred t difference; points
// within two x-nodes or one t-slice of the boundary are excluded.
ResidualReport residual_oracle(const FieldGrid& grid, const CoefficientFunctions& coeffs);

struct Window {
  double x0, x1, t0, t1;
};

// Residual at (dx, dt) and at (2 dx, 2 dt).  `converging` is false when the
// coarse/fine ratio falls below 2 while the fine residual is above roundoff,
// which means the grid is too coarse for the stencils.
struct ResidualCertificate {
  ResidualReport fine;
  ResidualReport coarse;
  double ratio;
  bool converging;
  std::string warning;
};

ResidualCertificate certify(const SolutionFamily& fam, const Window& window, double dx, double dt);

}  // namespace cnls::exact
