#pragma once

// Riccati systems for the phase parameters alpha, beta, gamma (and scale mu).
//
//   Section2 variant:  alpha' + b + 2c alpha + 4a alpha^2 = 0
//                      beta'  + (c + 4a alpha) beta      = 0
//                      gamma' + a beta^2                 = 0
//
//   Theorem1 variant:  same alpha and beta equations, and
//                      gamma' - a beta^2                 = 0
//                      mu'    - 4a alpha mu              = 0
//
// All routines take the initial data at t = 0 and a time grid that starts at
// 0 and increases strictly.

#include <optional>
#include <span>
#include <vector>

#include "cnls/coeffexpr.hpp"
#include "cnls/interp.hpp"

namespace cnls::riccati {

enum class Variant { Section2, Theorem1 };

struct InitialData {
  double alpha0 = 0.0;
  double beta0 = 1.0;
  double gamma0 = 0.0;
  double mu0 = 1.0;
};

// Immutable solution.  Either dense samples (cubic Hermite between nodes) or
// closed-form callables.  Accessors throw DomainError outside [t_min, t_max].
class RiccatiSolution {
 public:
  struct Samples {
    std::vector<double> t;
    std::vector<double> alpha, beta, gamma, mu;
    std::vector<double> dalpha, dbeta, dgamma, dmu;
  };

  static RiccatiSolution from_samples(Variant variant, InitialData init, Samples samples);
  static RiccatiSolution closed_form(Variant variant, InitialData init, double t_min, double t_max,
                                     TimeFunction alpha, TimeFunction beta, TimeFunction gamma, TimeFunction mu);

  double alpha(double t) const;
  double beta(double t) const;
  double gamma(double t) const;
  double mu(double t) const;

  Variant variant() const { return variant_; }
  const InitialData& initial() const { return init_; }
  double t_min() const { return t_min_; }
  double t_max() const { return t_max_; }

  // Nodes of a sampled solution (empty for closed forms).
  const std::vector<double>& nodes() const { return nodes_; }

  // Max pointwise deviation from an independent route (solve_theorem1 with a
  // characteristic pair).
  std::optional<double> cross_check_deviation;

 private:
  RiccatiSolution() = default;
  void check_range(double t) const;

  Variant variant_ = Variant::Section2;
  InitialData init_;
  double t_min_ = 0.0;
  double t_max_ = 0.0;
  std::vector<double> nodes_;
  TimeFunction alpha_, beta_, gamma_, mu_;
};

struct Phase {
  double theta;  // alpha x^2 + beta x + gamma
  double xi;     // beta x + 2 gamma (Section2) or beta x (Theorem1)
  double tau;    // t (Section2) or gamma (Theorem1)
};

Phase phase_theta(const RiccatiSolution& sol, double x, double t);

// Fundamental pair of mu'' + (2c - a'/a) mu' + 4ab mu = 0 with
// mu0(0) = 0, mu0'(0) = 2a(0) and mu1(0) = mu1_at_zero, mu1'(0) = 0.
class CharacteristicPair {
 public:
  CharacteristicPair(HermiteSeries mu0, HermiteSeries dmu0, HermiteSeries mu1, HermiteSeries dmu1);

  double mu0(double t) const { return mu0_(t); }
  double mu1(double t) const { return mu1_(t); }
  double dmu0(double t) const { return dmu0_(t); }
  double dmu1(double t) const { return dmu1_(t); }
  double mu1_at_zero() const { return mu1_.values().front(); }
  const std::vector<double>& nodes() const { return mu0_.nodes(); }
  double t_max() const { return mu0_.t_max(); }

 private:
  HermiteSeries mu0_, dmu0_, mu1_, dmu1_;
};

struct Section2Options {
  // Reject the result when the full system residual exceeds this.
  bool enforce_consistency = true;
  double consistency_tol = 1e-8;
  double quadrature_tol = kDefaultQuadratureTol;
};

// Closed-form solution under d = -2 a alpha:
//   alpha = e^{-E} (alpha0 - int_0^t b e^{E}),  E = 2 int_0^t (c - d)
//   beta  = beta0 e^{-int_0^t (c - 2d)},        gamma = gamma0 - int_0^t a beta^2
// Throws InconsistencyError when the unreduced system residual exceeds the
// tolerance (the coefficient set does not satisfy d = -2 a alpha).
RiccatiSolution solve_section2(const CoefficientFunctions& coeffs, InitialData init, std::span<const double> t_grid,
                               const Section2Options& opts = {});

// Fixed-step RK4 of the unreduced Section2 system; d, g, h are not used.
RiccatiSolution solve_section2_numeric(const CoefficientFunctions& coeffs, InitialData init,
                                       std::span<const double> t_grid);

// Fixed-step RK4 of the Theorem1 system.  Throws SingularityError when mu
// reaches zero.  With a pair, the appendix closed form is evaluated on the
// same nodes and the max deviation is stored in cross_check_deviation.
RiccatiSolution solve_theorem1(const CoefficientFunctions& coeffs, InitialData init, std::span<const double> t_grid,
                               const CharacteristicPair* pair = nullptr);

// Throws SingularityError if a(t) vanishes on the grid.
CharacteristicPair characteristic_solutions(const CoefficientFunctions& coeffs, std::span<const double> t_grid,
                                            double mu1_at_zero = 1.0);

// Multiparameter closed form built from a characteristic pair.  Throws
// SingularityError where alpha(0) + gamma0(t) vanishes.
RiccatiSolution solve_appendix_multiparameter(const CoefficientFunctions& coeffs, const CharacteristicPair& pair,
                                              InitialData init, Variant variant = Variant::Theorem1);

// The auxiliary functions alpha0, beta0, gamma0 exactly as printed (t > 0).
struct AppendixAuxiliary {
  double alpha0, beta0, gamma0, W;
};
AppendixAuxiliary appendix_auxiliary(const CoefficientFunctions& coeffs, const CharacteristicPair& pair, double t);

// Max |residual| of each governing equation, derivatives by a centred
// five-point difference of the solution itself.  Times whose stencil leaves
// the solution range are skipped.
struct Residuals {
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
  double mu = 0.0;
  double max() const;
};

Residuals residuals(const RiccatiSolution& sol, const CoefficientFunctions& coeffs, std::span<const double> times);

// Residuals of the reduced linear forms used under d = -2 a alpha:
// alpha' + b + 2(c - d) alpha and beta' + (c - 2d) beta.
Residuals reduced_section2_residuals(const RiccatiSolution& sol, const CoefficientFunctions& coeffs,
                                     std::span<const double> times);

// Uniform grid helper: n + 1 points on [t0, t1].
std::vector<double> uniform_grid(double t0, double t1, std::size_t n);

}  // namespace cnls::riccati
