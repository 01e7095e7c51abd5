#include "cnls/exact.hpp"

#include <array>
#include <cmath>

#include "cnls/elliptic.hpp"
#include "cnls/errors.hpp"

namespace cnls::exact {

namespace {

constexpr std::array<const char*, 6> kKindNames{"dnoidal", "bright", "plane_wave", "cnoidal", "snoidal", "dark"};

bool on_boundary_level(double g0, double h0, double H0) {
  const double boundary = g0 * g0 / (8.0 * h0);
  return std::abs(H0 - boundary) <= kLevelTol * std::abs(boundary);
}

std::vector<double> uniform(double lo, double hi, double step) {
  const auto n = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9));
  if (n < 4) {
    throw DomainError("window too small for the residual stencils");
  }
  return riccati::uniform_grid(lo, lo + static_cast<double>(n) * step, n);
}

}  // namespace

const char* regime_name(Regime r) {
  switch (r) {
    case Regime::Case1a:
      return "case-1a";
    case Regime::Case1b:
      return "case-1b";
    case Regime::Case1c:
      return "case-1c";
    case Regime::Case1d:
      return "case-1d";
    case Regime::Case2a:
      return "case-2a";
    case Regime::Case2b:
      return "case-2b";
  }
  return "?";
}

HamiltonianLevel level_roots(double g0, double h0, double H0) {
  if (!std::isfinite(g0) || !std::isfinite(h0) || !std::isfinite(H0)) {
    throw DomainError("g0, h0 and H0 must be finite");
  }
  HamiltonianLevel lv{g0, h0, H0, Regime::Case1a, {}, {}, {}};
  const double disc = g0 * g0 - 8.0 * h0 * H0;
  if (h0 < 0.0 && g0 > 0.0) {
    const double boundary = g0 * g0 / (8.0 * h0);
    if (on_boundary_level(g0, h0, H0)) {
      lv.regime = Regime::Case1c;
      lv.G1sq = lv.G2sq = -g0 / (2.0 * h0);
    } else if (H0 == 0.0) {
      lv.regime = Regime::Case1b;
      lv.G1sq = 0.0;
      lv.G2sq = -g0 / h0;
    } else if (H0 > boundary && H0 < 0.0) {
      lv.regime = Regime::Case1a;
      lv.G1sq = (g0 - std::sqrt(disc)) / (-2.0 * h0);
      lv.G2sq = (g0 + std::sqrt(disc)) / (-2.0 * h0);
    } else if (H0 > 0.0) {
      lv.regime = Regime::Case1d;
      lv.G2sq = (g0 + std::sqrt(disc)) / (-2.0 * h0);
      lv.G3sq = (-g0 + std::sqrt(disc)) / (-2.0 * h0);
    } else {
      throw AdmissibilityError("H0 below g0^2/(8 h0): no real orbit");
    }
    return lv;
  }
  if (h0 > 0.0 && g0 < 0.0) {
    const double boundary = g0 * g0 / (8.0 * h0);
    if (on_boundary_level(g0, h0, H0)) {
      lv.regime = Regime::Case2b;
      lv.G1sq = lv.G2sq = -g0 / (2.0 * h0);
    } else if (H0 > 0.0 && H0 < boundary) {
      lv.regime = Regime::Case2a;
      lv.G1sq = (-g0 - std::sqrt(disc)) / (2.0 * h0);
      lv.G2sq = (-g0 + std::sqrt(disc)) / (2.0 * h0);
    } else {
      throw AdmissibilityError("for g0 < 0 < h0 only 0 < H0 <= g0^2/(8 h0) gives bounded solutions");
    }
    return lv;
  }
  throw AdmissibilityError("no closed-form family for this sign pattern of g0, h0");
}

const char* kind_name(Kind k) { return kKindNames[static_cast<std::size_t>(k)]; }

Kind kind_from_name(const std::string& name) {
  for (std::size_t i = 0; i < kKindNames.size(); ++i) {
    if (name == kKindNames[i]) {
      return static_cast<Kind>(i);
    }
  }
  throw DomainError("unknown family '" + name + "'");
}

Regime regime_of(Kind k) {
  switch (k) {
    case Kind::Dnoidal:
      return Regime::Case1a;
    case Kind::Bright:
      return Regime::Case1b;
    case Kind::PlaneWave:
      return Regime::Case1c;
    case Kind::Cnoidal:
      return Regime::Case1d;
    case Kind::Snoidal:
      return Regime::Case2a;
    case Kind::Dark:
      return Regime::Case2b;
  }
  return Regime::Case1a;
}

std::optional<double> implied_level(Kind k, double g0, double h0) {
  switch (k) {
    case Kind::Bright:
      return 0.0;
    case Kind::PlaneWave:
    case Kind::Dark:
      return g0 * g0 / (8.0 * h0);
    default:
      return std::nullopt;
  }
}

Envelope::Envelope(Kind kind, const HamiltonianLevel& lv, double xi0, int sign) : kind_(kind), xi0_(xi0) {
  if (lv.regime != regime_of(kind)) {
    throw AdmissibilityError(std::string(kind_name(kind)) + " family needs " + regime_name(regime_of(kind)) +
                             ", level is " + regime_name(lv.regime));
  }
  if (sign != 1 && sign != -1) {
    throw DomainError("sign must be +1 or -1");
  }
  const double g0 = lv.g0;
  const double h0 = lv.h0;
  switch (kind) {
    case Kind::Dnoidal: {
      const double g2 = std::sqrt(*lv.G2sq);
      amp_ = g2;
      rate_ = g2 * std::sqrt(-h0);
      l_ = std::sqrt(*lv.G2sq - *lv.G1sq) / g2;
      break;
    }
    case Kind::Bright:
      amp_ = std::sqrt(-g0 / h0);
      rate_ = std::sqrt(g0);
      l_ = 1.0;
      break;
    case Kind::PlaneWave:
      amp_ = std::sqrt(-g0 / (2.0 * h0));
      break;
    case Kind::Cnoidal: {
      const double s = std::sqrt(*lv.G2sq + *lv.G3sq);
      amp_ = std::sqrt(*lv.G2sq);
      rate_ = std::sqrt(-h0) * s;
      l_ = amp_ / s;
      break;
    }
    case Kind::Snoidal:
      amp_ = std::sqrt(*lv.G1sq);
      rate_ = std::sqrt(h0) * std::sqrt(*lv.G2sq);
      l_ = amp_ / std::sqrt(*lv.G2sq);
      break;
    case Kind::Dark:
      amp_ = std::sqrt(-g0 / (2.0 * h0));
      rate_ = std::sqrt(-g0 / 2.0);
      l_ = 1.0;
      break;
  }
  // Rejects a modulus outside [0, 1].
  elliptic::Modulus check{l_};
  amp_ *= sign;
}

double Envelope::operator()(double xi) const {
  const double u = rate_ * (xi - xi0_);
  switch (kind_) {
    case Kind::Dnoidal:
      return amp_ * elliptic::jacobi_dn(u, elliptic::Modulus{l_});
    case Kind::Bright:
      return amp_ / std::cosh(u);
    case Kind::PlaneWave:
      return amp_;
    case Kind::Cnoidal:
      return amp_ * elliptic::jacobi_cn(u, elliptic::Modulus{l_});
    case Kind::Snoidal:
      return amp_ * elliptic::jacobi_sn(u, elliptic::Modulus{l_});
    case Kind::Dark:
      return amp_ * std::tanh(u);
  }
  return 0.0;
}

double Envelope::derivative(double xi) const {
  const double u = rate_ * (xi - xi0_);
  const double s = amp_ * rate_;
  switch (kind_) {
    case Kind::Dnoidal: {
      const auto j = elliptic::jacobi(u, elliptic::Modulus{l_});
      return -s * l_ * l_ * j.sn * j.cn;
    }
    case Kind::Bright:
      return -s * std::tanh(u) / std::cosh(u);
    case Kind::PlaneWave:
      return 0.0;
    case Kind::Cnoidal: {
      const auto j = elliptic::jacobi(u, elliptic::Modulus{l_});
      return -s * j.sn * j.dn;
    }
    case Kind::Snoidal: {
      const auto j = elliptic::jacobi(u, elliptic::Modulus{l_});
      return s * j.cn * j.dn;
    }
    case Kind::Dark: {
      const double sech = 1.0 / std::cosh(u);
      return s * sech * sech;
    }
  }
  return 0.0;
}

SolutionFamily::SolutionFamily(FamilySpec spec, HamiltonianLevel level, Envelope env, riccati::RiccatiSolution ric,
                               CoefficientFunctions coeffs)
    : spec_(spec), level_(level), envelope_(env), riccati_(std::move(ric)), coeffs_(std::move(coeffs)) {}

FieldSample SolutionFamily::operator()(double x, double t) const {
  const auto ph = riccati::phase_theta(riccati_, x, t);
  const double G = envelope_(ph.xi);
  const Complex rot = std::polar(1.0, ph.theta);
  return {G * rot, G * std::conj(rot)};
}

SolutionFamily build_family(const FamilySpec& spec, const riccati::RiccatiSolution& ric,
                            const CoefficientFunctions& abc) {
  if (ric.variant() != riccati::Variant::Section2) {
    throw AdmissibilityError("closed-form families use the section-2 Riccati variant");
  }
  std::optional<double> H0 = implied_level(spec.kind, spec.g0, spec.h0);
  if (spec.H0) {
    if (H0 && std::abs(*spec.H0 - *H0) > kLevelTol * std::max(1.0, std::abs(*H0))) {
      throw AdmissibilityError(std::string(kind_name(spec.kind)) + " family requires H0 = " + std::to_string(*H0));
    }
    H0 = spec.H0;
  }
  if (!H0) {
    throw AdmissibilityError(std::string(kind_name(spec.kind)) + " family needs an explicit H0");
  }
  const HamiltonianLevel level = level_roots(spec.g0, spec.h0, *H0);
  Envelope env(spec.kind, level, spec.xi0, spec.sign);

  CoefficientFunctions c;
  c.a = abc.a;
  c.b = abc.b;
  c.c = abc.c;
  const double g0 = spec.g0;
  const double h0 = spec.h0;
  // Copies keep the family self-contained.
  c.d = [a = abc.a, ric](double t) { return -2.0 * a(t) * ric.alpha(t); };
  c.g = [a = abc.a, ric, g0](double t) {
    const double beta = ric.beta(t);
    return g0 * a(t) * beta * beta;
  };
  c.h = [a = abc.a, ric, h0](double t) {
    const double beta = ric.beta(t);
    return h0 * a(t) * beta * beta;
  };
  FamilySpec resolved = spec;
  resolved.H0 = H0;
  return SolutionFamily(resolved, level, env, ric, std::move(c));
}

SolutionFamily build_family(const FamilySpec& spec, const CoefficientFunctions& abc, riccati::InitialData init,
                            double t_end) {
  const std::vector<double> grid{0.0, t_end};
  return build_family(spec, riccati::solve_section2_numeric(abc, init, grid), abc);
}

FieldSample eval_fields(const SolutionFamily& fam, double x, double t) { return fam(x, t); }

FieldGrid sample_family(const SolutionFamily& fam, const std::vector<double>& x, const std::vector<double>& t) {
  FieldGrid g{x, t, std::vector<Complex>(x.size() * t.size()), std::vector<Complex>(x.size() * t.size())};
  for (std::size_t it = 0; it < t.size(); ++it) {
    const double a = fam.riccati().alpha(t[it]);
    const double b = fam.riccati().beta(t[it]);
    const double c = fam.riccati().gamma(t[it]);
    for (std::size_t ix = 0; ix < x.size(); ++ix) {
      const double xv = x[ix];
      const double G = fam.envelope()(b * xv + 2.0 * c);
      const Complex rot = std::polar(1.0, a * xv * xv + b * xv + c);
      g.psi_at(it, ix) = G * rot;
      g.phi_at(it, ix) = G * std::conj(rot);
    }
  }
  return g;
}

ResidualReport residual_oracle(const FieldGrid& grid, const CoefficientFunctions& coeffs) {
  const std::size_t nx = grid.x.size();
  const std::size_t nt = grid.t.size();
  if (nx < 5 || nt < 3) {
    throw DomainError("residual oracle needs at least 5 x-nodes and 3 t-slices");
  }
  const double dx = grid.x[1] - grid.x[0];
  const Complex I{0.0, 1.0};
  ResidualReport rep;
  for (std::size_t it = 1; it + 1 < nt; ++it) {
    const double t = grid.t[it];
    const double two_dt = grid.t[it + 1] - grid.t[it - 1];
    const double a = coeffs.a(t);
    const double b = coeffs.b(t);
    const double c = coeffs.c(t);
    const double d = coeffs.d(t);
    const double g = coeffs.g(t);
    const double h = coeffs.h(t);
    for (std::size_t ix = 2; ix + 2 < nx; ++ix) {
      const double x = grid.x[ix];
      auto derivs = [&](auto at) {
        const Complex fm2 = at(it, ix - 2);
        const Complex fm1 = at(it, ix - 1);
        const Complex f0 = at(it, ix);
        const Complex fp1 = at(it, ix + 1);
        const Complex fp2 = at(it, ix + 2);
        const Complex fx = (fm2 - 8.0 * fm1 + 8.0 * fp1 - fp2) / (12.0 * dx);
        const Complex fxx = (-fm2 + 16.0 * fm1 - 30.0 * f0 + 16.0 * fp1 - fp2) / (12.0 * dx * dx);
        const Complex ft = (at(it + 1, ix) - at(it - 1, ix)) / two_dt;
        return std::array<Complex, 4>{f0, fx, fxx, ft};
      };
      const auto [psi, psi_x, psi_xx, psi_t] =
          derivs([&](std::size_t i, std::size_t j) { return grid.psi_at(i, j); });
      const auto [phi, phi_x, phi_xx, phi_t] =
          derivs([&](std::size_t i, std::size_t j) { return grid.phi_at(i, j); });
      const double S = std::norm(psi) + std::norm(phi);
      const double pot = b * x * x + g + h * S;
      const Complex r_psi = I * psi_t + a * psi_xx - pot * psi + I * c * x * psi_x + I * d * psi;
      const Complex r_phi = I * phi_t - a * phi_xx + pot * phi + I * c * x * phi_x + I * d * phi;
      rep.max_residual_psi = std::max(rep.max_residual_psi, std::abs(r_psi));
      rep.max_residual_phi = std::max(rep.max_residual_phi, std::abs(r_phi));
    }
  }
  return rep;
}

ResidualCertificate certify(const SolutionFamily& fam, const Window& w, double dx, double dt) {
  if (!(dx > 0.0) || !(dt > 0.0)) {
    throw DomainError("grid spacings must be positive");
  }
  constexpr double kRoundoffFloor = 1e-9;
  ResidualCertificate cert;
  cert.fine = residual_oracle(sample_family(fam, uniform(w.x0, w.x1, dx), uniform(w.t0, w.t1, dt)),
                              fam.coefficients());
  cert.coarse = residual_oracle(sample_family(fam, uniform(w.x0, w.x1, 2 * dx), uniform(w.t0, w.t1, 2 * dt)),
                                fam.coefficients());
  cert.ratio = cert.fine.max() > 0.0 ? cert.coarse.max() / cert.fine.max() : INFINITY;
  cert.converging = cert.fine.max() < kRoundoffFloor || cert.ratio >= 2.0;
  if (!cert.converging) {
    cert.warning = "residual not converging under refinement (ratio " + std::to_string(cert.ratio) +
                   "); grid too coarse for the stencils";
  }
  return cert;
}

}  // namespace cnls::exact
