#include "cnls/riccati.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "cnls/errors.hpp"

namespace cnls::riccati {

namespace {

constexpr double kSingularTol = 1e-12;
constexpr double kFdStep = 1e-4;

using State = std::array<double, 4>;

void check_grid(std::span<const double> t_grid) {
  if (t_grid.size() < 2) {
    throw DomainError("time grid needs at least two points");
  }
  if (t_grid.front() != 0.0) {
    throw DomainError("time grid must start at t = 0");
  }
  for (std::size_t i = 1; i < t_grid.size(); ++i) {
    if (!(t_grid[i] > t_grid[i - 1])) {
      throw DomainError("time grid must be strictly increasing");
    }
  }
}

void check_beta0(const InitialData& init) {
  if (init.beta0 == 0.0 || !std::isfinite(init.beta0)) {
    throw DomainError("beta(0) must be finite and nonzero");
  }
}

// Dense solver nodes covering [0, T].
std::vector<double> dense_nodes(double t_end) {
  const auto n = static_cast<std::size_t>(std::max(1000.0, std::ceil(100.0 * t_end)));
  return uniform_grid(0.0, t_end, n);
}

State axpy(const State& y, double s, const State& k) {
  State r;
  for (std::size_t i = 0; i < r.size(); ++i) {
    r[i] = y[i] + s * k[i];
  }
  return r;
}

bool all_finite(const State& y) {
  return std::all_of(y.begin(), y.end(), [](double v) { return std::isfinite(v); });
}

// Fixed-step RK4 over the given nodes.  `stop` inspects each accepted state
// and may throw.  Returns states and their derivatives at the nodes.
template <typename Rhs, typename Stop>
std::pair<std::vector<State>, std::vector<State>> rk4_nodes(const Rhs& rhs, State y0, const std::vector<double>& t,
                                                            const Stop& stop) {
  std::vector<State> ys{y0};
  std::vector<State> dys{rhs(t[0], y0)};
  ys.reserve(t.size());
  dys.reserve(t.size());
  for (std::size_t i = 1; i < t.size(); ++i) {
    const double t0 = t[i - 1];
    const double h = t[i] - t0;
    const State& y = ys.back();
    const State& k1 = dys.back();
    const State k2 = rhs(t0 + h / 2, axpy(y, h / 2, k1));
    const State k3 = rhs(t0 + h / 2, axpy(y, h / 2, k2));
    const State k4 = rhs(t[i], axpy(y, h, k3));
    State next;
    for (std::size_t j = 0; j < next.size(); ++j) {
      next[j] = y[j] + h / 6 * (k1[j] + 2 * k2[j] + 2 * k3[j] + k4[j]);
    }
    stop(t0, t[i], next);
    ys.push_back(next);
    dys.push_back(rhs(t[i], next));
  }
  return {std::move(ys), std::move(dys)};
}

RiccatiSolution::Samples to_samples(const std::vector<double>& t, const std::vector<State>& ys,
                                    const std::vector<State>& dys) {
  RiccatiSolution::Samples s;
  s.t = t;
  for (std::size_t i = 0; i < t.size(); ++i) {
    s.alpha.push_back(ys[i][0]);
    s.beta.push_back(ys[i][1]);
    s.gamma.push_back(ys[i][2]);
    s.mu.push_back(ys[i][3]);
    s.dalpha.push_back(dys[i][0]);
    s.dbeta.push_back(dys[i][1]);
    s.dgamma.push_back(dys[i][2]);
    s.dmu.push_back(dys[i][3]);
  }
  return s;
}

// Right-hand side of either variant; mu is frozen for Section2.
auto system_rhs(const CoefficientFunctions& c, Variant variant) {
  const double gamma_sign = variant == Variant::Section2 ? -1.0 : 1.0;
  return [&c, variant, gamma_sign](double t, const State& y) {
    const double a = c.a(t);
    const double cc = c.c(t);
    const double alpha = y[0];
    const double beta = y[1];
    State dy;
    dy[0] = -c.b(t) - 2 * cc * alpha - 4 * a * alpha * alpha;
    dy[1] = -(cc + 4 * a * alpha) * beta;
    dy[2] = gamma_sign * a * beta * beta;
    dy[3] = variant == Variant::Theorem1 ? 4 * a * alpha * y[3] : 0.0;
    return dy;
  };
}

double five_point(const std::function<double(double)>& f, double t) {
  const double h = kFdStep;
  return (f(t - 2 * h) - 8 * f(t - h) + 8 * f(t + h) - f(t + 2 * h)) / (12 * h);
}

template <typename Eval>
Residuals collect_residuals(const RiccatiSolution& sol, std::span<const double> times, const Eval& eval) {
  Residuals r;
  for (const double t : times) {
    if (t - 2 * kFdStep < sol.t_min() || t + 2 * kFdStep > sol.t_max()) {
      continue;
    }
    const Residuals here = eval(t);
    r.alpha = std::max(r.alpha, std::abs(here.alpha));
    r.beta = std::max(r.beta, std::abs(here.beta));
    r.gamma = std::max(r.gamma, std::abs(here.gamma));
    r.mu = std::max(r.mu, std::abs(here.mu));
  }
  return r;
}

}  // namespace

RiccatiSolution RiccatiSolution::from_samples(Variant variant, InitialData init, Samples s) {
  RiccatiSolution sol;
  sol.variant_ = variant;
  sol.init_ = init;
  sol.t_min_ = s.t.front();
  sol.t_max_ = s.t.back();
  sol.nodes_ = s.t;
  auto wrap = [](HermiteSeries h) { return TimeFunction([h = std::move(h)](double t) { return h(t); }); };
  sol.alpha_ = wrap(HermiteSeries(s.t, std::move(s.alpha), std::move(s.dalpha)));
  sol.beta_ = wrap(HermiteSeries(s.t, std::move(s.beta), std::move(s.dbeta)));
  sol.gamma_ = wrap(HermiteSeries(s.t, std::move(s.gamma), std::move(s.dgamma)));
  sol.mu_ = wrap(HermiteSeries(std::move(s.t), std::move(s.mu), std::move(s.dmu)));
  return sol;
}

RiccatiSolution RiccatiSolution::closed_form(Variant variant, InitialData init, double t_min, double t_max,
                                             TimeFunction alpha, TimeFunction beta, TimeFunction gamma,
                                             TimeFunction mu) {
  if (!(t_max >= t_min)) {
    throw DomainError("empty time range");
  }
  RiccatiSolution sol;
  sol.variant_ = variant;
  sol.init_ = init;
  sol.t_min_ = t_min;
  sol.t_max_ = t_max;
  sol.alpha_ = std::move(alpha);
  sol.beta_ = std::move(beta);
  sol.gamma_ = std::move(gamma);
  sol.mu_ = std::move(mu);
  return sol;
}

void RiccatiSolution::check_range(double t) const {
  if (!(t >= t_min_ && t <= t_max_)) {
    throw DomainError("t = " + std::to_string(t) + " outside the solved range [" + std::to_string(t_min_) + ", " +
                      std::to_string(t_max_) + "]");
  }
}

double RiccatiSolution::alpha(double t) const {
  check_range(t);
  return alpha_(t);
}

double RiccatiSolution::beta(double t) const {
  check_range(t);
  return beta_(t);
}

double RiccatiSolution::gamma(double t) const {
  check_range(t);
  return gamma_(t);
}

double RiccatiSolution::mu(double t) const {
  check_range(t);
  return mu_(t);
}

Phase phase_theta(const RiccatiSolution& sol, double x, double t) {
  const double alpha = sol.alpha(t);
  const double beta = sol.beta(t);
  const double gamma = sol.gamma(t);
  Phase p{alpha * x * x + beta * x + gamma, 0.0, 0.0};
  if (sol.variant() == Variant::Section2) {
    p.xi = beta * x + 2 * gamma;
    p.tau = t;
  } else {
    p.xi = beta * x;
    p.tau = gamma;
  }
  return p;
}

CharacteristicPair::CharacteristicPair(HermiteSeries mu0, HermiteSeries dmu0, HermiteSeries mu1, HermiteSeries dmu1)
    : mu0_(std::move(mu0)), dmu0_(std::move(dmu0)), mu1_(std::move(mu1)), dmu1_(std::move(dmu1)) {}

RiccatiSolution solve_section2(const CoefficientFunctions& coeffs, InitialData init, std::span<const double> t_grid,
                               const Section2Options& opts) {
  check_grid(t_grid);
  check_beta0(init);
  const auto t = dense_nodes(t_grid.back());
  const double tol = opts.quadrature_tol;
  const auto& a = coeffs.a;
  const auto& b = coeffs.b;
  const auto& c = coeffs.c;
  const auto& d = coeffs.d;

  // E(t) = 2 int (c - d), tabulated and interpolated for the nested integral.
  auto cd = [&](double s) { return c(s) - d(s); };
  auto e_vals = cumulative_integral(cd, t, tol / 2);
  std::vector<double> e_slopes(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    e_vals[i] *= 2;
    e_slopes[i] = 2 * cd(t[i]);
  }
  const HermiteSeries E(t, e_vals, e_slopes);
  const auto J = cumulative_integral([&](double s) { return b(s) * std::exp(E(s)); }, t, tol);

  auto c2d = [&](double s) { return c(s) - 2 * d(s); };
  const auto f_vals = cumulative_integral(c2d, t, tol);
  std::vector<double> f_slopes(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    f_slopes[i] = c2d(t[i]);
  }
  const HermiteSeries F(t, f_vals, f_slopes);
  const double beta0 = init.beta0;
  const auto G =
      cumulative_integral([&](double s) { return a(s) * beta0 * beta0 * std::exp(-2 * F(s)); }, t, tol);

  RiccatiSolution::Samples s;
  s.t = t;
  double worst = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double ti = t[i];
    const double ai = a(ti);
    const double ci = c(ti);
    const double di = d(ti);
    const double alpha = std::exp(-e_vals[i]) * (init.alpha0 - J[i]);
    const double beta = beta0 * std::exp(-f_vals[i]);
    const double gamma = init.gamma0 - G[i];
    const double dalpha = -b(ti) - 2 * (ci - di) * alpha;
    const double dbeta = -(ci - 2 * di) * beta;
    const double dgamma = -ai * beta * beta;
    if (!std::isfinite(alpha) || !std::isfinite(beta) || !std::isfinite(gamma)) {
      throw SingularityError("section-2 closed form overflowed", i > 0 ? t[i - 1] : ti, ti);
    }
    s.alpha.push_back(alpha);
    s.beta.push_back(beta);
    s.gamma.push_back(gamma);
    s.mu.push_back(init.mu0);
    s.dalpha.push_back(dalpha);
    s.dbeta.push_back(dbeta);
    s.dgamma.push_back(dgamma);
    s.dmu.push_back(0.0);
    // Unreduced residuals of the alpha and beta equations (the gamma one is exact).
    const double r_alpha = dalpha + b(ti) + 2 * ci * alpha + 4 * ai * alpha * alpha;
    const double r_beta = dbeta + (ci + 4 * ai * alpha) * beta;
    worst = std::max({worst, std::abs(r_alpha), std::abs(r_beta)});
  }
  if (opts.enforce_consistency && !(worst <= opts.consistency_tol)) {
    throw InconsistencyError("coefficients violate d = -2 a alpha", worst);
  }
  return RiccatiSolution::from_samples(Variant::Section2, init, std::move(s));
}

RiccatiSolution solve_section2_numeric(const CoefficientFunctions& coeffs, InitialData init,
                                       std::span<const double> t_grid) {
  check_grid(t_grid);
  check_beta0(init);
  const auto t = dense_nodes(t_grid.back());
  auto [ys, dys] = rk4_nodes(system_rhs(coeffs, Variant::Section2),
                             State{init.alpha0, init.beta0, init.gamma0, init.mu0}, t,
                             [](double t0, double t1, const State& y) {
                               if (!all_finite(y)) {
                                 throw SingularityError("Riccati solution blew up", t0, t1);
                               }
                             });
  return RiccatiSolution::from_samples(Variant::Section2, init, to_samples(t, ys, dys));
}

RiccatiSolution solve_theorem1(const CoefficientFunctions& coeffs, InitialData init, std::span<const double> t_grid,
                               const CharacteristicPair* pair) {
  check_grid(t_grid);
  check_beta0(init);
  if (!(init.mu0 > 0.0)) {
    throw DomainError("mu(0) must be positive");
  }
  const auto t = dense_nodes(t_grid.back());
  auto [ys, dys] = rk4_nodes(system_rhs(coeffs, Variant::Theorem1),
                             State{init.alpha0, init.beta0, init.gamma0, init.mu0}, t,
                             [](double t0, double t1, const State& y) {
                               if (!all_finite(y) || y[3] <= kSingularTol) {
                                 throw SingularityError("mu reaches zero", t0, t1);
                               }
                             });
  auto sol = RiccatiSolution::from_samples(Variant::Theorem1, init, to_samples(t, ys, dys));
  if (pair != nullptr) {
    const auto closed = solve_appendix_multiparameter(coeffs, *pair, init, Variant::Theorem1);
    double dev = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
      if (t[i] > closed.t_max()) {
        break;
      }
      dev = std::max({dev, std::abs(ys[i][0] - closed.alpha(t[i])), std::abs(ys[i][1] - closed.beta(t[i])),
                      std::abs(ys[i][2] - closed.gamma(t[i])), std::abs(ys[i][3] - closed.mu(t[i]))});
    }
    sol.cross_check_deviation = dev;
  }
  return sol;
}

CharacteristicPair characteristic_solutions(const CoefficientFunctions& coeffs, std::span<const double> t_grid,
                                            double mu1_at_zero) {
  check_grid(t_grid);
  if (mu1_at_zero == 0.0 || !std::isfinite(mu1_at_zero)) {
    throw DomainError("mu1(0) must be finite and nonzero");
  }
  const auto t = dense_nodes(t_grid.back());
  const auto& a = coeffs.a;
  const double a0 = a(0.0);
  if (a0 == 0.0) {
    throw SingularityError("coefficient a vanishes", 0.0, 0.0);
  }
  for (std::size_t i = 1; i < t.size(); ++i) {
    const double ai = a(t[i]);
    if (ai == 0.0 || (ai > 0.0) != (a0 > 0.0)) {
      throw SingularityError("coefficient a vanishes", t[i - 1], t[i]);
    }
  }

  // State layout: (mu0, mu0', mu1, mu1').
  auto rhs = [&](double s, const State& y) {
    const double h = 1e-3;
    const double da = (-a(s + 2 * h) + 8 * a(s + h) - 8 * a(s - h) + a(s - 2 * h)) / (12 * h);
    const double as = a(s);
    const double damp = 2 * coeffs.c(s) - da / as;
    const double stiff = 4 * as * coeffs.b(s);
    return State{y[1], -damp * y[1] - stiff * y[0], y[3], -damp * y[3] - stiff * y[2]};
  };
  auto [ys, dys] = rk4_nodes(rhs, State{0.0, 2 * a0, mu1_at_zero, 0.0}, t, [](double t0, double t1, const State& y) {
    if (!all_finite(y)) {
      throw SingularityError("characteristic solution blew up", t0, t1);
    }
    const double w = y[0] * y[3] - y[1] * y[2];
    const double scale = std::abs(y[0] * y[3]) + std::abs(y[1] * y[2]);
    if (std::abs(w) <= kSingularTol * scale) {
      throw SingularityError("characteristic pair became linearly dependent", t0, t1);
    }
  });

  std::vector<double> v[4], dv[4];
  for (std::size_t i = 0; i < t.size(); ++i) {
    for (int j = 0; j < 4; ++j) {
      v[j].push_back(ys[i][j]);
      dv[j].push_back(dys[i][j]);
    }
  }
  return CharacteristicPair(HermiteSeries(t, v[0], dv[0]), HermiteSeries(t, v[1], dv[1]),
                            HermiteSeries(t, v[2], dv[2]), HermiteSeries(t, v[3], dv[3]));
}

RiccatiSolution solve_appendix_multiparameter(const CoefficientFunctions& coeffs, const CharacteristicPair& pair,
                                              InitialData init, Variant variant) {
  check_beta0(init);
  const auto& t = pair.nodes();
  const auto ln_w = cumulative_integral(coeffs.c, t);
  const double m1 = pair.mu1_at_zero();
  const double gamma_sign = variant == Variant::Section2 ? -1.0 : 1.0;
  const auto rhs = system_rhs(coeffs, variant);

  RiccatiSolution::Samples s;
  s.t = t;
  double prev_q = 1.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double ti = t[i];
    const double mu0 = pair.mu0(ti);
    // Q = mu / mu(0) = 2 mu0 (alpha(0) + gamma0), with gamma0 = mu1 / (2 mu1(0) mu0).
    const double q = 2 * init.alpha0 * mu0 + pair.mu1(ti) / m1;
    const double dq = 2 * init.alpha0 * pair.dmu0(ti) + pair.dmu1(ti) / m1;
    if (std::abs(q) <= kSingularTol || (q > 0.0) != (prev_q > 0.0)) {
      throw SingularityError("alpha(0) + gamma0(t) vanishes", i > 0 ? t[i - 1] : ti, ti);
    }
    prev_q = q;
    const double w = std::exp(-ln_w[i]);
    State y;
    y[0] = dq / (4 * coeffs.a(ti) * q);
    y[1] = init.beta0 * w / q;
    y[2] = init.gamma0 + gamma_sign * init.beta0 * init.beta0 * mu0 / (2 * q);
    y[3] = init.mu0 * q;
    const State dy = rhs(ti, y);
    s.alpha.push_back(y[0]);
    s.beta.push_back(y[1]);
    s.gamma.push_back(y[2]);
    s.mu.push_back(y[3]);
    s.dalpha.push_back(dy[0]);
    s.dbeta.push_back(dy[1]);
    s.dgamma.push_back(dy[2]);
    s.dmu.push_back(init.mu0 * dq);
  }
  return RiccatiSolution::from_samples(variant, init, std::move(s));
}

AppendixAuxiliary appendix_auxiliary(const CoefficientFunctions& coeffs, const CharacteristicPair& pair, double t) {
  const double mu0 = pair.mu0(t);
  if (mu0 == 0.0) {
    throw SingularityError("mu0 vanishes", t, t);
  }
  const double w = std::exp(-integrate(coeffs.c, 0.0, t));
  return {pair.dmu0(t) / (4 * coeffs.a(t) * mu0), -w / mu0, pair.mu1(t) / (2 * pair.mu1_at_zero() * mu0), w};
}

double Residuals::max() const { return std::max({alpha, beta, gamma, mu}); }

Residuals residuals(const RiccatiSolution& sol, const CoefficientFunctions& c, std::span<const double> times) {
  const bool t1 = sol.variant() == Variant::Theorem1;
  return collect_residuals(sol, times, [&](double t) {
    const double a = c.a(t);
    const double alpha = sol.alpha(t);
    const double beta = sol.beta(t);
    Residuals r;
    r.alpha = five_point([&](double s) { return sol.alpha(s); }, t) + c.b(t) + 2 * c.c(t) * alpha +
              4 * a * alpha * alpha;
    r.beta = five_point([&](double s) { return sol.beta(s); }, t) + (c.c(t) + 4 * a * alpha) * beta;
    r.gamma = five_point([&](double s) { return sol.gamma(s); }, t) + (t1 ? -1.0 : 1.0) * a * beta * beta;
    if (t1) {
      r.mu = five_point([&](double s) { return sol.mu(s); }, t) - 4 * a * alpha * sol.mu(t);
    }
    return r;
  });
}

Residuals reduced_section2_residuals(const RiccatiSolution& sol, const CoefficientFunctions& c,
                                     std::span<const double> times) {
  return collect_residuals(sol, times, [&](double t) {
    const double d = c.d(t);
    const double beta = sol.beta(t);
    Residuals r;
    r.alpha = five_point([&](double s) { return sol.alpha(s); }, t) + c.b(t) + 2 * (c.c(t) - d) * sol.alpha(t);
    r.beta = five_point([&](double s) { return sol.beta(s); }, t) + (c.c(t) - 2 * d) * beta;
    r.gamma = five_point([&](double s) { return sol.gamma(s); }, t) + c.a(t) * beta * beta;
    return r;
  });
}

std::vector<double> uniform_grid(double t0, double t1, std::size_t n) {
  if (n == 0) {
    throw DomainError("grid needs at least one interval");
  }
  std::vector<double> g(n + 1);
  for (std::size_t i = 0; i <= n; ++i) {
    g[i] = t0 + (t1 - t0) * static_cast<double>(i) / static_cast<double>(n);
  }
  g.back() = t1;
  return g;
}

}  // namespace cnls::riccati
