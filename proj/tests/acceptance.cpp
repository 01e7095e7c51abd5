// Acceptance gate: one PASS/FAIL line per criterion, exit status 0 iff all pass.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cnls/coeffexpr.hpp"
#include "cnls/elliptic.hpp"
#include "cnls/exact.hpp"
#include "cnls/mi.hpp"
#include "cnls/pdesim.hpp"
#include "cnls/phaseplane.hpp"
#include "cnls/riccati.hpp"
#include "oracles.hpp"

using namespace cnls;
using std::numbers::pi;

namespace {

struct Verdict {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << "[failed: " << what << "] ";
    }
  }
};

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

CoefficientFunctions parse(const CoefficientSources& s) { return CoefficientSet::parse(s).functions(); }

CoefficientSources trap_set(double d0) {
  std::ostringstream d;
  d << d0 << "*exp(2 - cos(t))";
  return {.a = "exp(cos(t))", .b = "0.25*exp(-cos(t))*cos(t)", .d = d.str(), .g = "exp(2 - cos(t))",
          .h = "-8*exp(1)"};
}

void elliptic_identities(Verdict& v) {
  double worst_sc = 0.0;
  double worst_dn = 0.0;
  for (int j = 0; j <= 99; ++j) {
    const double l = 0.01 * j;
    const elliptic::Modulus m(l);
    for (int i = 0; i <= 400; ++i) {
      const auto s = elliptic::jacobi(-10.0 + 0.05 * i, m);
      worst_sc = std::max(worst_sc, std::abs(s.sn * s.sn + s.cn * s.cn - 1.0));
      worst_dn = std::max(worst_dn, std::abs(s.dn * s.dn + l * l * s.sn * s.sn - 1.0));
    }
  }
  double worst_sech = 0.0;
  for (int i = 0; i <= 400; ++i) {
    const double u = -10.0 + 0.05 * i;
    worst_sech = std::max(worst_sech, std::abs(elliptic::jacobi_dn(u, elliptic::Modulus(1.0)) - 1.0 / std::cosh(u)));
  }
  v.require(worst_sc < 1e-10, "sn^2 + cn^2");
  v.require(worst_dn < 1e-10, "dn^2 + l^2 sn^2");
  v.require(worst_sech < 1e-10, "dn(u, 1) = sech u");
  v.detail << "sn/cn " << sci(worst_sc) << ", dn " << sci(worst_dn) << ", sech " << sci(worst_sech);
}

void fixed_point_taxonomy(Verdict& v) {
  using phaseplane::FixedPointKind;
  struct Expected {
    double g0, h0;
    std::vector<std::pair<double, FixedPointKind>> points;
  };
  const double r = std::sqrt(2.0);
  const std::vector<Expected> cases{
      {1.0, 0.5, {{0.0, FixedPointKind::Saddle}}},
      {-1.0, -0.5, {{0.0, FixedPointKind::Center}}},
      {2.0, -0.5, {{-r, FixedPointKind::Center}, {0.0, FixedPointKind::Saddle}, {r, FixedPointKind::Center}}},
      {-2.0, 0.5, {{-r, FixedPointKind::Saddle}, {0.0, FixedPointKind::Center}, {r, FixedPointKind::Saddle}}},
  };
  for (const auto& c : cases) {
    const auto found = phaseplane::fixed_points({c.g0, c.h0, std::nullopt});
    bool ok = found.size() == c.points.size();
    for (const auto& [G, kind] : c.points) {
      bool hit = false;
      for (const auto& fp : found) {
        hit = hit || (std::abs(fp.G - G) < 1e-12 && std::abs(fp.P) < 1e-12 && fp.kind == kind);
      }
      ok = ok && hit;
    }
    v.require(ok, "(" + sci(c.g0) + ", " + sci(c.h0) + ")");
  }
  v.detail << "4 parameter pairs checked";
}

void riccati_closed_forms(Verdict& v) {
  const auto f = parse(trap_set(-1e-2));
  const auto sol = riccati::solve_theorem1(f, {}, riccati::uniform_grid(0.0, 3.0, 301));
  double worst = 0.0;
  double worst_struct = 0.0;
  for (int i = 0; i <= 300; ++i) {
    const double t = 0.01 * i;
    const double gamma = oracle::simpson([](double s) { return std::exp(2.0 - std::cos(s)); }, 0.0, t, 2000);
    worst = std::max({worst, std::abs(sol.alpha(t) + 0.25 * std::exp(-std::cos(t)) * std::sin(t)),
                      std::abs(sol.beta(t) - std::exp(1.0 - std::cos(t))), std::abs(sol.gamma(t) - gamma),
                      std::abs(sol.mu(t) - std::exp(std::cos(t) - 1.0))});
    const double ab2 = f.a(t) * sol.beta(t) * sol.beta(t);
    worst_struct = std::max({worst_struct, std::abs(f.h(t) / (ab2 * sol.mu(t)) + 8.0) / 8.0,
                             std::abs(f.d(t) / ab2 + 1e-2) / 1e-2});
  }
  v.require(worst < 1e-8, "pointwise closed forms");
  v.require(worst_struct < 1e-10, "structural identities");
  v.detail << "closed forms " << sci(worst) << ", structural " << sci(worst_struct);
}

void exact_certification(Verdict& v) {
  CoefficientFunctions abc;
  abc.a = [](double t) { return 1.0 + 0.1 * std::sin(t); };
  abc.b = [](double) { return 0.02; };
  abc.c = [](double) { return 0.02; };
  abc.d = abc.g = abc.h = [](double) { return 0.0; };
  using exact::Kind;
  const std::vector<exact::FamilySpec> specs{
      {Kind::Dnoidal, 1.0, -1.0, -0.1}, {Kind::Bright, 1.0, -1.0, std::nullopt},
      {Kind::PlaneWave, 1.0, -1.0, std::nullopt}, {Kind::Cnoidal, 1.0, -1.0, 0.2},
      {Kind::Snoidal, -1.0, 1.0, 0.1}, {Kind::Dark, -1.0, 1.0, std::nullopt}};
  auto residual = [](const exact::SolutionFamily& fam, double dx, double dt) {
    std::vector<double> x;
    std::vector<double> t;
    for (long i = 0; i <= std::lround(8.0 / dx); ++i) x.push_back(-4.0 + i * dx);
    for (long i = 0; i <= std::lround(0.6 / dt); ++i) t.push_back(0.2 + i * dt);
    return exact::residual_oracle(exact::sample_family(fam, x, t), fam.coefficients()).max();
  };
  double min_px = 1e300;
  double min_pt = 1e300;
  double worst = 0.0;
  for (const auto& spec : specs) {
    const auto fam = exact::build_family(spec, abc, {.alpha0 = 0.0, .beta0 = 0.5}, 1.0);
    const double x0 = residual(fam, 0.2, 1e-4);
    const double x1 = residual(fam, 0.1, 1e-4);
    const double x2 = residual(fam, 0.05, 1e-4);
    const double t0 = residual(fam, 1e-2, 4e-3);
    const double t1 = residual(fam, 1e-2, 2e-3);
    const double t2 = residual(fam, 1e-2, 1e-3);
    const double px = std::min(std::log2(x0 / x1), std::log2(x1 / x2));
    const double pt = std::min(std::log2(t0 / t1), std::log2(t1 / t2));
    const std::string name = exact::kind_name(spec.kind);
    v.require(px >= 3.5, name + " x-order " + sci(px));
    v.require(pt >= 1.8, name + " t-order " + sci(pt));
    v.require(t2 < 1e-6, name + " residual " + sci(t2));
    min_px = std::min(min_px, px);
    min_pt = std::min(min_pt, pt);
    worst = std::max(worst, t2);
  }
  v.detail << "min x-order " << sci(min_px) << ", min t-order " << sci(min_pt) << ", max residual " << sci(worst);
}

void hamiltonian_conservation(Verdict& v) {
  const phaseplane::PlanarParams free{2.0, -0.5, std::nullopt};
  const phaseplane::PlanarParams forced{2.0, -0.5, phaseplane::Forcing{0.8, 0.9}};
  const auto orbit = phaseplane::integrate_orbit(free, {0.03, 0.02}, 200.0, 1e-3);
  const double drift = orbit.relative_energy_drift();
  const double regular = phaseplane::spectral_concentration(phaseplane::spectrum(orbit));
  const auto flags = phaseplane::chaos_indicators(forced, {0.03, 0.02}, {0.04, 0.02}, 200.0, 1e-3);
  v.require(drift < 1e-8, "energy drift");
  v.require(flags.amplification > 100.0, "amplification");
  v.require(flags.concentration < 0.5, "forced concentration");
  v.require(regular > 0.8, "unforced concentration");
  v.detail << "drift " << sci(drift) << ", amplification " << sci(flags.amplification) << ", top-5 power "
           << sci(flags.concentration) << " forced vs " << sci(regular) << " unforced";
}

void mi_analytics(Verdict& v) {
  double worst = 0.0;
  for (const char* name : {"1+", "1-", "2", "3"}) {
    const auto p = mi::gain_preset(name);
    for (int i = 0; i < 200; ++i) {
      for (int j = 0; j < 200; ++j) {
        const double k = -6.0 + 12.0 * i / 199.0;
        const double t = 3.0 * j / 199.0;
        const double ref = p.closed_form(k, t);
        worst = std::max(worst, std::abs(mi::gain(p.cw, k, t) - ref) / std::max(1.0, std::abs(ref)));
      }
    }
  }
  const double b1 = mi::instability_region(mi::gain_preset("1+").cw, 0.0);
  const double b2 = mi::instability_region(mi::gain_preset("2").cw, 0.0);
  const double b3 = mi::instability_region(mi::gain_preset("3").cw, 0.0);
  const double bound_err =
      std::max({std::abs(b1 - std::sqrt(8.0)), std::abs(b2 - 2.0), std::abs(b3 - 4.0)});

  std::mt19937_64 rng(20240917);
  std::uniform_real_distribution<double> kd(-6.0, 6.0);
  std::uniform_real_distribution<double> td(0.0, 3.0);
  const std::vector<mi::Preset> presets{mi::gain_preset("1+"), mi::gain_preset("1-"), mi::gain_preset("2"),
                                        mi::gain_preset("3")};
  double worst_det = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const auto& p = presets[static_cast<std::size_t>(i) % presets.size()];
    const double k = kd(rng);
    const double t = td(rng);
    for (auto br : {mi::Branch::Plus, mi::Branch::Minus}) {
      const auto w = mi::dispersion_relation(p.cw, k, t, br);
      worst_det = std::max(worst_det, std::abs(mi::determinant_oracle(p.cw, k, t, w)) /
                                          std::pow(mi::matrix_scale(p.cw, k, t, w), 4));
    }
  }
  v.require(worst < 1e-12, "gain vs closed forms");
  v.require(bound_err < 1e-12, "instability bounds");
  v.require(worst_det < 1e-8, "dispersion roots");
  v.detail << "gain " << sci(worst) << ", bounds " << sci(bound_err) << ", |det M| " << sci(worst_det);
}

void mi_simulation(Verdict& v) {
  struct Case {
    double k;
    double t_end;
  };
  for (const Case c : {Case{0.5, 12.0}, Case{1.0, 8.0}, Case{1.5, 8.0}, Case{3.0, 6.0}}) {
    pdesim::RunConfig cfg;
    cfg.grid = pdesim::Grid{16.0 * pi, 1024, 1e-4, c.t_end};
    cfg.coeffs = {.a = "1", .h = "-1"};
    cfg.init = pdesim::InitSpec{.k = c.k, .eps1 = 1e-6, .eps2 = 1e-6};
    cfg.output.sample_interval = 0.05;
    cfg.output.tracked_modes = {c.k};
    const auto r = pdesim::run(cfg);
    v.require(!r.blew_up, "run finished");
    const double half_gain = c.k * c.k < 4.0 ? c.k * std::sqrt(4.0 - c.k * c.k) : 0.0;
    pdesim::FitOptions opts{.max_fraction = 1e-2};
    if (half_gain > 0.0) {
      opts.t_start = 2.0 / half_gain;
    } else {
      opts.residual_threshold = 1.0;
    }
    const auto fit = pdesim::mode_growth(r.diagnostics, c.k, opts);
    if (half_gain > 0.0) {
      v.require(std::abs(fit.rate - half_gain) < 0.1 * half_gain, "k = " + sci(c.k));
      v.detail << "k=" << c.k << ": " << sci(fit.rate) << " vs " << sci(half_gain) << "; ";
    } else {
      v.require(std::abs(fit.rate) < 0.05, "stable k = " + sci(c.k));
      v.detail << "k=" << c.k << ": " << sci(fit.rate);
    }
  }
}

double run_mass_ratio_error(const CoefficientSources& src, double t_end, const std::function<double(double)>& d) {
  const double L = 16.0 * pi;
  const std::size_t n = 256;
  const double dt = 1e-3;
  pdesim::Stepper st(L, n, parse(src));
  auto f = pdesim::initial_fields({L, n, dt, t_end}, {.k = 4.0, .eps1 = 1e-2, .eps2 = 1e-4});
  const double N0 = st.mass(f);
  double worst = 0.0;
  const long steps = std::lround(t_end / dt);
  for (long i = 1; i <= steps; ++i) {
    st.step(f, dt);
    if (i % 100 == 0) {
      const double expect = std::exp(-2.0 * oracle::simpson(d, 0.0, f.t, 2000));
      worst = std::max(worst, std::abs(st.mass(f) / N0 / expect - 1.0));
    }
  }
  return worst;
}

void balance_laws(Verdict& v) {
  const double plus = run_mass_ratio_error({.a = "1 + cos(t)", .d = "t", .g = "cos(t)", .h = "-2 - 2*cos(t)"}, 1.4,
                                           [](double t) { return t; });
  const double minus = run_mass_ratio_error({.a = "1 + cos(t)", .d = "-t", .g = "cos(t)", .h = "-2 - 2*cos(t)"}, 1.4,
                                            [](double t) { return -t; });
  const double trap =
      run_mass_ratio_error(trap_set(-1e-2), 0.5, [](double t) { return -1e-2 * std::exp(2.0 - std::cos(t)); });
  v.require(std::max({plus, minus, trap}) < 1e-6, "mass law");

  const double L = 16.0 * pi;
  const std::size_t n = 512;
  const pdesim::Grid g{L, n, 1e-3, 1.0};
  const auto x = g.points();
  auto drift = [&](const CoefficientSources& src, pdesim::FieldPair f) {
    pdesim::Stepper st(L, n, parse(src));
    const double L0 = st.momentum(f);
    double worst = 0.0;
    for (int i = 1; i <= 1000; ++i) {
      st.step(f, 1e-3);
      if (i % 100 == 0) {
        worst = std::max(worst, std::abs(st.momentum(f) - L0));
      }
    }
    return worst;
  };
  pdesim::FieldPair moving{std::vector<pdesim::Complex>(n), std::vector<pdesim::Complex>(n), 0.0};
  for (std::size_t j = 0; j < n; ++j) {
    moving.psi[j] = std::polar(1.0 / std::cosh(x[j]), 0.5 * x[j]);
    moving.phi[j] = std::polar(0.8 / std::cosh(x[j] - 1.0), -0.3 * x[j]);
  }
  const double linear = drift({.a = "1 + 0.5*sin(t)", .g = "cos(t)"}, moving);
  const double baseline = drift({.a = "1", .h = "-1"}, pdesim::initial_fields(g, {.k = 1.0, .eps1 = 1e-2, .eps2 = 1e-2}));
  const double waves = drift({.a = "1", .g = "0.5", .h = "-1"}, pdesim::initial_fields(g, {.type = "plane_wave", .k = 0.75}));
  v.require(std::max({linear, baseline, waves}) < 1e-7, "momentum conservation");
  v.detail << "mass d=t " << sci(plus) << ", d=-t " << sci(minus) << ", trap " << sci(trap) << "; momentum "
           << sci(linear) << ", " << sci(baseline) << ", " << sci(waves);
}

void theorem1_equivalence(Verdict& v) {
  const auto trap = parse(trap_set(-1e-2));
  const auto ric = riccati::solve_theorem1(trap, {}, riccati::uniform_grid(0.0, 1.2, 1201));
  const auto cw = mi::cw_background(parse({.a = "1", .d = "-0.01", .g = "1", .h = "-8"}), 1.0, 1.0);
  std::vector<double> x;
  for (int i = 0; i <= 800; ++i) {
    x.push_back(-4.0 + 0.01 * i);
  }
  const double dt = 1e-5;
  double worst = 0.0;
  for (double tc : {0.1, 0.4, 0.8, 1.0}) {
    exact::FieldGrid g;
    g.x = x;
    g.t = {tc - dt, tc, tc + dt};
    for (double t : g.t) {
      const double tau = ric.gamma(t);
      const std::vector<pdesim::Complex> u(16, cw.psi0(tau));
      const std::vector<pdesim::Complex> w(16, cw.phi0(tau));
      const auto f = pdesim::theorem1_transform(u, w, 8.0, ric, t, x);
      g.psi.insert(g.psi.end(), f.psi.begin(), f.psi.end());
      g.phi.insert(g.phi.end(), f.phi.begin(), f.phi.end());
    }
    worst = std::max(worst, exact::residual_oracle(g, trap).max());
  }
  v.require(worst < 1e-5, "transformed CW residual");

  const std::size_t n = 64;
  const double Lxi = 8.0;
  std::vector<double> xi(n);
  std::vector<pdesim::Complex> u(n);
  std::vector<pdesim::Complex> w(n);
  for (std::size_t j = 0; j < n; ++j) {
    xi[j] = -0.5 * Lxi + Lxi * static_cast<double>(j) / n;
    u[j] = 1.0 + 0.3 * std::polar(1.0, 2.0 * pi / Lxi * 3.0 * xi[j]);
    w[j] = std::cos(2.0 * pi / Lxi * 2.0 * xi[j]);
  }
  const auto at0 = pdesim::theorem1_transform(u, w, Lxi, ric, 0.0, xi);
  double ident = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    ident = std::max({ident, std::abs(at0.psi[j] - u[j]), std::abs(at0.phi[j] - w[j])});
  }
  v.require(ident < 1e-12, "identity at t = 0");

  auto mode_at_end = [](double d0) {
    pdesim::RunConfig cfg;
    cfg.grid = pdesim::Grid{16.0 * pi, 1024, 1e-4, 0.25};
    cfg.coeffs = trap_set(d0);
    cfg.init = pdesim::InitSpec{.k = 3.0, .eps1 = 1e-4, .eps2 = 1e-4};
    cfg.output.sample_interval = 0.05;
    cfg.output.tracked_modes = {3.0};
    const auto r = pdesim::run(cfg);
    return std::pair{r.diagnostics.samples.front().modes[0], r.diagnostics.samples.back().modes[0]};
  };
  const auto [supply0, supply] = mode_at_end(-1e-2);
  const auto [damp0, damp] = mode_at_end(1e-2);
  v.require(supply > supply0 && damp > damp0, "tracked mode grows");
  v.require(damp < supply, "dissipative run grows slower");
  v.detail << "residual " << sci(worst) << ", identity " << sci(ident) << "; mode at t=0.25: " << sci(supply)
           << " (d0=-1e-2) vs " << sci(damp) << " (d0=+1e-2) from " << sci(supply0);
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    double budget_seconds;
    void (*run)(Verdict&);
  };
  const Criterion criteria[] = {
      {"elliptic identities", 1.0, elliptic_identities},
      {"fixed-point taxonomy", 1.0, fixed_point_taxonomy},
      {"riccati closed forms", 5.0, riccati_closed_forms},
      {"exact-solution certification", 30.0, exact_certification},
      {"hamiltonian conservation", 10.0, hamiltonian_conservation},
      {"mi analytics", 5.0, mi_analytics},
      {"mi simulation vs theory", 120.0, mi_simulation},
      {"balance laws", 60.0, balance_laws},
      {"riccati-map equivalence", 120.0, theorem1_equivalence},
  };
  int failed = 0;
  int index = 0;
  for (const auto& c : criteria) {
    ++index;
    Verdict v;
    const auto start = std::chrono::steady_clock::now();
    try {
      c.run(v);
    } catch (const std::exception& e) {
      v.pass = false;
      v.detail << "threw: " << e.what();
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    v.require(seconds < c.budget_seconds, "runtime budget " + sci(c.budget_seconds) + " s");
    failed += v.pass ? 0 : 1;
    std::printf("%s %d %-30s %6.2fs  %s\n", v.pass ? "PASS" : "FAIL", index, c.name, seconds, v.detail.str().c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%d criteria passed\n", index - failed, index);
  return failed == 0 ? 0 : 1;
}
