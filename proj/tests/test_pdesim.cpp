#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "cnls/errors.hpp"
#include "cnls/exact.hpp"
#include "cnls/mi.hpp"
#include "cnls/pdesim.hpp"
#include "doctest.h"
#include "json.hpp"

using namespace cnls;
using namespace cnls::pdesim;
using std::numbers::pi;

namespace {

CoefficientFunctions coeffs(const CoefficientSources& src) { return CoefficientSet::parse(src).functions(); }

FieldPair blank(std::size_t n) { return FieldPair{std::vector<Complex>(n), std::vector<Complex>(n), 0.0}; }

double max_diff(const std::vector<Complex>& a, const std::vector<Complex>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    m = std::max(m, std::abs(a[i] - b[i]));
  }
  return m;
}

CoefficientSources trap_set(double d0) {
  std::ostringstream d;
  d << d0 << "*exp(2 - cos(t))";
  return {.a = "exp(cos(t))", .b = "0.25*exp(-cos(t))*cos(t)", .d = d.str(), .g = "exp(2 - cos(t))",
          .h = "-8*exp(1)"};
}

}  // namespace

TEST_SUITE("pdesim") {
  TEST_CASE("grid validation and wavenumber snapping") {
    Grid g;
    CHECK_NOTHROW(g.validate());
    CHECK(g.snap_wavenumber(1.0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(g.snap_wavenumber(1.03) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(g.snap_wavenumber(1.07) == doctest::Approx(1.125).epsilon(1e-15));
    g.n = 1000;
    CHECK_THROWS_AS(g.validate(), ConfigError);
    g.n = 1024;
    g.dt = 0.0;
    CHECK_THROWS_AS(g.validate(), ConfigError);
  }

  TEST_CASE("free dispersion follows the PDE signs") {
    const double L = 2.0 * pi;
    const std::size_t n = 64;
    Stepper st(L, n, coeffs({.a = "1"}));
    Grid g{L, n, 1e-3, 1.0};
    const auto x = g.points();
    const double k = 3.0;
    FieldPair f = blank(n);
    for (std::size_t j = 0; j < n; ++j) {
      f.psi[j] = std::polar(1.0, k * x[j]);
      f.phi[j] = std::polar(1.0, k * x[j]);
    }
    for (int i = 0; i < 500; ++i) {
      st.step(f, 1e-3);
    }
    double err = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      err = std::max(err, std::abs(f.psi[j] - std::polar(1.0, k * x[j] - k * k * f.t)));
      err = std::max(err, std::abs(f.phi[j] - std::polar(1.0, k * x[j] + k * k * f.t)));
    }
    CHECK(err < 1e-11);
  }

  TEST_CASE("constant loss decays the mass exactly") {
    Stepper st(2.0 * pi, 64, coeffs({.a = "1", .d = "0.3", .h = "-1"}));
    FieldPair f = initial_fields(Grid{2.0 * pi, 64, 1e-3, 1.0}, InitSpec{.k = 2.0, .eps1 = 0.2, .eps2 = 0.1});
    const double N0 = st.mass(f);
    for (int i = 0; i < 2000; ++i) {
      st.step(f, 1e-3);
    }
    CHECK(st.mass(f) / N0 == doctest::Approx(std::exp(-2.0 * 0.3 * 2.0)).epsilon(1e-12));
  }

  TEST_CASE("unperturbed CW keeps its modulus") {
    Stepper st(16.0 * pi, 256, coeffs({.a = "1", .h = "-1"}));
    FieldPair f = initial_fields(Grid{16.0 * pi, 256, 1e-3, 1.0}, InitSpec{.eps1 = 0.0, .eps2 = 0.0});
    for (int i = 0; i < 1000; ++i) {
      st.step(f, 1e-3);
    }
    double dev = 0.0;
    for (std::size_t j = 0; j < f.psi.size(); ++j) {
      dev = std::max({dev, std::abs(std::abs(f.psi[j]) - 1.0), std::abs(std::abs(f.phi[j]) - 1.0)});
    }
    CHECK(dev < 1e-8);
  }

  TEST_CASE("mass and momentum diagnostics") {
    FieldPair ones{std::vector<Complex>(32, 1.0), std::vector<Complex>(32, 1.0), 0.0};
    CHECK(diagnostics_mass(ones, 2.0 * pi) == doctest::Approx(4.0 * pi).epsilon(1e-14));
    CHECK(diagnostics_mass(blank(32), 2.0 * pi) == 0.0);
    CHECK(std::abs(diagnostics_momentum(ones, 2.0 * pi)) < 1e-14);

    Grid g{2.0 * pi, 32, 1.0, 1.0};
    const auto x = g.points();
    FieldPair real = blank(32);
    FieldPair wave = blank(32);
    for (std::size_t j = 0; j < 32; ++j) {
      real.psi[j] = std::exp(std::sin(x[j]));
      real.phi[j] = std::cos(2.0 * x[j]);
      wave.psi[j] = std::polar(1.0, 3.0 * x[j]);
    }
    CHECK(std::abs(diagnostics_momentum(real, 2.0 * pi)) < 1e-13);
    CHECK(diagnostics_momentum(wave, 2.0 * pi) == doctest::Approx(6.0 * pi).epsilon(1e-14));
  }

  TEST_CASE("momentum conserved where the balance law allows") {
    const double L = 16.0 * pi;
    const std::size_t n = 512;
    Grid g{L, n, 1e-3, 1.0};
    const auto x = g.points();
    SUBCASE("linear run with nonzero momentum") {
      Stepper st(L, n, coeffs({.a = "1 + 0.5*sin(t)", .g = "cos(t)"}));
      FieldPair f = blank(n);
      for (std::size_t j = 0; j < n; ++j) {
        f.psi[j] = std::polar(1.0 / std::cosh(x[j]), 0.5 * x[j]);
        f.phi[j] = std::polar(0.8 / std::cosh(x[j] - 1.0), -0.3 * x[j]);
      }
      const double L0 = st.momentum(f);
      CHECK(std::abs(L0) > 0.1);
      for (int i = 0; i < 1000; ++i) {
        st.step(f, 1e-3);
      }
      CHECK(std::abs(st.momentum(f) - L0) < 1e-10);
    }
    SUBCASE("equal-modulus plane waves with nonlinearity") {
      Stepper st(L, n, coeffs({.a = "1", .g = "0.5", .h = "-1"}));
      FieldPair f = initial_fields(g, InitSpec{.type = "plane_wave", .k = 0.75});
      const double L0 = st.momentum(f);
      CHECK(L0 == doctest::Approx(2.0 * 0.75 * L).epsilon(1e-12));
      for (int i = 0; i < 1000; ++i) {
        st.step(f, 1e-3);
      }
      CHECK(std::abs(st.momentum(f) - L0) < 1e-9);
    }
  }

  TEST_CASE("momentum obeys the nonlinear exchange term for asymmetric data") {
    // With b = d = 0: dL/dt = -h int (|psi|^2 - |phi|^2) S_x dx.
    const double L = 16.0 * pi;
    const std::size_t n = 512;
    const double h = -1.0;
    Stepper st(L, n, coeffs({.a = "1", .h = "-1"}));
    Grid g{L, n, 1e-4, 1.0};
    const auto x = g.points();
    FieldPair f = blank(n);
    for (std::size_t j = 0; j < n; ++j) {
      f.psi[j] = std::polar(1.0 / std::cosh(x[j]), 0.5 * x[j]);
      f.phi[j] = 0.8 / std::cosh(x[j] - 1.0);
    }
    Fft fft(n);
    const auto k = fft_wavenumbers(n, L);
    auto rate = [&](const FieldPair& s) {
      std::vector<Complex> S(n);
      for (std::size_t j = 0; j < n; ++j) {
        S[j] = std::norm(s.psi[j]) + std::norm(s.phi[j]);
      }
      fft.forward(S, S);
      for (std::size_t m = 0; m < n; ++m) {
        S[m] *= Complex(0.0, k[m]);
      }
      fft.inverse(S, S);
      double r = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        r += (std::norm(s.psi[j]) - std::norm(s.phi[j])) * S[j].real();
      }
      return -h * r * L / static_cast<double>(n);
    };
    const double L0 = st.momentum(f);
    double predicted = L0;
    double prev = rate(f);
    for (int i = 0; i < 5000; ++i) {
      st.step(f, 1e-4);
      const double cur = rate(f);
      predicted += 0.5 * (prev + cur) * 1e-4;
      prev = cur;
    }
    CHECK(std::abs(st.momentum(f) - L0) > 0.1);
    CHECK(std::abs(st.momentum(f) - predicted) < 1e-7);
  }

  TEST_CASE("mass law with loss, gain and the harmonic potential") {
    const double L = 16.0 * pi;
    const std::size_t n = 256;
    Grid g{L, n, 1e-3, 1.0};
    for (const char* d : {"t", "-t"}) {
      Stepper st(L, n, coeffs({.a = "1 + cos(t)", .d = d, .g = "cos(t)", .h = "-2 - 2*cos(t)"}));
      FieldPair f = initial_fields(g, InitSpec{.k = 4.0, .eps1 = 1e-2, .eps2 = 1e-4});
      const double N0 = st.mass(f);
      for (int i = 0; i < 1000; ++i) {
        st.step(f, 1e-3);
      }
      const double expect = std::exp((d[0] == '-' ? 1.0 : -1.0) * f.t * f.t);
      CHECK(st.mass(f) / N0 == doctest::Approx(expect).epsilon(1e-10));
    }
    Stepper st(L, n, coeffs(trap_set(-1e-2)));
    FieldPair f = initial_fields(g, InitSpec{.k = 3.0, .eps1 = 1e-4, .eps2 = 1e-4});
    const double N0 = st.mass(f);
    for (int i = 0; i < 500; ++i) {
      st.step(f, 1e-3);
    }
    // int_0^0.5 d = -1e-2 int_0^0.5 e^{2 - cos s} ds
    double integral = 0.0;
    const int m = 2000;
    for (int i = 0; i <= m; ++i) {
      const double s = 0.5 * i / m;
      integral += std::exp(2.0 - std::cos(s)) * (i == 0 || i == m ? 1.0 : (i % 2 ? 4.0 : 2.0));
    }
    integral *= -1e-2 * 0.5 / m / 3.0;
    CHECK(st.mass(f) / N0 == doctest::Approx(std::exp(-2.0 * integral)).epsilon(1e-8));
  }

  TEST_CASE("second-order convergence in dt") {
    const double L = 16.0 * pi;
    const std::size_t n = 256;
    Grid g{L, n, 1e-2, 0.5};
    auto solve = [&](double dt) {
      Stepper st(L, n, coeffs({.a = "1 + 0.5*sin(t)", .d = "0.1*cos(t)", .g = "t", .h = "-1"}));
      FieldPair f = initial_fields(g, InitSpec{.k = 1.0, .eps1 = 0.1, .eps2 = 0.05});
      const long steps = std::lround(0.5 / dt);
      for (long i = 0; i < steps; ++i) {
        st.step(f, dt);
      }
      return f;
    };
    const auto a = solve(1e-2);
    const auto b = solve(5e-3);
    const auto c = solve(2.5e-3);
    const double e1 = max_diff(a.psi, b.psi);
    const double e2 = max_diff(b.psi, c.psi);
    INFO("e1 = ", e1, ", e2 = ", e2);
    CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.1));
  }

  TEST_CASE("linear runs are reversible") {
    const double L = 16.0 * pi;
    const std::size_t n = 256;
    Stepper st(L, n, coeffs({.a = "exp(cos(t))", .b = "0.01*cos(t)", .g = "sin(t)"}));
    Grid g{L, n, 1e-3, 1.0};
    const auto x = g.points();
    FieldPair f = blank(n);
    for (std::size_t j = 0; j < n; ++j) {
      f.psi[j] = std::polar(std::exp(-x[j] * x[j]), x[j]);
      f.phi[j] = 1.0 / std::cosh(x[j] + 2.0);
    }
    const FieldPair start = f;
    for (int i = 0; i < 400; ++i) {
      st.step(f, 1e-3);
    }
    CHECK(max_diff(f.psi, start.psi) > 1e-2);
    for (int i = 0; i < 400; ++i) {
      st.step(f, -1e-3);
    }
    CHECK(std::abs(f.t) < 1e-12);
    CHECK(max_diff(f.psi, start.psi) < 1e-8);
    CHECK(max_diff(f.phi, start.phi) < 1e-8);
  }

  TEST_CASE("nonzero c and blow-up are reported") {
    Stepper bad(2.0 * pi, 32, coeffs({.a = "1", .c = "0.1"}));
    FieldPair f = initial_fields(Grid{2.0 * pi, 32, 1e-3, 1.0}, InitSpec{});
    CHECK_THROWS_AS(bad.step(f, 1e-3), AdmissibilityError);

    RunConfig cfg;
    cfg.grid = Grid{2.0 * pi, 32, 1e-2, 1.0};
    cfg.coeffs = {.a = "1", .d = "-100"};
    const auto r = run(cfg);
    CHECK(r.blew_up);
    CHECK(r.message.find("blow-up") != std::string::npos);
    CHECK(r.final_state.t < 0.2);
    for (const auto& v : r.final_state.psi) {
      CHECK(std::abs(v) <= kBlowUpBound);
    }
  }

  TEST_CASE("mode growth on the MI baseline") {
    // Coarser than the acceptance grid; rates are grid-insensitive here.
    RunConfig cfg;
    cfg.grid = Grid{16.0 * pi, 128, 1e-3, 7.0};
    cfg.coeffs = {.a = "1", .h = "-1"};
    cfg.output.sample_interval = 0.05;
    SUBCASE("unstable k = 1") {
      cfg.init = InitSpec{.k = 1.0};
      cfg.output.tracked_modes = {1.0, 0.5};
      const auto r = run(cfg);
      const auto fit = mode_growth(r.diagnostics, 1.0, FitOptions{.t_start = 1.5, .max_fraction = 1e-2});
      CHECK(fit.rate == doctest::Approx(std::sqrt(3.0)).epsilon(0.1));
      CHECK(fit.warning.empty());
      // The unseeded mode stays near roundoff while k = 1 is still linear.
      for (const auto& s : r.diagnostics.samples) {
        if (s.t < 4.0) {
          CHECK(s.modes[1] < 1e-9 * s.background);
        }
      }
      CHECK_THROWS_AS(mode_growth(r.diagnostics, 2.0), DomainError);
      CHECK_THROWS_AS(mode_growth(r.diagnostics, 1.0, FitOptions{.t_start = 6.9}), ConvergenceError);
    }
    SUBCASE("stable k = 3") {
      cfg.grid.t_end = 4.0;
      cfg.init = InitSpec{.k = 3.0};
      cfg.output.tracked_modes = {3.0};
      const auto r = run(cfg);
      const auto fit = mode_growth(r.diagnostics, 3.0, FitOptions{.residual_threshold = 1.0});
      CHECK(std::abs(fit.rate) < 0.05);
    }
  }

  TEST_CASE("preset runs: loss damps, gain builds a soliton train") {
    RunConfig cfg;
    cfg.grid = Grid{16.0 * pi, 1024, 1e-4, 1.4};
    cfg.init = InitSpec{.k = 4.0, .eps1 = 1e-2, .eps2 = 1e-4};
    cfg.output.sample_interval = 0.7;
    auto peak = [](const FieldPair& f) {
      double m = 0.0;
      for (const auto& v : f.psi) {
        m = std::max(m, std::norm(v));
      }
      return m;
    };
    cfg.coeffs = {.a = "1 + cos(t)", .d = "t", .g = "cos(t)", .h = "-2 - 2*cos(t)"};
    CHECK(peak(run(cfg).final_state) < 2.0);
    cfg.coeffs.d = "-t";
    CHECK(peak(run(cfg).final_state) > 4.0 * std::exp(1.4 * 1.4));
  }

  TEST_CASE("theorem1 transform") {
    const double L = 8.0;
    const std::size_t n = 64;
    std::vector<double> x(n);
    std::vector<Complex> u(n);
    std::vector<Complex> v(n);
    for (std::size_t j = 0; j < n; ++j) {
      x[j] = -0.5 * L + L * static_cast<double>(j) / n;
      u[j] = 1.0 + 0.3 * std::polar(1.0, 2.0 * pi / L * 3.0 * x[j]);
      v[j] = std::cos(2.0 * pi / L * 2.0 * x[j]);
    }
    const auto flat = coeffs({.a = "1"});
    auto ident = riccati::solve_theorem1(flat, {}, riccati::uniform_grid(0.0, 1.0, 11));
    auto same = theorem1_transform(u, v, L, ident, 0.7, x);
    CHECK(max_diff(same.psi, u) < 1e-12);
    CHECK(max_diff(same.phi, v) < 1e-12);

    // Off-grid resampling of a band-limited field is exact.
    auto half = x;
    for (auto& s : half) {
      s += 0.5 * L / n;
    }
    auto shifted = theorem1_transform(u, v, L, ident, 0.7, half);
    for (std::size_t j = 0; j < n; ++j) {
      CHECK(std::abs(shifted.psi[j] - (1.0 + 0.3 * std::polar(1.0, 2.0 * pi / L * 3.0 * half[j]))) < 1e-12);
    }

    const auto trap = coeffs(trap_set(-1e-2));
    auto ric = riccati::solve_theorem1(trap, {}, riccati::uniform_grid(0.0, 1.2, 1201));
    auto at0 = theorem1_transform(u, v, L, ric, 0.0, x);
    CHECK(max_diff(at0.psi, u) < 1e-14);
    CHECK(max_diff(at0.phi, v) < 1e-14);

    riccati::RiccatiSolution bad = riccati::RiccatiSolution::closed_form(
        riccati::Variant::Theorem1, {}, 0.0, 1.0, [](double) { return 0.0; }, [](double) { return 1.0; },
        [](double t) { return t; }, [](double t) { return 1.0 - t; });
    CHECK_THROWS_AS(theorem1_transform(u, v, L, bad, 1.0, x), SingularityError);
  }

  TEST_CASE("transformed CW solves the harmonic system") {
    const auto trap = coeffs(trap_set(-1e-2));
    auto ric = riccati::solve_theorem1(trap, {}, riccati::uniform_grid(0.0, 1.2, 1201));
    auto cw = mi::cw_background(coeffs({.a = "1", .d = "-0.01", .g = "1", .h = "-8"}), 1.0, 1.0);
    std::vector<double> x;
    for (int i = 0; i <= 800; ++i) {
      x.push_back(-4.0 + 0.01 * i);
    }
    const double dt = 1e-5;
    for (double tc : {0.1, 0.5}) {
      exact::FieldGrid g;
      g.x = x;
      g.t = {tc - dt, tc, tc + dt};
      for (double t : g.t) {
        const double tau = ric.gamma(t);
        std::vector<Complex> u(16, cw.psi0(tau));
        std::vector<Complex> v(16, cw.phi0(tau));
        auto f = theorem1_transform(u, v, 8.0, ric, t, x);
        g.psi.insert(g.psi.end(), f.psi.begin(), f.psi.end());
        g.phi.insert(g.phi.end(), f.phi.begin(), f.phi.end());
      }
      CHECK(exact::residual_oracle(g, trap).max() < 1e-5);
    }
  }

  TEST_CASE("config parsing") {
    std::istringstream good(R"([grid]
L = 50.26548245743669
n = 256
dt = 1e-3
t_end = 0.5

[coeffs]
a = 1 + cos(t)
d = t
g = cos(t)
h = -2 - 2*cos(t)

[init]
type = cw
k = 4.1
eps1 = 1e-2
eps2 = 1e-4

[output]
snapshot_times = 0, 0.25, 0.5
sample_interval = 0.05
tracked_modes = 4, 2
)");
    const auto cfg = parse_config(good);
    CHECK(cfg.grid.n == 256);
    CHECK(cfg.coeffs.h == "-2 - 2*cos(t)");
    CHECK(cfg.output.snapshot_times.size() == 3);
    CHECK(cfg.output.tracked_modes[1] == 2.0);

    std::istringstream unknown("[grid]\nN = 3\n");
    CHECK_THROWS_AS(parse_config(unknown), ConfigError);
    std::istringstream section("[grids]\nn = 3\n");
    CHECK_THROWS_AS(parse_config(section), ConfigError);
    std::istringstream npow("[grid]\nn = 1000\n");
    CHECK_THROWS_AS(parse_config(npow), ConfigError);
    std::istringstream number("[grid]\ndt = fast\n");
    CHECK_THROWS_AS(parse_config(number), ConfigError);
    std::istringstream expr("[coeffs]\na = 1 +\n");
    CHECK_THROWS_AS(parse_config(expr), ParseError);
    std::istringstream late("[output]\nsnapshot_times = 5\n");
    CHECK_THROWS_AS(parse_config(late), ConfigError);
    CHECK_THROWS_AS(load_config("/nonexistent/run.ini"), ConfigError);
  }

  TEST_CASE("run outputs") {
    RunConfig cfg;
    cfg.grid = Grid{16.0 * pi, 64, 1e-3, 0.1};
    cfg.coeffs = {.a = "1", .h = "-1"};
    cfg.init = InitSpec{.k = 1.03, .eps1 = 1e-3, .eps2 = 1e-3};
    cfg.output = OutputSpec{{0.0, 0.05, 0.1}, 0.02, {1.0}};
    const auto r = run(cfg);
    CHECK(r.k_snapped == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(r.snapshots.size() == 3);
    CHECK(r.diagnostics.samples.size() == 6);
    CHECK(r.final_state.t == doctest::Approx(0.1).epsilon(1e-15));

    const auto dir = std::filesystem::temp_directory_path() / "cnls_pdesim_outputs";
    std::filesystem::remove_all(dir);
    write_outputs(r, dir);
    CHECK(std::filesystem::exists(dir / "snapshot_2.csv"));
    std::ifstream diag(dir / "diagnostics.csv");
    std::string header;
    std::getline(diag, header);
    CHECK(header.rfind("t,N,L,background,mode_", 0) == 0);
    std::ifstream mf(dir / "manifest.json");
    const auto j = nlohmann::json::parse(mf);
    CHECK(j["schema_version"] == 1);
    CHECK(j["config"]["grid"]["n"] == 64);
    CHECK(j["k_snapped"].get<double>() == doctest::Approx(1.0));
    std::filesystem::remove_all(dir);
  }
}
