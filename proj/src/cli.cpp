#include "cnls/cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>
#include <vector>

#include "CLI11.hpp"
#include "cnls/coeffexpr.hpp"
#include "cnls/elliptic.hpp"
#include "cnls/errors.hpp"
#include "cnls/exact.hpp"
#include "cnls/mi.hpp"
#include "cnls/pdesim.hpp"
#include "cnls/phaseplane.hpp"
#include "cnls/riccati.hpp"
#include "json.hpp"

namespace cnls::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// "a:b:step" (inclusive), "a,b,c" or a single value.
std::vector<double> parse_range(const std::string& name, const std::string& text) {
  auto number = [&](const std::string& s) {
    try {
      std::size_t used = 0;
      const double v = std::stod(s, &used);
      if (used != s.size() || !std::isfinite(v)) {
        throw std::invalid_argument(s);
      }
      return v;
    } catch (const std::exception&) {
      throw DomainError("--" + name + ": bad number '" + s + "'");
    }
  };
  std::vector<std::string> parts;
  const char sep = text.find(':') != std::string::npos ? ':' : ',';
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, sep)) {
    item.erase(0, item.find_first_not_of(' '));
    item.erase(item.find_last_not_of(' ') + 1);
    parts.push_back(item);
  }
  std::vector<double> out;
  if (sep == ':') {
    if (parts.size() != 3) {
      throw DomainError("--" + name + ": expected start:stop:step");
    }
    const double a = number(parts[0]);
    const double b = number(parts[1]);
    const double h = number(parts[2]);
    if (!(h > 0.0) || b < a) {
      throw DomainError("--" + name + ": need start <= stop and step > 0");
    }
    const auto n = static_cast<std::size_t>(std::floor((b - a) / h + 1e-9)) + 1;
    if (n > 10'000'000) {
      throw DomainError("--" + name + ": range has too many points");
    }
    for (std::size_t i = 0; i < n; ++i) {
      out.push_back(a + static_cast<double>(i) * h);
    }
  } else {
    for (const auto& p : parts) {
      if (!p.empty()) {
        out.push_back(number(p));
      }
    }
  }
  if (out.empty()) {
    throw DomainError("--" + name + ": empty range");
  }
  return out;
}

std::ofstream open_csv(const fs::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw ConfigError("cannot write " + path.string());
  }
  out << std::setprecision(17);
  return out;
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) {
    throw ConfigError("cannot write " + path.string());
  }
  out << j.dump(2) << '\n';
}

struct Context {
  std::string out_dir;
  std::ostream& out;
  std::ostream& err;
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

  fs::path dir() const {
    fs::create_directories(out_dir);
    return fs::path(out_dir);
  }

  void manifest(const std::string& subcommand, const json& config, const std::vector<std::string>& outputs,
                json extra = json::object()) const {
    json m = {{"schema_version", 1},
              {"subcommand", subcommand},
              {"config", config},
              {"seeds", json::array()},
              {"outputs", outputs},
              {"wall_seconds", std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count()}};
    for (auto& [k, v] : extra.items()) {
      m[k] = v;
    }
    write_json(dir() / "manifest.json", m);
  }
};

json sources_json(const CoefficientSources& s) {
  return {{"a", s.a}, {"b", s.b}, {"c", s.c}, {"d", s.d}, {"g", s.g}, {"h", s.h}};
}

void add_coefficient_options(CLI::App* app, CoefficientSources& src) {
  app->add_option("--a", src.a, "dispersion a(t)");
  app->add_option("--b", src.b, "trap b(t)");
  app->add_option("--c", src.c, "c(t)");
  app->add_option("--d", src.d, "gain/loss d(t)");
  app->add_option("--g", src.g, "linear g(t)");
  app->add_option("--h", src.h, "nonlinearity h(t)");
}

// ---- phase-portrait -------------------------------------------------------

struct PortraitArgs {
  double g0 = 0.0;
  double h0 = 0.0;
  double window = 3.0;
  std::size_t grid = 41;
};

int run_phase_portrait(const PortraitArgs& a, Context& ctx) {
  phaseplane::PlanarParams p{a.g0, a.h0, std::nullopt};
  p.validate();
  if (!(a.window > 0.0) || a.grid < 2) {
    throw DomainError("--window must be positive and --grid at least 2");
  }
  json fps = json::array();
  for (const auto& fp : phaseplane::fixed_points(p)) {
    fps.push_back({{"location", {fp.G, fp.P}},
                   {"G", fp.G},
                   {"P", fp.P},
                   {"kind", phaseplane::kind_name(fp.kind)},
                   {"jacobian_determinant", phaseplane::jacobian_determinant(p, fp.G)},
                   {"H", phaseplane::hamiltonian(p, fp.G, fp.P)}});
  }
  const json summary = {{"schema_version", 1}, {"g0", a.g0}, {"h0", a.h0}, {"fixed_points", fps}};
  const auto dir = ctx.dir();
  write_json(dir / "fixed_points.json", summary);
  auto csv = open_csv(dir / "vector_field.csv");
  csv << "G,P,dG,dP,H\n";
  for (std::size_t i = 0; i < a.grid; ++i) {
    const double G = -a.window + 2.0 * a.window * static_cast<double>(i) / static_cast<double>(a.grid - 1);
    for (std::size_t j = 0; j < a.grid; ++j) {
      const double P = -a.window + 2.0 * a.window * static_cast<double>(j) / static_cast<double>(a.grid - 1);
      csv << G << ',' << P << ',' << P << ',' << a.g0 * G + 2.0 * a.h0 * G * G * G << ','
          << phaseplane::hamiltonian(p, G, P) << '\n';
    }
  }
  ctx.manifest("phase-portrait", {{"g0", a.g0}, {"h0", a.h0}, {"window", a.window}, {"grid", a.grid}},
               {"fixed_points.json", "vector_field.csv"});
  ctx.out << summary.dump(2) << '\n';
  return kExitOk;
}

// ---- orbit ----------------------------------------------------------------

struct OrbitArgs {
  double g0 = 0.0;
  double h0 = 0.0;
  double epsilon = 0.0;
  double K = 0.0;
  double G0 = 0.03;
  double P0 = 0.02;
  double G0b = 0.02;
  double P0b = 0.01;
  double length = 200.0;
  double step = 1e-3;
  std::size_t stride = 10;
  phaseplane::ChaosThresholds thresholds;
};

int run_orbit(const OrbitArgs& a, Context& ctx) {
  phaseplane::PlanarParams p{a.g0, a.h0, std::nullopt};
  if (a.epsilon != 0.0) {
    p.forcing = phaseplane::Forcing{a.epsilon, a.K};
  }
  p.validate();
  if (a.stride == 0) {
    throw DomainError("--stride must be positive");
  }
  const auto o1 = phaseplane::integrate_orbit(p, {a.G0, a.P0}, a.length, a.step);
  const auto o2 = phaseplane::integrate_orbit(p, {a.G0b, a.P0b}, a.length, a.step);
  const auto flags = phaseplane::chaos_indicators(p, {a.G0, a.P0}, {a.G0b, a.P0b}, a.length, a.step, a.thresholds);
  const auto bins = phaseplane::spectrum(o1);
  const auto dir = ctx.dir();
  {
    auto csv = open_csv(dir / "orbit.csv");
    csv << "xi,G,P,H,G2,P2,separation\n";
    for (std::size_t i = 0; i < o1.size(); i += a.stride) {
      const double sep = std::hypot(o1.G[i] - o2.G[i], o1.P[i] - o2.P[i]);
      csv << o1.xi[i] << ',' << o1.G[i] << ',' << o1.P[i] << ',' << phaseplane::hamiltonian(p, o1.G[i], o1.P[i])
          << ',' << o2.G[i] << ',' << o2.P[i] << ',' << sep << '\n';
    }
  }
  {
    auto csv = open_csv(dir / "spectrum.csv");
    csv << "freq,mag\n";
    for (const auto& b : bins) {
      csv << b.frequency << ',' << b.magnitude << '\n';
    }
  }
  const json summary = {{"relative_energy_drift", o1.relative_energy_drift()},
                        {"amplification", flags.amplification},
                        {"top5_concentration", flags.concentration},
                        {"chaotic", flags.chaotic}};
  write_json(dir / "summary.json", summary);
  ctx.manifest("orbit",
               {{"g0", a.g0},
                {"h0", a.h0},
                {"epsilon", a.epsilon},
                {"K", a.K},
                {"init", {a.G0, a.P0}},
                {"init2", {a.G0b, a.P0b}},
                {"length", a.length},
                {"step", a.step},
                {"stride", a.stride},
                {"amplification_threshold", a.thresholds.amplification},
                {"concentration_threshold", a.thresholds.concentration}},
               {"orbit.csv", "spectrum.csv", "summary.json"});
  ctx.out << summary.dump(2) << '\n';
  return kExitOk;
}

// ---- exact ----------------------------------------------------------------

struct ExactArgs {
  std::string kind;
  double g0 = 1.0;
  double h0 = -1.0;
  std::optional<double> H0;
  double xi0 = 0.0;
  int sign = 1;
  CoefficientSources abc{.a = "1"};
  double alpha0 = 0.0;
  double beta0 = 1.0;
  double gamma0 = 0.0;
  std::string x = "-10:10:0.05";
  std::string t = "0:1:0.05";
  bool certify = false;
  double dx = 1e-2;
  double dt = 1e-3;
};

int run_exact(const ExactArgs& a, Context& ctx) {
  exact::FamilySpec spec{exact::kind_from_name(a.kind), a.g0, a.h0, a.H0, a.xi0, a.sign};
  const auto set = CoefficientSet::parse({.a = a.abc.a, .b = a.abc.b, .c = a.abc.c});
  const auto xs = parse_range("x", a.x);
  const auto ts = parse_range("t", a.t);
  if (ts.front() < 0.0) {
    throw DomainError("--t must start at or after 0");
  }
  const riccati::InitialData init{.alpha0 = a.alpha0, .beta0 = a.beta0, .gamma0 = a.gamma0};
  const auto fam = exact::build_family(spec, set.functions(), init, std::max(ts.back(), 1e-6));
  const auto dir = ctx.dir();
  {
    auto csv = open_csv(dir / "fields.csv");
    csv << "x,t,abs2_psi,re_psi,im_psi,re_phi,im_phi\n";
    for (double t : ts) {
      for (double x : xs) {
        const auto f = fam(x, t);
        csv << x << ',' << t << ',' << std::norm(f.psi) << ',' << f.psi.real() << ',' << f.psi.imag() << ','
            << f.phi.real() << ',' << f.phi.imag() << '\n';
      }
    }
  }
  {
    auto csv = open_csv(dir / "coefficients.csv");
    csv << "t,a,b,c,d,g,h,alpha,beta,gamma\n";
    const auto& c = fam.coefficients();
    const auto& r = fam.riccati();
    for (double t : ts) {
      csv << t << ',' << c.a(t) << ',' << c.b(t) << ',' << c.c(t) << ',' << c.d(t) << ',' << c.g(t) << ','
          << c.h(t) << ',' << r.alpha(t) << ',' << r.beta(t) << ',' << r.gamma(t) << '\n';
    }
  }
  const auto& lv = fam.level();
  json level = {{"kind", exact::kind_name(spec.kind)},
                {"regime", exact::regime_name(lv.regime)},
                {"g0", lv.g0},
                {"h0", lv.h0},
                {"H0", lv.H0},
                {"xi0", spec.xi0},
                {"sign", spec.sign},
                {"riccati_init", {{"alpha0", a.alpha0}, {"beta0", a.beta0}, {"gamma0", a.gamma0}}},
                {"amplitude", fam.envelope().amplitude()},
                {"rate", fam.envelope().rate()},
                {"modulus", fam.envelope().modulus()}};
  for (const auto& [name, v] : {std::pair{"G1sq", lv.G1sq}, {"G2sq", lv.G2sq}, {"G3sq", lv.G3sq}}) {
    level[name] = v ? json(*v) : json(nullptr);
  }
  std::vector<std::string> outputs{"fields.csv", "coefficients.csv", "level.json"};
  int code = kExitOk;
  if (a.certify) {
    const exact::Window w{xs.front(), xs.back(), ts.front(), ts.back()};
    const auto cert = exact::certify(fam, w, a.dx, a.dt);
    level["certificate"] = {{"fine", cert.fine.max()},
                            {"coarse", cert.coarse.max()},
                            {"ratio", cert.ratio},
                            {"converging", cert.converging},
                            {"warning", cert.warning}};
    if (!cert.warning.empty()) {
      ctx.err << "warning: " << cert.warning << '\n';
    }
  }
  write_json(dir / "level.json", level);
  ctx.manifest("exact",
               {{"kind", a.kind},
                {"g0", a.g0},
                {"h0", a.h0},
                {"H0", a.H0 ? json(*a.H0) : json(nullptr)},
                {"xi0", a.xi0},
                {"sign", a.sign},
                {"coeffs", sources_json(a.abc)},
                {"alpha0", a.alpha0},
                {"beta0", a.beta0},
                {"gamma0", a.gamma0},
                {"x", a.x},
                {"t", a.t},
                {"certify", a.certify},
                {"dx", a.dx},
                {"dt", a.dt}},
               outputs);
  ctx.out << level.dump(2) << '\n';
  return code;
}

// ---- riccati --------------------------------------------------------------

struct RiccatiArgs {
  CoefficientSources src{.a = "1"};
  std::string variant = "theorem1";
  std::string method;
  double alpha0 = 0.0;
  double beta0 = 1.0;
  double gamma0 = 0.0;
  double mu0 = 1.0;
  std::string t = "0:3:0.01";
};

int run_riccati(const RiccatiArgs& a, Context& ctx) {
  const auto set = CoefficientSet::parse(a.src);
  const auto f = set.functions();
  const auto ts = parse_range("t", a.t);
  if (ts.front() != 0.0 || ts.size() < 2) {
    throw DomainError("--t must start at 0 and have at least two points");
  }
  const riccati::InitialData init{a.alpha0, a.beta0, a.gamma0, a.mu0};
  std::string method = a.method;
  std::optional<riccati::RiccatiSolution> sol;
  if (a.variant == "section2") {
    method = method.empty() ? "closed" : method;
    if (method == "closed") {
      sol = riccati::solve_section2(f, init, ts);
    } else if (method == "numeric") {
      sol = riccati::solve_section2_numeric(f, init, ts);
    } else {
      throw DomainError("--method for section2 must be closed or numeric");
    }
  } else if (a.variant == "theorem1") {
    method = method.empty() ? "numeric" : method;
    if (method == "numeric") {
      sol = riccati::solve_theorem1(f, init, ts);
    } else if (method == "appendix") {
      const auto pair = riccati::characteristic_solutions(f, ts);
      sol = riccati::solve_appendix_multiparameter(f, pair, init);
    } else {
      throw DomainError("--method for theorem1 must be numeric or appendix");
    }
  } else {
    throw DomainError("--variant must be section2 or theorem1");
  }
  const bool th1 = a.variant == "theorem1";
  const auto dir = ctx.dir();
  {
    auto csv = open_csv(dir / "riccati.csv");
    csv << "t,alpha,beta,gamma,mu,residual_max" << (th1 ? ",d0,g0,h0" : "") << '\n';
    for (double t : ts) {
      const double al = sol->alpha(t);
      const double be = sol->beta(t);
      const double mu = sol->mu(t);
      const double one[] = {t};
      csv << t << ',' << al << ',' << be << ',' << sol->gamma(t) << ',' << mu << ','
          << riccati::residuals(*sol, f, one).max();
      if (th1) {
        const double ab2 = f.a(t) * be * be;
        csv << ',' << f.d(t) / ab2 << ',' << f.g(t) / ab2 << ',' << f.h(t) / (ab2 * mu);
      }
      csv << '\n';
    }
  }
  const auto res = riccati::residuals(*sol, f, ts);
  const json summary = {{"variant", a.variant},
                        {"method", method},
                        {"residuals",
                         {{"alpha", res.alpha}, {"beta", res.beta}, {"gamma", res.gamma}, {"mu", res.mu}}}};
  write_json(dir / "summary.json", summary);
  ctx.manifest("riccati",
               {{"coeffs", sources_json(a.src)},
                {"variant", a.variant},
                {"method", method},
                {"init", {{"alpha0", a.alpha0}, {"beta0", a.beta0}, {"gamma0", a.gamma0}, {"mu0", a.mu0}}},
                {"t", a.t}},
               {"riccati.csv", "summary.json"});
  ctx.out << summary.dump(2) << '\n';
  return kExitOk;
}

// ---- mi-gain --------------------------------------------------------------

struct GainArgs {
  std::string preset;
  CoefficientSources src{.a = "1", .h = "-1"};
  double A0 = 1.0;
  double B0 = 1.0;
  double theta1 = 0.0;
  double theta2 = 0.0;
  std::string k = "-6:6:0.05";
  std::string t = "0:3:0.05";
};

int run_mi_gain(const GainArgs& a, Context& ctx) {
  const auto ks = parse_range("k", a.k);
  const auto ts = parse_range("t", a.t);
  const double t_cache = std::max(10.0, ts.back());
  std::optional<mi::CWBackground> cw;
  CoefficientSources used = a.src;
  if (!a.preset.empty()) {
    auto p = mi::gain_preset(a.preset);
    used = p.coeffs.sources();
    cw.emplace(std::move(p.cw));
  } else {
    cw.emplace(mi::cw_background(CoefficientSet::parse(a.src).functions(), a.A0, a.B0, a.theta1, a.theta2,
                                 t_cache));
  }
  const auto dir = ctx.dir();
  json per_t = json::array();
  {
    auto csv = open_csv(dir / "gain.csv");
    csv << "k,t,gain\n";
    for (double t : ts) {
      for (double k : ks) {
        csv << k << ',' << t << ',' << mi::gain(*cw, k, t) << '\n';
      }
      const auto peak = mi::gain_peak(*cw, t);
      per_t.push_back({{"t", t},
                       {"instability_bound", mi::instability_region(*cw, t)},
                       {"k_max", peak.k_max},
                       {"gain_max", peak.gain_max}});
    }
  }
  write_json(dir / "gain_meta.json", {{"schema_version", 1}, {"samples", per_t}});
  ctx.manifest("mi-gain",
               {{"preset", a.preset},
                {"coeffs", sources_json(used)},
                {"A0", cw->A0()},
                {"B0", cw->B0()},
                {"theta1", cw->theta1_0()},
                {"theta2", cw->theta2_0()},
                {"k", a.k},
                {"t", a.t}},
               {"gain.csv", "gain_meta.json"});
  ctx.out << "wrote " << ks.size() * ts.size() << " gain samples to " << (dir / "gain.csv").string() << '\n';
  return kExitOk;
}

// ---- simulate -------------------------------------------------------------

struct SimulateArgs {
  std::string config;
  std::optional<double> L, dt, t_end, k, eps1, eps2, sample_interval;
  std::optional<std::size_t> n;
  std::optional<std::string> a, b, c, d, g, h, init_type, snapshots, track;
};

int run_simulate(const SimulateArgs& s, Context& ctx) {
  pdesim::RunConfig cfg = s.config.empty() ? pdesim::RunConfig{} : pdesim::load_config(s.config);
  if (s.L) cfg.grid.L = *s.L;
  if (s.n) cfg.grid.n = *s.n;
  if (s.dt) cfg.grid.dt = *s.dt;
  if (s.t_end) cfg.grid.t_end = *s.t_end;
  if (s.a) cfg.coeffs.a = *s.a;
  if (s.b) cfg.coeffs.b = *s.b;
  if (s.c) cfg.coeffs.c = *s.c;
  if (s.d) cfg.coeffs.d = *s.d;
  if (s.g) cfg.coeffs.g = *s.g;
  if (s.h) cfg.coeffs.h = *s.h;
  if (s.init_type) cfg.init.type = *s.init_type;
  if (s.k) cfg.init.k = *s.k;
  if (s.eps1) cfg.init.eps1 = *s.eps1;
  if (s.eps2) cfg.init.eps2 = *s.eps2;
  if (s.sample_interval) cfg.output.sample_interval = *s.sample_interval;
  if (s.snapshots) cfg.output.snapshot_times = parse_range("snapshots", *s.snapshots);
  if (s.track) cfg.output.tracked_modes = parse_range("track", *s.track);
  cfg.validate();
  const auto result = pdesim::run(cfg);
  pdesim::write_outputs(result, ctx.dir());
  ctx.out << "k snapped to " << result.k_snapped << "; final t = " << result.final_state.t << "; "
          << result.snapshots.size() << " snapshot(s), " << result.diagnostics.samples.size()
          << " diagnostic samples\n";
  if (result.blew_up) {
    ctx.err << "error: " << result.message << '\n';
    return kExitNumerical;
  }
  return kExitOk;
}

// ---- verify ---------------------------------------------------------------

struct Check {
  std::string name;
  std::function<std::pair<bool, std::string>()> run;
};

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(3) << v;
  return os.str();
}

std::vector<Check> invariant_suite() {
  std::vector<Check> checks;
  checks.push_back({"elliptic identities", [] {
                      double worst = 0.0;
                      for (int j = 0; j <= 99; ++j) {
                        const elliptic::Modulus l(0.01 * j);
                        for (int i = 0; i <= 200; ++i) {
                          const auto s = elliptic::jacobi(-10.0 + 0.1 * i, l);
                          worst = std::max({worst, std::abs(s.sn * s.sn + s.cn * s.cn - 1.0),
                                            std::abs(s.dn * s.dn + l.value() * l.value() * s.sn * s.sn - 1.0)});
                        }
                      }
                      return std::pair{worst < 1e-10, "max identity error " + fmt(worst)};
                    }});
  checks.push_back({"fixed-point taxonomy", [] {
                      const phaseplane::PlanarParams p{2.0, -0.5, std::nullopt};
                      const auto fps = phaseplane::fixed_points(p);
                      bool ok = fps.size() == 3;
                      for (const auto& fp : fps) {
                        const bool origin = std::abs(fp.G) < 1e-12;
                        ok = ok && (origin ? fp.kind == phaseplane::FixedPointKind::Saddle
                                           : fp.kind == phaseplane::FixedPointKind::Center &&
                                                 std::abs(std::abs(fp.G) - std::sqrt(2.0)) < 1e-12);
                      }
                      return std::pair{ok, "(2, -0.5): saddle at 0, centers at +-sqrt(2)"};
                    }});
  checks.push_back({"riccati closed forms", [] {
                      const auto f = CoefficientSet::parse({.a = "exp(cos(t))", .b = "0.25*exp(-cos(t))*cos(t)"})
                                         .functions();
                      const auto sol = riccati::solve_theorem1(f, {}, riccati::uniform_grid(0.0, 3.0, 30));
                      double worst = 0.0;
                      for (double t = 0.0; t <= 3.0; t += 0.25) {
                        worst = std::max({worst, std::abs(sol.alpha(t) + 0.25 * std::exp(-std::cos(t)) * std::sin(t)),
                                          std::abs(sol.beta(t) - std::exp(1.0 - std::cos(t))),
                                          std::abs(sol.mu(t) - std::exp(std::cos(t) - 1.0))});
                      }
                      return std::pair{worst < 1e-8, "max deviation " + fmt(worst)};
                    }});
  checks.push_back({"exact bright family residual", [] {
                      const auto abc = CoefficientSet::parse({.a = "1 + 0.1*sin(t)", .b = "0.02", .c = "0.02"});
                      const auto fam = exact::build_family({exact::Kind::Bright, 1.0, -1.0, std::nullopt, 0.0, 1},
                                                           abc.functions(), {.beta0 = 0.5}, 1.0);
                      const auto cert = exact::certify(fam, {-4.0, 4.0, 0.2, 0.4}, 1e-2, 1e-3);
                      return std::pair{cert.fine.max() < 1e-6, "residual " + fmt(cert.fine.max())};
                    }});
  checks.push_back({"hamiltonian conservation", [] {
                      const auto o = phaseplane::integrate_orbit({2.0, -0.5, std::nullopt}, {0.03, 0.02}, 50.0, 1e-3);
                      const double drift = o.relative_energy_drift();
                      return std::pair{drift < 1e-8, "relative drift " + fmt(drift)};
                    }});
  checks.push_back({"mi gain closed forms", [] {
                      double worst = 0.0;
                      for (const char* name : {"1+", "1-", "2", "3"}) {
                        const auto p = mi::gain_preset(name);
                        for (int i = 0; i < 50; ++i) {
                          for (int j = 0; j < 50; ++j) {
                            const double k = -6.0 + 12.0 * i / 49.0;
                            const double t = 3.0 * j / 49.0;
                            const double ref = p.closed_form(k, t);
                            worst = std::max(worst, std::abs(mi::gain(p.cw, k, t) - ref) / std::max(1.0, ref));
                          }
                        }
                      }
                      return std::pair{worst < 1e-12, "max relative error " + fmt(worst)};
                    }});
  checks.push_back({"mi dispersion roots", [] {
                      const auto p = mi::gain_preset("3");
                      double worst = 0.0;
                      for (int i = 0; i < 100; ++i) {
                        const double k = -5.0 + 0.1 * i;
                        const double t = 0.03 * i;
                        for (auto br : {mi::Branch::Plus, mi::Branch::Minus}) {
                          const auto w = mi::dispersion_relation(p.cw, k, t, br);
                          worst = std::max(worst, std::abs(mi::determinant_oracle(p.cw, k, t, w)) /
                                                      std::pow(mi::matrix_scale(p.cw, k, t, w), 4));
                        }
                      }
                      return std::pair{worst < 1e-8, "max relative |det M| " + fmt(worst)};
                    }});
  checks.push_back({"simulation mass law", [] {
                      pdesim::Stepper st(16.0 * std::numbers::pi, 256,
                                         CoefficientSet::parse({.a = "1 + cos(t)", .d = "t", .g = "cos(t)",
                                                                .h = "-2 - 2*cos(t)"})
                                             .functions());
                      auto f = pdesim::initial_fields({16.0 * std::numbers::pi, 256, 1e-3, 1.0},
                                                      {.k = 4.0, .eps1 = 1e-2, .eps2 = 1e-4});
                      const double N0 = st.mass(f);
                      for (int i = 0; i < 1000; ++i) {
                        st.step(f, 1e-3);
                      }
                      const double err = std::abs(st.mass(f) / N0 / std::exp(-1.0) - 1.0);
                      return std::pair{err < 1e-6, "relative error " + fmt(err)};
                    }});
  return checks;
}

int run_verify(Context& ctx) {
  bool all = true;
  json rows = json::array();
  for (const auto& c : invariant_suite()) {
    bool ok = false;
    std::string detail;
    try {
      std::tie(ok, detail) = c.run();
    } catch (const std::exception& e) {
      detail = std::string("threw: ") + e.what();
    }
    all = all && ok;
    ctx.out << (ok ? "PASS  " : "FAIL  ") << std::left << std::setw(32) << c.name << detail << '\n';
    rows.push_back({{"name", c.name}, {"pass", ok}, {"detail", detail}});
  }
  write_json(ctx.dir() / "verify.json", {{"schema_version", 1}, {"checks", rows}, {"all_pass", all}});
  ctx.manifest("verify", json::object(), {"verify.json"});
  return all ? kExitOk : kExitNumerical;
}

}  // namespace

std::string figure_recipes() {
  const std::string trap_a = "--a 'exp(cos(t))' --b '0.25*exp(-cos(t))*cos(t)' --g 'exp(2 - cos(t))' --h '-8*exp(1)'";
  const std::string fig3 = "--a '0.5*exp(t)' --b 'exp(t)' --c 1 --alpha0 -1 --beta0 1 --gamma0 -0.5 --x -10:10:0.05 "
                           "--t 0:0.3:0.01";
  const std::string p1 = "--a '1 + cos(t)' --g 'cos(t)' --h '-2 - 2*cos(t)' --k 4 --eps1 1e-2 --eps2 1e-4 --t-end 1.4 "
                         "--snapshots 1.4";
  const std::string p3 = "--a '1 + t' --d '-t' --g 'cos(t)' --h '-4*(1 + t)*exp(-t^2)' --eps1 1e-3 --eps2 1e-4";
  std::ostringstream os;
  os << "# Figure 1: phase portraits\n"
     << "cnls phase-portrait --g0 1 --h0 0.5 --window 3 --out fig1a\n"
     << "cnls phase-portrait --g0 -1 --h0 -0.5 --window 3 --out fig1b\n"
     << "# Figure 2: phase portraits\n"
     << "cnls phase-portrait --g0 2 --h0 -0.5 --window 3 --out fig2a\n"
     << "cnls phase-portrait --g0 -2 --h0 0.5 --window 3 --out fig2b\n"
     << "# Figure 3: closed-form families (d, g, h derived from a, b, c and the Riccati solution)\n"
     << "cnls exact --kind dnoidal --g0 1 --h0 -1 --H0 -0.1 " << fig3 << " --out fig3a\n"
     << "cnls exact --kind bright --g0 1 --h0 -1 " << fig3 << " --out fig3b\n"
     << "cnls exact --kind snoidal --g0 -1 --h0 1 --H0 0.1 " << fig3 << " --out fig3c\n"
     << "cnls exact --kind dark --g0 -1 --h0 1 " << fig3 << " --out fig3d\n"
     << "# Figure 4: unforced orbit, two nearby initial conditions, spectrum\n"
     << "cnls orbit --g0 2 --h0 -0.5 --G0 0.03 --P0 0.02 --length 200 --step 1e-3 --out fig4\n"
     << "# Figure 5: forced orbit\n"
     << "cnls orbit --g0 2 --h0 -0.5 --epsilon 0.8 --K 0.9 --G0 0.03 --P0 0.02 --length 200 --step 1e-3 --out fig5\n"
     << "# Figure 6: gain spectra\n"
     << "cnls mi-gain --preset 1+ --k -6:6:0.02 --t 0:3:0.02 --out fig6a\n"
     << "cnls mi-gain --preset 1- --k -40:40:0.1 --t 0:3:0.02 --out fig6b\n"
     << "cnls mi-gain --preset 2 --k -6:6:0.02 --t 0:3:0.02 --out fig6c\n"
     << "cnls mi-gain --preset 3 --k -6:6:0.02 --t 0:3:0.02 --out fig6d\n"
     << "# Figure 7: preset-1 simulations, stable k = 4, t = 1.4\n"
     << "cnls simulate " << p1 << " --d t --out fig7a\n"
     << "cnls simulate " << p1 << " --d '-t' --out fig7b\n"
     << "# Figure 8: preset-3 simulations\n"
     << "cnls simulate " << p3 << " --k 6 --t-end 1.76 --snapshots 1.76 --out fig8a\n"
     << "cnls simulate " << p3 << " --k 3 --t-end 1.9 --snapshots 1.9 --out fig8b\n"
     << "# Figure 9: harmonic trap, energy supply d0 = -1e-2\n"
     << "cnls simulate " << trap_a
     << " --d '-0.01*exp(2 - cos(t))' --k 4 --eps1 1e-4 --eps2 1e-4 --t-end 0.25 --snapshots 0.25 --track 4 "
        "--out fig9a\n"
     << "cnls simulate " << trap_a
     << " --d '-0.01*exp(2 - cos(t))' --k 7 --eps1 1e-4 --eps2 1e-4 --t-end 0.3 --snapshots 0.3 --track 7 "
        "--out fig9b\n"
     << "# Figure 10: harmonic trap, dissipation d0 = 1e-2\n"
     << "cnls simulate " << trap_a
     << " --d '0.01*exp(2 - cos(t))' --k 3 --eps1 1e-4 --eps2 1e-4 --t-end 0.4 --snapshots 0,0.1,0.2,0.3,0.4 "
        "--track 3 --out fig10\n";
  return os.str();
}

int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Variable-coefficient coupled NLS toolkit"};
  app.set_help_flag("--help", "print this help and exit");
  app.require_subcommand(1);
  const char* env_out = std::getenv(kOutDirEnv);
  std::string out_dir = env_out && *env_out ? env_out : "out";

  auto with_out = [&](CLI::App* sub) {
    sub->add_option("--out", out_dir, std::string("output directory (default $") + kOutDirEnv + " or ./out)");
  };

  PortraitArgs portrait;
  auto* pp = app.add_subcommand("phase-portrait", "fixed points and vector field of the planar system");
  pp->add_option("--g0", portrait.g0)->required();
  pp->add_option("--h0", portrait.h0)->required();
  pp->add_option("--window", portrait.window, "half-width of the (G, P) box");
  pp->add_option("--grid", portrait.grid, "vector-field samples per axis");
  with_out(pp);

  OrbitArgs orbit;
  auto* ob = app.add_subcommand("orbit", "RK4 orbit, nearby-orbit separation and spectrum");
  ob->add_option("--g0", orbit.g0)->required();
  ob->add_option("--h0", orbit.h0)->required();
  ob->add_option("--epsilon", orbit.epsilon, "forcing amplitude");
  ob->add_option("--K", orbit.K, "forcing frequency");
  ob->add_option("--G0", orbit.G0);
  ob->add_option("--P0", orbit.P0);
  ob->add_option("--G0b", orbit.G0b, "second initial condition");
  ob->add_option("--P0b", orbit.P0b);
  ob->add_option("--length", orbit.length);
  ob->add_option("--step", orbit.step);
  ob->add_option("--stride", orbit.stride, "write every n-th sample");
  ob->add_option("--amplification-threshold", orbit.thresholds.amplification, "chaos flag: separation growth");
  ob->add_option("--concentration-threshold", orbit.thresholds.concentration, "chaos flag: top-5 spectral power");
  with_out(ob);

  ExactArgs ex;
  auto* exs = app.add_subcommand("exact", "sample a closed-form solution family");
  exs->add_option("--kind", ex.kind, "dnoidal, bright, plane_wave, cnoidal, snoidal or dark")->required();
  exs->add_option("--g0", ex.g0);
  exs->add_option("--h0", ex.h0);
  exs->add_option("--H0", ex.H0, "Hamiltonian level (dnoidal, cnoidal, snoidal)");
  exs->add_option("--xi0", ex.xi0);
  exs->add_option("--sign", ex.sign);
  exs->add_option("--a", ex.abc.a);
  exs->add_option("--b", ex.abc.b);
  exs->add_option("--c", ex.abc.c);
  exs->add_option("--alpha0", ex.alpha0);
  exs->add_option("--beta0", ex.beta0);
  exs->add_option("--gamma0", ex.gamma0);
  exs->add_option("--x", ex.x, "x range start:stop:step");
  exs->add_option("--t", ex.t, "t range start:stop:step");
  exs->add_flag("--certify", ex.certify, "report the PDE residual certificate over the x/t window");
  exs->add_option("--dx", ex.dx);
  exs->add_option("--dt", ex.dt);
  with_out(exs);

  RiccatiArgs ric;
  auto* rs = app.add_subcommand("riccati", "solve the Riccati system");
  add_coefficient_options(rs, ric.src);
  rs->add_option("--variant", ric.variant, "section2 or theorem1");
  rs->add_option("--method", ric.method, "closed|numeric (section2), numeric|appendix (theorem1)");
  rs->add_option("--alpha0", ric.alpha0);
  rs->add_option("--beta0", ric.beta0);
  rs->add_option("--gamma0", ric.gamma0);
  rs->add_option("--mu0", ric.mu0);
  rs->add_option("--t", ric.t, "t range 0:stop:step");
  with_out(rs);

  GainArgs gain;
  auto* gs = app.add_subcommand("mi-gain", "modulational-instability gain spectrum");
  gs->add_option("--preset", gain.preset, "1+, 1-, 2 or 3 (overrides coefficients)");
  add_coefficient_options(gs, gain.src);
  gs->add_option("--A0", gain.A0);
  gs->add_option("--B0", gain.B0);
  gs->add_option("--theta1", gain.theta1);
  gs->add_option("--theta2", gain.theta2);
  gs->add_option("--k", gain.k, "k range start:stop:step");
  gs->add_option("--t", gain.t, "t range start:stop:step");
  with_out(gs);

  SimulateArgs sim;
  auto* ss = app.add_subcommand("simulate", "split-step simulation (INI config plus overrides)");
  ss->add_option("--config", sim.config, "INI file with [grid] [coeffs] [init] [output]");
  ss->add_option("--L", sim.L);
  ss->add_option("--n", sim.n);
  ss->add_option("--dt", sim.dt);
  ss->add_option("--t-end", sim.t_end);
  ss->add_option("--a", sim.a);
  ss->add_option("--b", sim.b);
  ss->add_option("--c", sim.c);
  ss->add_option("--d", sim.d);
  ss->add_option("--g", sim.g);
  ss->add_option("--h", sim.h);
  ss->add_option("--init-type", sim.init_type, "cw or plane_wave");
  ss->add_option("--k", sim.k);
  ss->add_option("--eps1", sim.eps1);
  ss->add_option("--eps2", sim.eps2);
  ss->add_option("--sample-interval", sim.sample_interval);
  ss->add_option("--snapshots", sim.snapshots, "snapshot times, comma list or range");
  ss->add_option("--track", sim.track, "tracked wavenumbers, comma list or range");
  with_out(ss);

  auto* vs = app.add_subcommand("verify", "run the invariant suite");
  with_out(vs);

  auto* rc = app.add_subcommand("recipes", "print the invocations behind each figure");
  with_out(rc);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
  }

  Context ctx{out_dir, out, err};
  try {
    if (*pp) return run_phase_portrait(portrait, ctx);
    if (*ob) return run_orbit(orbit, ctx);
    if (*exs) return run_exact(ex, ctx);
    if (*rs) return run_riccati(ric, ctx);
    if (*gs) return run_mi_gain(gain, ctx);
    if (*ss) return run_simulate(sim, ctx);
    if (*vs) return run_verify(ctx);
    out << figure_recipes();
    return kExitOk;
  } catch (const NumericalError& e) {
    err << "error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
}

}  // namespace cnls::cli
