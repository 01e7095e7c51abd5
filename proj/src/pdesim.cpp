#include "cnls/pdesim.hpp"

#include <fftw3.h>

#include <algorithm>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <set>
#include <sstream>

#include "cnls/errors.hpp"
#include "json.hpp"

namespace cnls::pdesim {

namespace {

bool is_power_of_two(std::size_t n) { return n >= 2 && (n & (n - 1)) == 0; }

// (1 - e^{-2 d tau}) / (2 d tau), continuous at d tau = 0.
double loss_average(double d, double tau) {
  const double z = 2.0 * d * tau;
  return std::abs(z) < 1e-12 ? 1.0 - 0.5 * z : -std::expm1(-z) / z;
}

std::size_t mode_index(double k, double L, std::size_t n) {
  const long m = std::lround(k * L / (2.0 * std::numbers::pi));
  const long nn = static_cast<long>(n);
  return static_cast<std::size_t>(((m % nn) + nn) % nn);
}

}  // namespace

void Grid::validate() const {
  if (!(L > 0.0) || !std::isfinite(L)) {
    throw ConfigError("grid.L must be positive");
  }
  if (!is_power_of_two(n)) {
    throw ConfigError("grid.n must be a power of two (got " + std::to_string(n) + ")");
  }
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    throw ConfigError("grid.dt must be positive");
  }
  if (!(t_end >= 0.0) || !std::isfinite(t_end)) {
    throw ConfigError("grid.t_end must be non-negative");
  }
}

std::vector<double> Grid::points() const {
  std::vector<double> x(n);
  for (std::size_t j = 0; j < n; ++j) {
    x[j] = this->x(j);
  }
  return x;
}

double Grid::snap_wavenumber(double k) const {
  const double k0 = 2.0 * std::numbers::pi / L;
  return k0 * std::round(std::abs(k) / k0);
}

Stepper::Stepper(double L, std::size_t n, CoefficientFunctions coeffs)
    : L_(L), n_(n), coeffs_(std::move(coeffs)), fft_(n), x2_(n), k_(fft_wavenumbers(n, L)), work_(n) {
  Grid{L, n, 1.0, 0.0}.validate();
  for (std::size_t j = 0; j < n; ++j) {
    const double x = -0.5 * L + static_cast<double>(j) * L / static_cast<double>(n);
    x2_[j] = x * x;
  }
}

void Stepper::pointwise(FieldPair& s, double t_mid, double tau) {
  const double b = coeffs_.b(t_mid);
  const double d = coeffs_.d(t_mid);
  const double g = coeffs_.g(t_mid);
  const double h = coeffs_.h(t_mid);
  const double decay = std::exp(-d * tau);
  const double hs = h * tau * loss_average(d, tau);
  for (std::size_t j = 0; j < n_; ++j) {
    const double S = std::norm(s.psi[j]) + std::norm(s.phi[j]);
    const double theta = (b * x2_[j] + g) * tau + hs * S;
    s.psi[j] *= std::polar(decay, -theta);
    s.phi[j] *= std::polar(decay, theta);
  }
}

void Stepper::step(FieldPair& state, double dt) {
  if (state.psi.size() != n_ || state.phi.size() != n_) {
    throw DomainError("field size does not match the stepper grid");
  }
  const double t = state.t;
  const double c = coeffs_.c(t + 0.5 * dt);
  if (c != 0.0) {
    throw AdmissibilityError("split-step integrator needs c = 0 (c(" + std::to_string(t + 0.5 * dt) +
                             ") = " + std::to_string(c) + ")");
  }
  backup_ = state;

  pointwise(state, t + 0.25 * dt, 0.5 * dt);
  const double a = coeffs_.a(t + 0.5 * dt);
  fft_.forward(state.psi, work_);
  for (std::size_t m = 0; m < n_; ++m) {
    work_[m] *= std::polar(1.0, -a * k_[m] * k_[m] * dt);
  }
  fft_.inverse(work_, state.psi);
  fft_.forward(state.phi, work_);
  for (std::size_t m = 0; m < n_; ++m) {
    work_[m] *= std::polar(1.0, a * k_[m] * k_[m] * dt);
  }
  fft_.inverse(work_, state.phi);
  pointwise(state, t + 0.75 * dt, 0.5 * dt);
  state.t = t + dt;

  double peak = 0.0;
  for (std::size_t j = 0; j < n_; ++j) {
    peak = std::max({peak, std::abs(state.psi[j]), std::abs(state.phi[j])});
  }
  if (!(peak <= kBlowUpBound)) {
    state = backup_;
    std::ostringstream os;
    os << "field blow-up at t = " << t + dt << " (max |field| = " << peak << ")";
    throw OverflowError(os.str());
  }
}

double Stepper::mass(const FieldPair& state) const { return diagnostics_mass(state, L_); }

double Stepper::momentum(const FieldPair& state) {
  double total = 0.0;
  for (const auto* f : {&state.psi, &state.phi}) {
    fft_.forward(*f, work_);
    for (std::size_t m = 0; m < n_; ++m) {
      work_[m] *= (2 * m == n_) ? Complex{} : Complex(0.0, k_[m]);
    }
    fft_.inverse(work_, work_);
    for (std::size_t j = 0; j < n_; ++j) {
      total += (std::conj((*f)[j]) * work_[j]).imag();
    }
  }
  return total * L_ / static_cast<double>(n_);
}

double Stepper::mode_magnitude(const std::vector<Complex>& field, double k) {
  fft_.forward(field, work_);
  return std::abs(work_[mode_index(k, L_, n_)]);
}

double diagnostics_mass(const FieldPair& state, double L) {
  double sum = 0.0;
  for (std::size_t j = 0; j < state.psi.size(); ++j) {
    sum += std::norm(state.psi[j]) + std::norm(state.phi[j]);
  }
  return state.psi.empty() ? 0.0 : sum * L / static_cast<double>(state.psi.size());
}

double diagnostics_momentum(const FieldPair& state, double L) {
  const auto n = state.psi.size();
  if (n == 0) {
    return 0.0;
  }
  CoefficientFunctions zero;
  Stepper s(L, n, zero);
  return s.momentum(state);
}

void InitSpec::validate() const {
  if (type != "cw" && type != "plane_wave") {
    throw ConfigError("init.type must be cw or plane_wave (got '" + type + "')");
  }
  for (double v : {k, eps1, eps2, amp_psi, amp_phi}) {
    if (!std::isfinite(v)) {
      throw ConfigError("init values must be finite");
    }
  }
}

FieldPair initial_fields(const Grid& grid, const InitSpec& init) {
  grid.validate();
  init.validate();
  const double k = init.type == "cw" ? grid.snap_wavenumber(init.k)
                                     : std::copysign(grid.snap_wavenumber(init.k), init.k);
  FieldPair f;
  f.psi.resize(grid.n);
  f.phi.resize(grid.n);
  for (std::size_t j = 0; j < grid.n; ++j) {
    const double x = grid.x(j);
    if (init.type == "cw") {
      f.psi[j] = init.amp_psi * (1.0 + init.eps1 * std::cos(k * x));
      f.phi[j] = init.amp_phi * (1.0 + init.eps2 * std::cos(k * x));
    } else {
      f.psi[j] = std::polar(init.amp_psi, k * x);
      f.phi[j] = std::polar(init.amp_phi, k * x);
    }
  }
  return f;
}

void RunConfig::validate() const {
  grid.validate();
  init.validate();
  auto set = CoefficientSet::parse(coeffs);
  set.validate_at(0.0);
  if (!(output.sample_interval > 0.0)) {
    throw ConfigError("output.sample_interval must be positive");
  }
  for (double t : output.snapshot_times) {
    if (!(t >= 0.0 && t <= grid.t_end + 0.5 * grid.dt)) {
      throw ConfigError("snapshot time " + std::to_string(t) + " outside [0, t_end]");
    }
  }
  for (double k : output.tracked_modes) {
    if (!std::isfinite(k) || k < 0.0) {
      throw ConfigError("tracked modes must be finite and non-negative");
    }
  }
}

namespace {

std::vector<double> parse_list(const std::string& key, const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (item.empty()) {
      continue;
    }
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) {
        throw std::invalid_argument(item);
      }
    } catch (const std::exception&) {
      throw ConfigError("bad number '" + item + "' in " + key);
    }
  }
  return out;
}

double parse_number(const std::string& key, const std::string& text) {
  auto v = parse_list(key, text);
  if (v.size() != 1) {
    throw ConfigError(key + " must be a single number");
  }
  return v.front();
}

}  // namespace

RunConfig parse_config(std::istream& in) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config: ") + e.message() + " (line " + std::to_string(e.line()) + ")");
  }
  RunConfig cfg;
  const std::set<std::string> sections = {"grid", "coeffs", "init", "output"};
  for (const auto& [section, body] : tree) {
    if (!sections.count(section)) {
      throw ConfigError("unknown config section [" + section + "]");
    }
    for (const auto& [key, node] : body) {
      const std::string name = section + "." + key;
      const std::string value = node.data();
      if (section == "grid") {
        if (key == "L") {
          cfg.grid.L = parse_number(name, value);
        } else if (key == "n") {
          const double n = parse_number(name, value);
          if (!(n >= 2.0 && n <= 1 << 24) || n != std::floor(n)) {
            throw ConfigError("grid.n must be a positive integer");
          }
          cfg.grid.n = static_cast<std::size_t>(n);
        } else if (key == "dt") {
          cfg.grid.dt = parse_number(name, value);
        } else if (key == "t_end") {
          cfg.grid.t_end = parse_number(name, value);
        } else {
          throw ConfigError("unknown key " + name);
        }
      } else if (section == "coeffs") {
        if (key == "a") {
          cfg.coeffs.a = value;
        } else if (key == "b") {
          cfg.coeffs.b = value;
        } else if (key == "c") {
          cfg.coeffs.c = value;
        } else if (key == "d") {
          cfg.coeffs.d = value;
        } else if (key == "g") {
          cfg.coeffs.g = value;
        } else if (key == "h") {
          cfg.coeffs.h = value;
        } else {
          throw ConfigError("unknown key " + name);
        }
      } else if (section == "init") {
        if (key == "type") {
          cfg.init.type = value;
        } else if (key == "k") {
          cfg.init.k = parse_number(name, value);
        } else if (key == "eps1") {
          cfg.init.eps1 = parse_number(name, value);
        } else if (key == "eps2") {
          cfg.init.eps2 = parse_number(name, value);
        } else if (key == "amp_psi") {
          cfg.init.amp_psi = parse_number(name, value);
        } else if (key == "amp_phi") {
          cfg.init.amp_phi = parse_number(name, value);
        } else {
          throw ConfigError("unknown key " + name);
        }
      } else {
        if (key == "snapshot_times") {
          cfg.output.snapshot_times = parse_list(name, value);
        } else if (key == "sample_interval") {
          cfg.output.sample_interval = parse_number(name, value);
        } else if (key == "tracked_modes") {
          cfg.output.tracked_modes = parse_list(name, value);
        } else {
          throw ConfigError("unknown key " + name);
        }
      }
    }
  }
  cfg.validate();
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot open config file " + path.string());
  }
  return parse_config(in);
}

RunResult run(const RunConfig& config) {
  config.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const auto& grid = config.grid;
  RunResult result;
  result.config = config;
  result.k_snapped = grid.snap_wavenumber(config.init.k);

  Stepper stepper(grid.L, grid.n, CoefficientSet::parse(config.coeffs).functions());
  FieldPair state = initial_fields(grid, config.init);
  for (double k : config.output.tracked_modes) {
    result.diagnostics.tracked_k.push_back(grid.snap_wavenumber(k));
  }

  const long steps = std::lround(grid.t_end / grid.dt);
  const long every = std::max(1L, std::lround(config.output.sample_interval / grid.dt));
  std::vector<long> snap_steps;
  for (double ts : config.output.snapshot_times) {
    snap_steps.push_back(std::lround(ts / grid.dt));
  }

  auto sample = [&]() {
    DiagnosticSample s{state.t, stepper.mass(state), stepper.momentum(state), stepper.mode_magnitude(state.psi, 0.0),
                       {}};
    for (double k : result.diagnostics.tracked_k) {
      s.modes.push_back(stepper.mode_magnitude(state.psi, k));
    }
    result.diagnostics.samples.push_back(std::move(s));
  };
  auto snapshot = [&](long i) {
    for (long s : snap_steps) {
      if (s == i) {
        result.snapshots.push_back(state);
        break;
      }
    }
  };

  sample();
  snapshot(0);
  for (long i = 1; i <= steps; ++i) {
    try {
      stepper.step(state, grid.dt);
    } catch (const OverflowError& e) {
      result.blew_up = true;
      result.message = e.what();
      break;
    }
    state.t = static_cast<double>(i) * grid.dt;
    if (i % every == 0 || i == steps) {
      sample();
    }
    snapshot(i);
  }
  result.final_state = std::move(state);
  result.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return result;
}

namespace {

std::ofstream open_output(const std::filesystem::path& p) {
  std::ofstream out(p);
  if (!out) {
    throw ConfigError("cannot write " + p.string());
  }
  out << std::setprecision(17);
  return out;
}

}  // namespace

void write_outputs(const RunResult& result, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const auto x = result.config.grid.points();
  std::vector<std::string> snapshot_files;
  for (std::size_t i = 0; i < result.snapshots.size(); ++i) {
    const auto name = "snapshot_" + std::to_string(i) + ".csv";
    snapshot_files.push_back(name);
    auto out = open_output(dir / name);
    out << "x,re_psi,im_psi,re_phi,im_phi\n";
    const auto& s = result.snapshots[i];
    for (std::size_t j = 0; j < x.size(); ++j) {
      out << x[j] << ',' << s.psi[j].real() << ',' << s.psi[j].imag() << ',' << s.phi[j].real() << ','
          << s.phi[j].imag() << '\n';
    }
  }
  {
    auto out = open_output(dir / "diagnostics.csv");
    out << "t,N,L,background";
    for (double k : result.diagnostics.tracked_k) {
      out << ",mode_" << k;
    }
    out << '\n';
    for (const auto& s : result.diagnostics.samples) {
      out << s.t << ',' << s.mass << ',' << s.momentum << ',' << s.background;
      for (double m : s.modes) {
        out << ',' << m;
      }
      out << '\n';
    }
  }
  auto outputs = snapshot_files;
  outputs.push_back("diagnostics.csv");
  const auto& c = result.config;
  nlohmann::json manifest = {
      {"schema_version", 1},
      {"subcommand", "simulate"},
      {"config",
       {{"grid", {{"L", c.grid.L}, {"n", c.grid.n}, {"dt", c.grid.dt}, {"t_end", c.grid.t_end}}},
        {"coeffs",
         {{"a", c.coeffs.a}, {"b", c.coeffs.b}, {"c", c.coeffs.c}, {"d", c.coeffs.d}, {"g", c.coeffs.g},
          {"h", c.coeffs.h}}},
        {"init",
         {{"type", c.init.type},
          {"k", c.init.k},
          {"eps1", c.init.eps1},
          {"eps2", c.init.eps2},
          {"amp_psi", c.init.amp_psi},
          {"amp_phi", c.init.amp_phi}}},
        {"output",
         {{"snapshot_times", c.output.snapshot_times},
          {"sample_interval", c.output.sample_interval},
          {"tracked_modes", c.output.tracked_modes}}}}},
      {"k_snapped", result.k_snapped},
      {"tracked_k_snapped", result.diagnostics.tracked_k},
      {"blew_up", result.blew_up},
      {"message", result.message},
      {"final_time", result.final_state.t},
      {"snapshots", snapshot_files},
      {"seeds", nlohmann::json::array()},
      {"outputs", outputs},
      {"versions", {{"cnls", "0.1.0"}, {"fftw", std::string(fftw_version)}}},
      {"wall_seconds", result.wall_seconds},
  };
  auto out = open_output(dir / "manifest.json");
  out << manifest.dump(2) << '\n';
}

GrowthFit mode_growth(const Diagnostics& diag, double k, const FitOptions& opts) {
  std::size_t idx = diag.tracked_k.size();
  for (std::size_t i = 0; i < diag.tracked_k.size(); ++i) {
    if (std::abs(diag.tracked_k[i] - k) <= 1e-9 * std::max(1.0, k)) {
      idx = i;
    }
  }
  if (idx == diag.tracked_k.size()) {
    throw DomainError("wavenumber " + std::to_string(k) + " is not tracked");
  }
  std::vector<double> ts;
  std::vector<double> ys;
  for (const auto& s : diag.samples) {
    const double m = s.modes[idx];
    if (s.t < opts.t_start || s.t > opts.t_end || !(m > 0.0) || m >= opts.max_fraction * s.background) {
      continue;
    }
    ts.push_back(s.t);
    ys.push_back(std::log(m));
  }
  if (ts.size() < std::max<std::size_t>(opts.min_points, 2)) {
    throw ConvergenceError("fit window too short: " + std::to_string(ts.size()) + " usable samples");
  }
  const double n = static_cast<double>(ts.size());
  double mt = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    mt += ts[i];
    my += ys[i];
  }
  mt /= n;
  my /= n;
  double stt = 0.0;
  double sty = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    stt += (ts[i] - mt) * (ts[i] - mt);
    sty += (ts[i] - mt) * (ys[i] - my);
  }
  if (!(stt > 0.0)) {
    throw ConvergenceError("fit window has no time spread");
  }
  GrowthFit fit{sty / stt, 0.0, ts.size(), 0.0, {}};
  fit.intercept = my - fit.rate * mt;
  double ss = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const double r = ys[i] - (fit.intercept + fit.rate * ts[i]);
    ss += r * r;
  }
  fit.rms_residual = std::sqrt(ss / n);
  if (fit.rms_residual > opts.residual_threshold) {
    std::ostringstream os;
    os << "log-linear fit residual " << fit.rms_residual << " exceeds " << opts.residual_threshold
       << "; window may include nonlinear growth";
    fit.warning = os.str();
  }
  return fit;
}

namespace {

// Trigonometric interpolant of periodic samples on [-L/2, L/2).
class TrigInterpolant {
 public:
  TrigInterpolant(const std::vector<Complex>& f, double L) : L_(L), c_(f.size()) {
    Fft fft(f.size());
    fft.forward(f, c_);
    for (auto& v : c_) {
      v /= static_cast<double>(f.size());
    }
  }

  Complex operator()(double xi) const {
    const auto n = c_.size();
    const double s = xi + 0.5 * L_;
    const double k0 = 2.0 * std::numbers::pi / L_;
    Complex sum = c_[0];
    for (std::size_t m = 1; m < n / 2; ++m) {
      const double km = k0 * static_cast<double>(m);
      sum += c_[m] * std::polar(1.0, km * s) + c_[n - m] * std::polar(1.0, -km * s);
    }
    sum += c_[n / 2] * std::cos(k0 * static_cast<double>(n / 2) * s);
    return sum;
  }

 private:
  double L_;
  std::vector<Complex> c_;
};

}  // namespace

FieldPair theorem1_transform(const std::vector<Complex>& u, const std::vector<Complex>& v, double L_xi,
                             const riccati::RiccatiSolution& ric, double t, const std::vector<double>& x) {
  if (u.size() != v.size() || !is_power_of_two(u.size())) {
    throw DomainError("u and v must have the same power-of-two length");
  }
  if (!(L_xi > 0.0)) {
    throw DomainError("xi period must be positive");
  }
  const double mu = ric.mu(t);
  const double beta = ric.beta(t);
  const double alpha = ric.alpha(t);
  if (!(mu > 0.0) || beta == 0.0 || !std::isfinite(beta)) {
    throw SingularityError("transform is singular (mu = " + std::to_string(mu) + ", beta = " + std::to_string(beta) +
                               ")",
                           t, t);
  }
  const TrigInterpolant iu(u, L_xi);
  const TrigInterpolant iv(v, L_xi);
  const double scale = 1.0 / std::sqrt(mu);
  FieldPair out;
  out.t = t;
  out.psi.resize(x.size());
  out.phi.resize(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double chirp = alpha * x[j] * x[j];
    out.psi[j] = std::polar(scale, chirp) * iu(beta * x[j]);
    out.phi[j] = std::polar(scale, -chirp) * iv(beta * x[j]);
  }
  return out;
}

}  // namespace cnls::pdesim
