#pragma once

// Strang split-step Fourier integrator for the coupled system with c = 0 on a
// periodic grid, plus mass/momentum diagnostics, Fourier-mode tracking and
// the Riccati substitution that maps constant-coefficient fields onto the
// variable-coefficient system.

#include <complex>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "cnls/coeffexpr.hpp"
#include "cnls/fft.hpp"
#include "cnls/riccati.hpp"

namespace cnls::pdesim {

using Complex = std::complex<double>;

// x_j = -L/2 + j L / n, j = 0..n-1.
struct Grid {
  double L = 16.0 * 3.14159265358979323846;
  std::size_t n = 1024;
  double dt = 1e-4;
  double t_end = 1.0;

  void validate() const;  // throws ConfigError
  double dx() const { return L / static_cast<double>(n); }
  double x(std::size_t j) const { return -0.5 * L + static_cast<double>(j) * dx(); }
  std::vector<double> points() const;
  // Nearest nonnegative multiple of 2 pi / L.
  double snap_wavenumber(double k) const;
};

struct FieldPair {
  std::vector<Complex> psi;
  std::vector<Complex> phi;
  double t = 0.0;
};

inline constexpr double kBlowUpBound = 1e6;

// One Strang step: half step of the pointwise factors (potential, linear,
// loss and nonlinear phase), a full dispersive step in Fourier space, and the
// pointwise half step again.  Pointwise coefficients are sampled at the
// midpoint of their half step, a at the midpoint of the full step.  The
// nonlinear phase integrates |psi|^2 + |phi|^2 exactly under the loss factor.
class Stepper {
 public:
  Stepper(double L, std::size_t n, CoefficientFunctions coeffs);

  // Advances state by dt (which may be negative).  Throws AdmissibilityError
  // when c is nonzero at the step midpoint and OverflowError when a field
  // exceeds kBlowUpBound or turns non-finite; the state is then left at its
  // last good value.
  void step(FieldPair& state, double dt);

  double mass(const FieldPair& state) const;
  double momentum(const FieldPair& state);
  // |FFT(psi)[m]| for the grid wavenumber nearest k (unnormalised forward).
  double mode_magnitude(const std::vector<Complex>& field, double k);

  double length() const { return L_; }
  std::size_t size() const { return n_; }
  const CoefficientFunctions& coeffs() const { return coeffs_; }

 private:
  void pointwise(FieldPair& state, double t_mid, double tau);

  double L_;
  std::size_t n_;
  CoefficientFunctions coeffs_;
  Fft fft_;
  std::vector<double> x2_;
  std::vector<double> k_;
  std::vector<Complex> work_;
  FieldPair backup_;
};

// N = dx sum (|psi|^2 + |phi|^2).
double diagnostics_mass(const FieldPair& state, double L);
// L = dx sum Im(psi* psi_x + phi* phi_x) with spectral derivatives.
double diagnostics_momentum(const FieldPair& state, double L);

struct InitSpec {
  std::string type = "cw";  // "cw": A (1 + eps cos kx); "plane_wave": A e^{ikx}
  double k = 1.0;
  double eps1 = 1e-6;
  double eps2 = 1e-6;
  double amp_psi = 1.0;
  double amp_phi = 1.0;

  void validate() const;  // throws ConfigError
};

// Builds the initial fields with k snapped to the grid.
FieldPair initial_fields(const Grid& grid, const InitSpec& init);

struct OutputSpec {
  std::vector<double> snapshot_times;
  double sample_interval = 0.01;
  std::vector<double> tracked_modes;
};

struct RunConfig {
  Grid grid;
  CoefficientSources coeffs;
  InitSpec init;
  OutputSpec output;

  void validate() const;  // throws ConfigError or ParseError
};

// INI format: sections [grid], [coeffs], [init], [output]; lists are
// comma-separated.  Unknown keys are rejected.
RunConfig parse_config(std::istream& in);
RunConfig load_config(const std::filesystem::path& path);

struct DiagnosticSample {
  double t;
  double mass;
  double momentum;
  double background;           // |FFT(psi)[0]|
  std::vector<double> modes;   // |FFT(psi)| at the tracked wavenumbers
};

struct Diagnostics {
  std::vector<double> tracked_k;  // snapped
  std::vector<DiagnosticSample> samples;
};

struct RunResult {
  RunConfig config;
  double k_snapped = 0.0;
  Diagnostics diagnostics;
  std::vector<FieldPair> snapshots;
  FieldPair final_state;
  bool blew_up = false;
  std::string message;
  double wall_seconds = 0.0;
};

RunResult run(const RunConfig& config);

// Writes snapshot_<i>.csv, diagnostics.csv and manifest.json into dir.
void write_outputs(const RunResult& result, const std::filesystem::path& dir);

struct FitOptions {
  double t_start = 0.0;
  double t_end = 1e300;
  double max_fraction = 0.1;      // of the background magnitude
  double residual_threshold = 0.05;
  std::size_t min_points = 5;
};

struct GrowthFit {
  double rate;
  double intercept;
  std::size_t points;
  double rms_residual;
  std::string warning;  // set when rms_residual exceeds the threshold
};

// Least-squares slope of log|psi_k|(t) over the samples in the window whose
// magnitude stays below max_fraction of the background.  Throws DomainError
// when k is not tracked and ConvergenceError when fewer than min_points
// samples qualify.
GrowthFit mode_growth(const Diagnostics& diag, double k, const FitOptions& opts = {});

// psi(x, t) = mu^{-1/2} e^{i alpha x^2} u(beta x), phi likewise with e^{-i alpha x^2},
// where u, v are periodic samples at tau = gamma(t) on the grid
// xi_j = -L_xi/2 + j L_xi / n.  Resampling is by trigonometric interpolation.
// Throws SingularityError when mu <= 0 or beta = 0 at t.
FieldPair theorem1_transform(const std::vector<Complex>& u, const std::vector<Complex>& v, double L_xi,
                             const riccati::RiccatiSolution& ric, double t, const std::vector<double>& x);

}  // namespace cnls::pdesim
