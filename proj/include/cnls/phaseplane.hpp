#pragma once

// The planar system G' = P, P' = g0 G + 2 h0 G^3 (+ eps cos(K xi) when forced).

#include <optional>
#include <vector>

namespace cnls::phaseplane {

struct Forcing {
  double epsilon = 0.0;
  double K = 0.0;
};

struct PlanarParams {
  double g0;
  double h0;
  std::optional<Forcing> forcing;

  // Throws DomainError for g0 = 0, h0 = 0, a negative or non-finite forcing.
  void validate() const;
};

enum class FixedPointKind { Saddle, Center };

struct FixedPoint {
  double G;
  double P;
  FixedPointKind kind;
};

const char* kind_name(FixedPointKind kind);

std::vector<FixedPoint> fixed_points(const PlanarParams& p);

// Determinant of the Jacobian at (G, P): -g0 - 6 h0 G^2.
double jacobian_determinant(const PlanarParams& p, double G);

// H = P^2/2 - g0 G^2/2 - h0 G^4/2, conserved by the unforced flow.
double hamiltonian(const PlanarParams& p, double G, double P);

struct State {
  double G;
  double P;
};

struct Orbit {
  PlanarParams params;
  State init;
  double step;
  std::vector<double> xi, G, P;

  std::size_t size() const { return xi.size(); }
  // max |H - H(0)| / max(|H(0)|, tiny) over the samples.
  double relative_energy_drift() const;
};

inline constexpr double kEscapeBound = 1e12;

// Fixed-step RK4 from xi = 0 over round(length / step) steps.  Throws
// OverflowError if |G| or |P| exceeds kEscapeBound.
Orbit integrate_orbit(const PlanarParams& p, State init, double length, double step);

struct SpectrumBin {
  double frequency;  // cycles per unit xi
  double magnitude;  // |X_j| * 2 / N, so a unit cosine gives 1
};

// DFT magnitude of the G samples: mean removed, rectangular window, zero
// padded to the next power of two, bins 1..N/2.  Needs at least 64 samples.
std::vector<SpectrumBin> spectrum(const Orbit& orbit);
std::vector<SpectrumBin> spectrum(const std::vector<double>& samples, double step);

// Fraction of total power (squared magnitude) held by the `top` largest bins.
double spectral_concentration(const std::vector<SpectrumBin>& bins, std::size_t top = 5);

struct SensitivityReport {
  std::vector<double> xi;
  std::vector<double> separation;
  double initial_separation;
  double max_separation;
  double amplification() const;
};

SensitivityReport sensitivity_report(const PlanarParams& p, State init1, State init2, double length, double step);

struct ChaosThresholds {
  double amplification = 100.0;
  double concentration = 0.5;
};

struct ChaosIndicators {
  double amplification;
  double concentration;
  bool chaotic;  // amplification above and concentration below threshold
};

ChaosIndicators chaos_indicators(const PlanarParams& p, State init1, State init2, double length, double step,
                                 const ChaosThresholds& thresholds = {});

}  // namespace cnls::phaseplane
