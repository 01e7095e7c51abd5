#include "cnls/phaseplane.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <functional>
#include <numeric>

#include "cnls/errors.hpp"
#include "cnls/fft.hpp"

namespace cnls::phaseplane {

void PlanarParams::validate() const {
  if (!std::isfinite(g0) || !std::isfinite(h0) || g0 == 0.0 || h0 == 0.0) {
    throw DomainError("g0 and h0 must be finite and nonzero");
  }
  if (forcing && (!(forcing->epsilon >= 0.0) || !std::isfinite(forcing->epsilon) || !std::isfinite(forcing->K))) {
    throw DomainError("forcing needs a finite epsilon >= 0 and finite K");
  }
}

const char* kind_name(FixedPointKind kind) { return kind == FixedPointKind::Saddle ? "saddle" : "center"; }

double jacobian_determinant(const PlanarParams& p, double G) { return -p.g0 - 6.0 * p.h0 * G * G; }

std::vector<FixedPoint> fixed_points(const PlanarParams& p) {
  p.validate();
  auto classify = [&](double G) {
    return FixedPoint{G, 0.0, jacobian_determinant(p, G) < 0.0 ? FixedPointKind::Saddle : FixedPointKind::Center};
  };
  std::vector<FixedPoint> out{classify(0.0)};
  if (p.g0 / p.h0 < 0.0) {
    const double g = std::sqrt(-p.g0 / (2.0 * p.h0));
    out.push_back(classify(-g));
    out.push_back(classify(g));
  }
  return out;
}

double hamiltonian(const PlanarParams& p, double G, double P) {
  const double g2 = G * G;
  return 0.5 * P * P - 0.5 * p.g0 * g2 - 0.5 * p.h0 * g2 * g2;
}

double Orbit::relative_energy_drift() const {
  const double h0 = hamiltonian(params, G.front(), P.front());
  double worst = 0.0;
  for (std::size_t i = 0; i < size(); ++i) {
    worst = std::max(worst, std::abs(hamiltonian(params, G[i], P[i]) - h0));
  }
  return worst / std::max(std::abs(h0), 1e-300);
}

Orbit integrate_orbit(const PlanarParams& p, State init, double length, double step) {
  p.validate();
  if (!(step > 0.0) || !(length >= 0.0) || !std::isfinite(length)) {
    throw DomainError("orbit needs step > 0 and a finite length >= 0");
  }
  const auto n = static_cast<std::size_t>(std::llround(length / step));
  const double eps = p.forcing ? p.forcing->epsilon : 0.0;
  const double K = p.forcing ? p.forcing->K : 0.0;
  auto accel = [&](double xi, double G) { return p.g0 * G + 2.0 * p.h0 * G * G * G + eps * std::cos(K * xi); };

  Orbit o{p, init, step, {}, {}, {}};
  o.xi.reserve(n + 1);
  o.G.reserve(n + 1);
  o.P.reserve(n + 1);
  double G = init.G;
  double P = init.P;
  o.xi.push_back(0.0);
  o.G.push_back(G);
  o.P.push_back(P);
  for (std::size_t i = 0; i < n; ++i) {
    const double xi = static_cast<double>(i) * step;
    const double k1g = P;
    const double k1p = accel(xi, G);
    const double k2g = P + 0.5 * step * k1p;
    const double k2p = accel(xi + 0.5 * step, G + 0.5 * step * k1g);
    const double k3g = P + 0.5 * step * k2p;
    const double k3p = accel(xi + 0.5 * step, G + 0.5 * step * k2g);
    const double k4g = P + step * k3p;
    const double k4p = accel(xi + step, G + step * k3g);
    G += step / 6.0 * (k1g + 2.0 * k2g + 2.0 * k3g + k4g);
    P += step / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
    if (!(std::abs(G) <= kEscapeBound) || !(std::abs(P) <= kEscapeBound)) {
      throw OverflowError("orbit escaped at xi = " + std::to_string(xi + step));
    }
    o.xi.push_back(static_cast<double>(i + 1) * step);
    o.G.push_back(G);
    o.P.push_back(P);
  }
  return o;
}

std::vector<SpectrumBin> spectrum(const std::vector<double>& samples, double step) {
  if (samples.size() < 64) {
    throw DomainError("spectrum needs at least 64 samples");
  }
  if (!(step > 0.0)) {
    throw DomainError("sample spacing must be positive");
  }
  const std::size_t count = samples.size();
  const std::size_t n = std::bit_ceil(count);
  const double mean = std::accumulate(samples.begin(), samples.end(), 0.0) / static_cast<double>(count);
  std::vector<std::complex<double>> buf(n);
  for (std::size_t i = 0; i < count; ++i) {
    buf[i] = samples[i] - mean;
  }
  Fft fft(n);
  fft.forward(buf, buf);
  std::vector<SpectrumBin> bins;
  bins.reserve(n / 2);
  const double scale = 2.0 / static_cast<double>(count);
  for (std::size_t j = 1; j <= n / 2; ++j) {
    bins.push_back({static_cast<double>(j) / (static_cast<double>(n) * step), std::abs(buf[j]) * scale});
  }
  return bins;
}

std::vector<SpectrumBin> spectrum(const Orbit& orbit) { return spectrum(orbit.G, orbit.step); }

double spectral_concentration(const std::vector<SpectrumBin>& bins, std::size_t top) {
  std::vector<double> power;
  power.reserve(bins.size());
  for (const auto& b : bins) {
    power.push_back(b.magnitude * b.magnitude);
  }
  const double total = std::accumulate(power.begin(), power.end(), 0.0);
  if (total == 0.0) {
    return 0.0;
  }
  top = std::min(top, power.size());
  std::partial_sort(power.begin(), power.begin() + static_cast<long>(top), power.end(), std::greater<>());
  return std::accumulate(power.begin(), power.begin() + static_cast<long>(top), 0.0) / total;
}

double SensitivityReport::amplification() const {
  return initial_separation > 0.0 ? max_separation / initial_separation : 0.0;
}

SensitivityReport sensitivity_report(const PlanarParams& p, State init1, State init2, double length, double step) {
  const Orbit a = integrate_orbit(p, init1, length, step);
  const Orbit b = integrate_orbit(p, init2, length, step);
  SensitivityReport r{a.xi, {}, std::hypot(init1.G - init2.G, init1.P - init2.P), 0.0};
  r.separation.reserve(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double s = std::hypot(a.G[i] - b.G[i], a.P[i] - b.P[i]);
    r.separation.push_back(s);
    r.max_separation = std::max(r.max_separation, s);
  }
  return r;
}

ChaosIndicators chaos_indicators(const PlanarParams& p, State init1, State init2, double length, double step,
                                 const ChaosThresholds& thresholds) {
  const auto report = sensitivity_report(p, init1, init2, length, step);
  const double conc = spectral_concentration(spectrum(integrate_orbit(p, init1, length, step)));
  const double amp = report.amplification();
  return {amp, conc, amp > thresholds.amplification && conc < thresholds.concentration};
}

}  // namespace cnls::phaseplane
