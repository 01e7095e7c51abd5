#include "cnls/mi.hpp"

#include <array>
#include <cmath>
#include <limits>

#include "cnls/errors.hpp"
#include "cnls/quadrature.hpp"

namespace cnls::mi {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr std::size_t kCacheIntervals = 2000;

std::vector<double> cache_grid(double t_cache) {
  std::vector<double> t(kCacheIntervals + 1);
  for (std::size_t i = 0; i <= kCacheIntervals; ++i) {
    t[i] = t_cache * static_cast<double>(i) / static_cast<double>(kCacheIntervals);
  }
  return t;
}

}  // namespace

CWBackground::CWBackground(CoefficientFunctions coeffs, double A0, double B0, double theta1_0, double theta2_0,
                           double t_cache)
    : coeffs_(std::move(coeffs)), A0_(A0), B0_(B0), theta1_0_(theta1_0), theta2_0_(theta2_0) {
  if (!(t_cache > 0.0)) {
    throw DomainError("cache horizon must be positive");
  }
  const auto t = cache_grid(t_cache);
  const auto& d = coeffs_.d;
  auto id = cumulative_integral(d, t);
  std::vector<double> slope_d(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    slope_d[i] = d(t[i]);
  }
  int_d_ = HermiteSeries(t, id, slope_d);
}

double CWBackground::integral_d(double t) const {
  return int_d_.contains(t) ? int_d_(t) : integrate(coeffs_.d, 0.0, t);
}

double CWBackground::phase_integral(double t) const {
  const double s0 = A0_ * A0_ + B0_ * B0_;
  return integrate([&](double s) { return coeffs_.g(s) + coeffs_.h(s) * s0 * std::exp(-2.0 * integral_d(s)); },
                   0.0, t);
}

double CWBackground::amplitude_psi(double t) const { return A0_ * std::exp(-integral_d(t)); }
double CWBackground::amplitude_phi(double t) const { return B0_ * std::exp(-integral_d(t)); }
double CWBackground::theta1(double t) const { return theta1_0_ - phase_integral(t); }
double CWBackground::theta2(double t) const { return theta2_0_ + phase_integral(t); }
Complex CWBackground::psi0(double t) const { return std::polar(amplitude_psi(t), theta1(t)); }
Complex CWBackground::phi0(double t) const { return std::polar(amplitude_phi(t), theta2(t)); }

double CWBackground::total_intensity(double t) const {
  return (A0_ * A0_ + B0_ * B0_) * std::exp(-2.0 * integral_d(t));
}

CWBackground cw_background(const CoefficientFunctions& coeffs, double A0, double B0, double theta1_0,
                           double theta2_0, double t_cache) {
  if (!std::isfinite(A0) || !std::isfinite(B0) || A0 < 0.0 || B0 < 0.0) {
    throw DomainError("CW amplitudes must be finite and non-negative");
  }
  for (int i = 0; i <= 64; ++i) {
    const double t = t_cache * i / 64.0;
    if (coeffs.b(t) != 0.0) {
      throw AdmissibilityError("CW backgrounds need b = 0 (b(" + std::to_string(t) + ") != 0)");
    }
  }
  return CWBackground(coeffs, A0, B0, theta1_0, theta2_0, t_cache);
}

double dispersion_squared(const CWBackground& cw, double k, double t, Branch branch) {
  const double a = cw.coeffs().a(t);
  const double h = cw.coeffs().h(t);
  const double S = cw.total_intensity(t);
  const double k2 = k * k;
  const double disp = a * a * k2 * k2;
  const double nl = a * h * k2 * S;
  const double sw = std::abs(a * h) * k2 * S;
  const double w2 = branch == Branch::Plus ? disp + nl + sw : disp + nl - sw;
  if (std::abs(w2) <= 64.0 * kEps * (disp + 2.0 * sw)) {
    return 0.0;
  }
  return w2;
}

Complex dispersion_relation(const CWBackground& cw, double k, double t, Branch branch) {
  const double w2 = dispersion_squared(cw, k, t, branch);
  return w2 >= 0.0 ? Complex(std::sqrt(w2), 0.0) : Complex(0.0, std::sqrt(-w2));
}

Branch unstable_branch(const CWBackground& cw, double t) {
  const double ah = cw.coeffs().a(t) * cw.coeffs().h(t);
  return ah < 0.0 ? Branch::Minus : Branch::Plus;
}

namespace {

std::array<std::array<Complex, 4>, 4> build_matrix(const CWBackground& cw, double k, double t, Complex w) {
  const double a = cw.coeffs().a(t);
  const double h = cw.coeffs().h(t);
  const double p = std::pow(cw.amplitude_psi(t), 2);
  const double q = std::pow(cw.amplitude_phi(t), 2);
  const double ak2 = a * k * k;
  const double hp = h * p;
  const double hq = h * q;
  return {{{w - ak2 - hp, -hp, -hq, -hq},
           {-hp, -w - ak2 - hp, -hq, -hq},
           {hp, hp, w + ak2 + hq, hq},
           {hp, hp, hq, -w + ak2 + hq}}};
}

}  // namespace

Complex determinant_oracle(const CWBackground& cw, double k, double t, Complex omega) {
  auto m = build_matrix(cw, k, t, omega);
  Complex det = 1.0;
  for (std::size_t col = 0; col < 4; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < 4; ++r) {
      if (std::abs(m[r][col]) > std::abs(m[pivot][col])) {
        pivot = r;
      }
    }
    if (m[pivot][col] == Complex{}) {
      return 0.0;
    }
    if (pivot != col) {
      std::swap(m[pivot], m[col]);
      det = -det;
    }
    det *= m[col][col];
    for (std::size_t r = col + 1; r < 4; ++r) {
      const Complex f = m[r][col] / m[col][col];
      for (std::size_t c = col; c < 4; ++c) {
        m[r][c] -= f * m[col][c];
      }
    }
  }
  return det;
}

double matrix_scale(const CWBackground& cw, double k, double t, Complex omega) {
  double s = 0.0;
  for (const auto& row : build_matrix(cw, k, t, omega)) {
    for (const auto& v : row) {
      s = std::max(s, std::abs(v));
    }
  }
  return s;
}

double instability_region(const CWBackground& cw, double t) {
  const double a = cw.coeffs().a(t);
  const double h = cw.coeffs().h(t);
  if (!(a * h < 0.0)) {
    return 0.0;
  }
  return std::sqrt(-2.0 * h / a * cw.total_intensity(t));
}

double gain(const CWBackground& cw, double k, double t) {
  const double w2 = std::min(dispersion_squared(cw, k, t, Branch::Plus), dispersion_squared(cw, k, t, Branch::Minus));
  return w2 < 0.0 ? 2.0 * std::sqrt(-w2) : 0.0;
}

GainPeak gain_peak(const CWBackground& cw, double t) {
  const double a = cw.coeffs().a(t);
  const double h = cw.coeffs().h(t);
  if (!(a * h < 0.0)) {
    return {0.0, 0.0};
  }
  const double S = cw.total_intensity(t);
  return {std::sqrt(-h / a * S), 2.0 * std::abs(h) * S};
}

namespace {

double lambda_1plus(double k, double t) {
  const double r = 8.0 * std::exp(-t * t) - k * k;
  return r > 0.0 ? 2.0 * std::abs(k) * (1.0 + std::cos(t)) * std::sqrt(r) : 0.0;
}

double lambda_1minus(double k, double t) {
  const double r = 8.0 * std::exp(t * t) - k * k;
  return r > 0.0 ? 2.0 * std::abs(k) * (1.0 + std::cos(t)) * std::sqrt(r) : 0.0;
}

double lambda_2(double k, double t) {
  const double r = 4.0 - k * k;
  return r > 0.0 ? 2.0 * std::abs(k) * std::exp(-t * t / 2.0) * std::sqrt(r) : 0.0;
}

double lambda_3(double k, double t) {
  const double r = 16.0 - k * k;
  return r > 0.0 ? 2.0 * std::abs(k) * (t + 1.0) * std::sqrt(r) : 0.0;
}

Preset make_preset(std::string name, const CoefficientSources& src, double (*closed)(double, double)) {
  auto set = CoefficientSet::parse(src);
  auto cw = cw_background(set.functions(), 1.0, 1.0);
  return Preset{std::move(name), std::move(set), std::move(cw), closed};
}

}  // namespace

std::vector<Preset> gain_presets(int id) {
  switch (id) {
    case 1:
      return {make_preset("1+", {.a = "1 + cos(t)", .d = "t", .g = "cos(t)", .h = "-2 - 2*cos(t)"}, lambda_1plus),
              make_preset("1-", {.a = "1 + cos(t)", .d = "-t", .g = "cos(t)", .h = "-2 - 2*cos(t)"}, lambda_1minus)};
    case 2:
      return {make_preset("2", {.a = "exp(-t^2/2)", .d = "t", .g = "cos(t)", .h = "-exp(t^2/2)"}, lambda_2)};
    case 3:
      return {make_preset("3", {.a = "t + 1", .d = "-t", .g = "cos(t)", .h = "-4*(t + 1)*exp(-t^2)"}, lambda_3)};
    default:
      throw DomainError("unknown gain preset " + std::to_string(id) + " (expected 1, 2 or 3)");
  }
}

Preset gain_preset(std::string_view name) {
  if (name == "1+" || name == "1") {
    return std::move(gain_presets(1)[0]);
  }
  if (name == "1-") {
    return std::move(gain_presets(1)[1]);
  }
  if (name == "2") {
    return std::move(gain_presets(2)[0]);
  }
  if (name == "3") {
    return std::move(gain_presets(3)[0]);
  }
  throw DomainError("unknown gain preset '" + std::string(name) + "' (expected 1+, 1-, 2 or 3)");
}

}  // namespace cnls::mi
