#include "cnls/interp.hpp"

#include <algorithm>
#include <string>

#include "cnls/errors.hpp"

namespace cnls {

HermiteSeries::HermiteSeries(std::vector<double> t, std::vector<double> y, std::vector<double> dy)
    : t_(std::move(t)), y_(std::move(y)), dy_(std::move(dy)) {
  if (t_.size() < 2 || y_.size() != t_.size() || dy_.size() != t_.size()) {
    throw DomainError("Hermite interpolant needs at least two nodes with matching values and slopes");
  }
  for (std::size_t i = 1; i < t_.size(); ++i) {
    if (!(t_[i] > t_[i - 1])) {
      throw DomainError("Hermite interpolant nodes must be strictly increasing");
    }
  }
}

std::size_t HermiteSeries::locate(double t) const {
  if (!contains(t)) {
    throw DomainError("t = " + std::to_string(t) + " outside interpolation range [" + std::to_string(t_min()) +
                      ", " + std::to_string(t_max()) + "]");
  }
  const auto it = std::upper_bound(t_.begin(), t_.end(), t);
  const auto i = static_cast<std::size_t>(it - t_.begin());
  return std::min(i == 0 ? 0 : i - 1, t_.size() - 2);
}

double HermiteSeries::operator()(double t) const {
  const std::size_t i = locate(t);
  const double h = t_[i + 1] - t_[i];
  const double s = (t - t_[i]) / h;
  const double s2 = s * s;
  const double s3 = s2 * s;
  const double h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
  const double h10 = s3 - 2.0 * s2 + s;
  const double h01 = -2.0 * s3 + 3.0 * s2;
  const double h11 = s3 - s2;
  return h00 * y_[i] + h10 * h * dy_[i] + h01 * y_[i + 1] + h11 * h * dy_[i + 1];
}

double HermiteSeries::derivative(double t) const {
  const std::size_t i = locate(t);
  const double h = t_[i + 1] - t_[i];
  const double s = (t - t_[i]) / h;
  const double s2 = s * s;
  const double d00 = (6.0 * s2 - 6.0 * s) / h;
  const double d10 = 3.0 * s2 - 4.0 * s + 1.0;
  const double d01 = (-6.0 * s2 + 6.0 * s) / h;
  const double d11 = 3.0 * s2 - 2.0 * s;
  return d00 * y_[i] + d10 * dy_[i] + d01 * y_[i + 1] + d11 * dy_[i + 1];
}

}  // namespace cnls
