#pragma once

#include <vector>

namespace cnls {

// Piecewise cubic Hermite interpolant through (t_i, y_i, y'_i).  Nodes must be
// strictly increasing; evaluation outside [t_0, t_n] throws DomainError.
class HermiteSeries {
 public:
  HermiteSeries() = default;
  HermiteSeries(std::vector<double> t, std::vector<double> y, std::vector<double> dy);

  double operator()(double t) const;
  double derivative(double t) const;

  double t_min() const { return t_.front(); }
  double t_max() const { return t_.back(); }
  bool empty() const { return t_.empty(); }
  bool contains(double t) const { return !t_.empty() && t >= t_.front() && t <= t_.back(); }

  const std::vector<double>& nodes() const { return t_; }
  const std::vector<double>& values() const { return y_; }
  const std::vector<double>& slopes() const { return dy_; }

 private:
  std::size_t locate(double t) const;

  std::vector<double> t_;
  std::vector<double> y_;
  std::vector<double> dy_;
};

}  // namespace cnls
