#include "slin/metric.hpp"

#include <cmath>
#include <string>

#include "slin/errors.hpp"

namespace slin {

DiagonalMetric::DiagonalMetric(Vector diag, double floor) : diag_(std::move(diag)) {
  if (!(floor > 0.0) || !std::isfinite(floor)) {
    throw ConfigError("DiagonalMetric: floor must be positive and finite");
  }
  for (Eigen::Index i = 0; i < diag_.size(); ++i) {
    const double d = diag_[i];
    if (!std::isfinite(d) || d < 0.0) {
      throw ConfigError("DiagonalMetric: entry " + std::to_string(i) +
                        " is negative or non-finite");
    }
    if (d < floor) diag_[i] = floor;
  }
}

Vector DiagonalMetric::apply(const Vector& x) const {
  require_same_size(static_cast<std::size_t>(x.size()), static_cast<std::size_t>(size()),
                    "DiagonalMetric::apply");
  return diag_.cwiseProduct(x);
}

Vector DiagonalMetric::apply_inverse(const Vector& x) const {
  require_same_size(static_cast<std::size_t>(x.size()), static_cast<std::size_t>(size()),
                    "DiagonalMetric::apply_inverse");
  return x.cwiseQuotient(diag_);
}

DiagonalMetric DiagonalMetric::scaled(double c) const {
  if (!(c > 0.0)) throw ConfigError("DiagonalMetric::scaled: factor must be positive");
  DiagonalMetric out;
  out.diag_ = c * diag_;
  return out;
}

double d_norm_sq(const Vector& x, const DiagonalMetric& metric) {
  require_same_size(static_cast<std::size_t>(x.size()), static_cast<std::size_t>(metric.size()),
                    "d_norm_sq");
  return (metric.diag().array() * x.array().square()).sum();
}

double d_inv_norm_sq(const Vector& x, const DiagonalMetric& metric) {
  require_same_size(static_cast<std::size_t>(x.size()), static_cast<std::size_t>(metric.size()),
                    "d_inv_norm_sq");
  return (x.array().square() / metric.diag().array()).sum();
}

}  // namespace slin
