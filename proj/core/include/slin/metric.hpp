#pragma once

#include <Eigen/Core>

namespace slin {

using Vector = Eigen::VectorXd;

/// Positive diagonal matrix D defining the proximal norm ||x||_D^2 = <x, Dx>.
///
/// Every entry is strictly positive. Entries that are zero (or below the
/// floor) at construction are replaced by the floor value, which keeps D
/// positive definite for design matrices with all-zero columns.
class DiagonalMetric {
 public:
  static constexpr double kDefaultFloor = 1e-8;

  DiagonalMetric() = default;

  /// Throws ConfigError if any entry is negative or non-finite, or if
  /// `floor` is not positive.
  explicit DiagonalMetric(Vector diag, double floor = kDefaultFloor);

  static DiagonalMetric identity(Eigen::Index n) { return DiagonalMetric(Vector::Ones(n)); }

  Eigen::Index size() const { return diag_.size(); }
  const Vector& diag() const { return diag_; }
  double operator[](Eigen::Index i) const { return diag_[i]; }

  /// D * x
  Vector apply(const Vector& x) const;
  /// D^{-1} * x
  Vector apply_inverse(const Vector& x) const;

  /// Metric c * D for c > 0.
  DiagonalMetric scaled(double c) const;

 private:
  Vector diag_;
};

/// sum_i D_ii x_i^2
double d_norm_sq(const Vector& x, const DiagonalMetric& metric);

/// sum_i x_i^2 / D_ii
double d_inv_norm_sq(const Vector& x, const DiagonalMetric& metric);

}  // namespace slin
