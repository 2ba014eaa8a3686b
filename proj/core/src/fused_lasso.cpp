#include "slin/fused_lasso.hpp"

#include <algorithm>
#include <cmath>

#include "slin/errors.hpp"

namespace slin {

namespace {

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

void check_prox_args(const Vector& s, const Vector& center, const DiagonalMetric& metric,
                     const char* what) {
  require_same_size(static_cast<std::size_t>(s.size()), static_cast<std::size_t>(center.size()),
                    what);
  require_same_size(static_cast<std::size_t>(metric.size()),
                    static_cast<std::size_t>(center.size()), what);
}

}  // namespace

// ---------------------------------------------------------------- quad loss

QuadLossBlock::QuadLossBlock(std::shared_ptr<const SparseDesignMatrix> matrix, Vector rhs,
                             double scale, PcgOptions pcg)
    : matrix_(std::move(matrix)), rhs_(std::move(rhs)), scale_(scale), pcg_(pcg) {
  if (!matrix_) throw ConfigError("QuadLossBlock: null matrix");
  require_same_size(static_cast<std::size_t>(rhs_.size()),
                    static_cast<std::size_t>(matrix_->rows()), "QuadLossBlock rhs");
  if (!(scale_ > 0.0) || !std::isfinite(scale_)) {
    throw ConfigError("QuadLossBlock: scale must be positive");
  }
  scaled_atb_ = scale_ * matrix_->multiply_transpose(rhs_);
}

double QuadLossBlock::value(const Vector& x) const {
  return 0.5 * scale_ * (rhs_ - matrix_->multiply(x)).squaredNorm();
}

Vector QuadLossBlock::subgradient(const Vector& x) const {
  return scale_ * matrix_->multiply_transpose(matrix_->multiply(x) - rhs_);
}

ProxResult QuadLossBlock::prox_solve(const Vector& s, const Vector& center,
                                     const DiagonalMetric& metric) {
  check_prox_args(s, center, metric, "QuadLossBlock::prox_solve");
  require_same_size(static_cast<std::size_t>(center.size()),
                    static_cast<std::size_t>(matrix_->cols()), "QuadLossBlock::prox_solve");
  const auto& a = matrix_->storage();
  const Vector& d = metric.diag();
  const double scale = scale_;
  LinearOperator op = [&a, &d, scale](const Vector& x, Vector& y) {
    Vector ax = a * x;
    y.noalias() = a.transpose() * ax;
    y *= scale;
    y += d.cwiseProduct(x);
  };
  const Vector rhs = scaled_atb_ - s + metric.apply(center);
  last_pcg_ = pcg_solve(op, rhs, metric, pcg_, &center);
  return ProxResult{last_pcg_.x, last_pcg_.converged, last_pcg_.iterations};
}

// ---------------------------------------------------------------------- l1

Vector l1_prox(const Vector& s, const Vector& center, const DiagonalMetric& metric,
               double lambda1) {
  check_prox_args(s, center, metric, "l1_prox");
  if (!(lambda1 >= 0.0)) throw ConfigError("l1_prox: lambda1 must be nonnegative");
  Vector x(center.size());
  for (Eigen::Index i = 0; i < center.size(); ++i) {
    const double d = metric[i];
    const double tau = center[i] - s[i] / d;
    x[i] = sign(tau) * std::max(0.0, std::abs(tau) - lambda1 / d);
  }
  return x;
}

L1Block::L1Block(double lambda1) : lambda1_(lambda1) {
  if (!(lambda1_ >= 0.0) || !std::isfinite(lambda1_)) {
    throw ConfigError("L1Block: lambda1 must be nonnegative");
  }
}

double L1Block::value(const Vector& x) const { return lambda1_ * x.lpNorm<1>(); }

Vector L1Block::subgradient(const Vector& x) const {
  return x.unaryExpr([this](double v) { return lambda1_ * sign(v); });
}

ProxResult L1Block::prox_solve(const Vector& s, const Vector& center,
                               const DiagonalMetric& metric) {
  return ProxResult{l1_prox(s, center, metric, lambda1_), true, 0};
}

// ---------------------------------------------------------------------- tv

Vector first_differences(const Vector& x) {
  if (x.size() < 2) return Vector(0);
  return x.tail(x.size() - 1) - x.head(x.size() - 1);
}

Vector first_differences_adjoint(const Vector& mu) {
  const Eigen::Index m = mu.size();
  Vector out = Vector::Zero(m + 1);
  out.head(m) -= mu;
  out.tail(m) += mu;
  return out;
}

TvProxResult tv_prox(const Vector& s, const Vector& center, const DiagonalMetric& metric,
                     double lambda2, const CoordinateDescentOptions& options,
                     const Vector* warm_mu) {
  check_prox_args(s, center, metric, "tv_prox");
  if (!(lambda2 >= 0.0)) throw ConfigError("tv_prox: lambda2 must be nonnegative");
  if (!(options.tol > 0.0)) throw ConfigError("tv_prox: tol must be positive");

  const Eigen::Index n = center.size();
  TvProxResult result;
  const Vector y = center - metric.apply_inverse(s);
  if (n < 2 || lambda2 == 0.0) {
    result.x = y;
    result.mu = Vector::Zero(std::max<Eigen::Index>(n - 1, 0));
    return result;
  }

  const Eigen::Index m = n - 1;
  const Vector inv_d = metric.diag().cwiseInverse();
  const Vector c = first_differences(y);
  // Q = R D^{-1} R^T: Q_jj = 1/d_j + 1/d_{j+1}, Q_{j,j+1} = -1/d_{j+1}
  const Vector q_diag = inv_d.head(m) + inv_d.tail(m);

  Vector mu = Vector::Zero(m);
  if (warm_mu != nullptr && warm_mu->size() == m) {
    mu = warm_mu->cwiseMax(-lambda2).cwiseMin(lambda2);
  }

  auto dual_gradient = [&](Eigen::Index j) {
    double q_mu = q_diag[j] * mu[j];
    if (j > 0) q_mu -= inv_d[j] * mu[j - 1];
    if (j + 1 < m) q_mu -= inv_d[j + 1] * mu[j + 1];
    return c[j] - q_mu;
  };
  auto kkt_residual = [&]() {
    double worst = 0.0;
    for (Eigen::Index j = 0; j < m; ++j) {
      const double g = dual_gradient(j);
      double viol;
      if (mu[j] >= lambda2) {
        viol = std::max(0.0, -g);
      } else if (mu[j] <= -lambda2) {
        viol = std::max(0.0, g);
      } else {
        viol = std::abs(g);
      }
      worst = std::max(worst, viol);
    }
    return worst;
  };

  const int max_sweeps = options.max_sweeps > 0 ? options.max_sweeps : static_cast<int>(50 * n);
  double residual = kkt_residual();
  int sweeps = 0;
  while (residual > options.tol && sweeps < max_sweeps) {
    for (Eigen::Index j = 0; j < m; ++j) {
      const double g = dual_gradient(j);
      mu[j] = std::clamp(mu[j] + g / q_diag[j], -lambda2, lambda2);
    }
    ++sweeps;
    residual = kkt_residual();
  }
  if (!mu.allFinite()) throw NumericalError("tv_prox: non-finite dual iterate");

  result.x = y - inv_d.cwiseProduct(first_differences_adjoint(mu));
  result.mu = std::move(mu);
  result.sweeps = sweeps;
  result.kkt_residual = residual;
  result.converged = residual <= options.tol;
  return result;
}

TVBlock::TVBlock(double lambda2, CoordinateDescentOptions options, bool warm_start)
    : lambda2_(lambda2), options_(options), warm_start_(warm_start) {
  if (!(lambda2_ >= 0.0) || !std::isfinite(lambda2_)) {
    throw ConfigError("TVBlock: lambda2 must be nonnegative");
  }
}

double TVBlock::value(const Vector& x) const {
  return lambda2_ * first_differences(x).lpNorm<1>();
}

Vector TVBlock::subgradient(const Vector& x) const {
  if (x.size() < 2) return Vector::Zero(x.size());
  const Vector u = first_differences(x).unaryExpr([this](double v) { return lambda2_ * sign(v); });
  return first_differences_adjoint(u);
}

ProxResult TVBlock::prox_solve(const Vector& s, const Vector& center,
                               const DiagonalMetric& metric) {
  const Vector* warm = warm_start_ && last_.mu.size() > 0 ? &last_.mu : nullptr;
  last_ = tv_prox(s, center, metric, lambda2_, options_, warm);
  return ProxResult{last_.x, last_.converged, last_.sweeps};
}

}  // namespace slin
