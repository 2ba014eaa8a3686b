#include "slin/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Cholesky>

#include "slin/errors.hpp"
#include "slin/rng.hpp"

namespace slin {

namespace {

/// Consensus ADMM state, kept across calls so that proximal point steps warm start.
class ConsensusAdmm {
 public:
  static constexpr double kRelax = 1.6;

  ConsensusAdmm(Objective& objective, const DiagonalMetric& metric)
      : objective_(objective), metric_(metric) {
    const Eigen::Index n = objective.dimension();
    copies_.assign(objective.size(), Vector::Zero(n));
    duals_.assign(objective.size(), Vector::Zero(n));
  }

  void reset_copies(const Vector& x) {
    for (auto& c : copies_) c = x;
    for (auto& u : duals_) u.setZero();
    x_ = x;
  }

  OracleProxResult solve(const Vector& center, const OracleConfig& config) {
    const auto num = static_cast<double>(objective_.size());
    if (x_.size() != center.size()) reset_copies(center);
    OracleProxResult out;
    int it = 0;
    for (; it < config.max_iter; ++it) {
      const DiagonalMetric penalty = metric_.scaled(rho_);
      const Vector zero = Vector::Zero(center.size());
      for (std::size_t i = 0; i < copies_.size(); ++i) {
        copies_[i] = objective_.block(i).prox_solve(zero, x_ - duals_[i], penalty).point;
      }
      const Vector x_old = x_;
      double primal_sq = 0.0;
      for (std::size_t i = 0; i < copies_.size(); ++i) {
        primal_sq += d_norm_sq(copies_[i] - x_old, metric_);
        copies_[i] = kRelax * copies_[i] + (1.0 - kRelax) * x_old;
      }
      Vector sum = Vector::Zero(center.size());
      for (std::size_t i = 0; i < copies_.size(); ++i) sum += copies_[i] + duals_[i];
      x_ = (center + rho_ * sum) / (1.0 + num * rho_);
      for (std::size_t i = 0; i < copies_.size(); ++i) duals_[i] += copies_[i] - x_;
      const double primal = std::sqrt(primal_sq);
      const double dual = rho_ * std::sqrt(num * d_norm_sq(x_ - x_old, metric_));
      const double ref = std::max(1.0, std::sqrt(d_norm_sq(x_, metric_)));
      if (!x_.allFinite()) throw NumericalError("reference_prox: non-finite iterate");
      if (primal <= config.tol * ref && dual <= config.tol * ref && it > 0) {
        out.converged = true;
        ++it;
        break;
      }
      // residual balancing
      if (it % 10 == 9) {
        double factor = 1.0;
        if (primal > 10.0 * dual && rho_ < 1e4) factor = 2.0;
        if (dual > 10.0 * primal && rho_ > 1e-4) factor = 0.5;
        if (factor != 1.0) {
          rho_ *= factor;
          for (auto& u : duals_) u /= factor;
        }
      }
    }
    out.x = x_;
    out.iterations = it;
    out.value = objective_.value(x_) + 0.5 * d_norm_sq(x_ - center, metric_);
    return out;
  }

 private:
  Objective& objective_;
  const DiagonalMetric& metric_;
  std::vector<Vector> copies_;
  std::vector<Vector> duals_;
  Vector x_;
  double rho_ = 1.0;
};

double power_iteration(const std::function<Vector(const Vector&)>& apply, Eigen::Index n,
                       std::uint64_t seed, int max_iter, double rel_tol) {
  CounterRng rng(seed, 11);
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = rng.next_normal();
  v.normalize();
  double estimate = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    Vector w = apply(v);
    const double next = v.dot(w);
    const double norm = w.norm();
    if (norm == 0.0) return 0.0;
    v = w / norm;
    if (it > 0 && std::abs(next - estimate) <= rel_tol * std::abs(next)) return next;
    estimate = next;
  }
  return estimate;
}

}  // namespace

OracleProxResult reference_prox(Objective& objective, const Vector& center,
                                const DiagonalMetric& metric, const OracleConfig& config) {
  require_same_size(static_cast<std::size_t>(center.size()),
                    static_cast<std::size_t>(objective.dimension()), "reference_prox");
  if (!(config.tol > 0.0)) throw ConfigError("reference_prox: tol must be positive");
  if (objective.size() == 0) {
    return OracleProxResult{center, 0.0, 0, true};
  }
  ConsensusAdmm admm(objective, metric);
  admm.reset_copies(center);
  return admm.solve(center, config);
}

OracleMinResult reference_min(Objective& objective, const DiagonalMetric& metric,
                              const OracleConfig& config, const Vector* x0) {
  const Eigen::Index n = objective.dimension();
  Vector x = x0 != nullptr ? *x0 : Vector::Zero(n);
  require_same_size(static_cast<std::size_t>(x.size()), static_cast<std::size_t>(n),
                    "reference_min");
  OracleMinResult out;
  if (objective.size() == 0) {
    out.x = x;
    out.converged = true;
    return out;
  }
  if (!(config.prox_weight > 0.0)) throw ConfigError("reference_min: prox_weight must be positive");
  const DiagonalMetric step_metric = metric.scaled(config.prox_weight);
  ConsensusAdmm admm(objective, step_metric);
  admm.reset_copies(x);
  OracleConfig inner = config;
  inner.tol = 0.1 * config.tol;
  for (int k = 0; k < config.max_iter; ++k) {
    const OracleProxResult step = admm.solve(x, inner);
    out.inner_iterations += step.iterations;
    const double move = std::sqrt(d_norm_sq(step.x - x, metric));
    const double ref = std::max(1.0, std::sqrt(d_norm_sq(step.x, metric)));
    x = step.x;
    ++out.outer_iterations;
    if (move <= config.tol * ref) {
      out.converged = true;
      break;
    }
  }
  out.x = x;
  out.objective = objective.value(x);
  return out;
}

double growth_constant(const SparseDesignMatrix& a, const DiagonalMetric& metric, double scale,
                       const OracleConfig& config) {
  const Eigen::Index n = a.cols();
  require_same_size(static_cast<std::size_t>(metric.size()), static_cast<std::size_t>(n),
                    "growth_constant");
  const Eigen::MatrixXd dense = a.to_dense();
  const Vector inv_sqrt_d = metric.diag().cwiseSqrt().cwiseInverse();
  Eigen::MatrixXd m = scale * (dense.transpose() * dense);
  m = inv_sqrt_d.asDiagonal() * m * inv_sqrt_d.asDiagonal();

  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("growth_constant: A^T A is rank deficient (Cholesky failed)");
  }
  const double lambda_inv_max = power_iteration(
      [&llt](const Vector& v) { return Vector(llt.solve(v)); }, n, config.seed, 100000, 1e-14);
  if (!(lambda_inv_max > 0.0) || !std::isfinite(lambda_inv_max)) {
    throw NumericalError("growth_constant: inverse iteration failed");
  }
  const double lambda_min = 1.0 / lambda_inv_max;
  const double trace = m.trace();
  if (lambda_min <= 1e-12 * trace / static_cast<double>(n)) {
    throw NumericalError("growth_constant: A^T A is numerically rank deficient");
  }
  return 0.5 * lambda_min;
}

Vector SymTridiagonal::apply(const Vector& x) const {
  const Eigen::Index n = size();
  require_same_size(static_cast<std::size_t>(x.size()), static_cast<std::size_t>(n),
                    "SymTridiagonal::apply");
  Vector y = diag.cwiseProduct(x);
  if (n > 1) {
    y.head(n - 1) += off.cwiseProduct(x.tail(n - 1));
    y.tail(n - 1) += off.cwiseProduct(x.head(n - 1));
  }
  return y;
}

DualQpResult dual_qp_oracle(const SymTridiagonal& q, const Vector& c, double bound, double tol,
                            int max_iter, std::uint64_t seed) {
  const Eigen::Index n = q.size();
  require_same_size(static_cast<std::size_t>(c.size()), static_cast<std::size_t>(n),
                    "dual_qp_oracle");
  if (n > 1) {
    require_same_size(static_cast<std::size_t>(q.off.size()), static_cast<std::size_t>(n - 1),
                      "dual_qp_oracle off-diagonal");
  }
  if (!(bound >= 0.0)) throw ConfigError("dual_qp_oracle: bound must be nonnegative");

  DualQpResult out;
  out.mu = Vector::Zero(n);
  if (n == 0) {
    out.converged = true;
    return out;
  }
  const double lipschitz =
      1.05 * power_iteration([&q](const Vector& v) { return q.apply(v); }, n, seed, 10000, 1e-10);
  if (!(lipschitz > 0.0)) {
    out.converged = true;
    return out;
  }
  const double step = 1.0 / lipschitz;

  auto residual = [&](const Vector& mu, const Vector& grad) {
    double worst = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      double viol;
      if (bound == 0.0) {
        viol = 0.0;
      } else if (mu[j] >= bound) {
        viol = std::max(0.0, -grad[j]);
      } else if (mu[j] <= -bound) {
        viol = std::max(0.0, grad[j]);
      } else {
        viol = std::abs(grad[j]);
      }
      worst = std::max(worst, viol);
    }
    return worst;
  };

  Vector& mu = out.mu;
  Vector grad = c - q.apply(mu);
  double res = residual(mu, grad);
  int it = 0;
  while (res > tol && it < max_iter) {
    mu = (mu + step * grad).cwiseMax(-bound).cwiseMin(bound);
    grad = c - q.apply(mu);
    res = residual(mu, grad);
    ++it;
  }
  out.iterations = it;
  out.kkt_residual = res;
  out.converged = res <= tol;
  return out;
}

double kappa_oracle(const Vector& weights, const Vector& numerators, double d) {
  require_same_size(static_cast<std::size_t>(weights.size()),
                    static_cast<std::size_t>(numerators.size()), "kappa_oracle");
  const double target = d * d;
  if (numerators.squaredNorm() <= target) {
    throw ConfigError("kappa_oracle: existence condition violated (no positive root)");
  }
  auto lhs = [&](double kappa) {
    double total = 0.0;
    for (Eigen::Index i = 0; i < weights.size(); ++i) {
      const double t = numerators[i] / (1.0 + weights[i] / kappa);
      total += t * t;
    }
    return total;
  };

  constexpr int kPointsPerDecade = 100;
  constexpr int kDecades = 24;
  double prev = 1e-12;
  if (lhs(prev) >= target) return prev;
  double lo = 0.0, hi = 0.0;
  bool found = false;
  for (int k = 1; k <= kPointsPerDecade * kDecades; ++k) {
    const double kappa = std::pow(10.0, -12.0 + static_cast<double>(k) / kPointsPerDecade);
    if (lhs(kappa) >= target) {
      lo = prev;
      hi = kappa;
      found = true;
      break;
    }
    prev = kappa;
  }
  if (!found) throw NumericalError("kappa_oracle: root beyond 1e12");
  while (hi - lo > 1e-12 * hi) {
    const double mid = 0.5 * (lo + hi);
    if (lhs(mid) < target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace slin
