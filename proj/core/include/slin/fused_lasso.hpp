#pragma once

#include <memory>
#include <optional>

#include "slin/block.hpp"
#include "slin/pcg.hpp"
#include "slin/sparse_matrix.hpp"

namespace slin {

/// scale * 1/2 ||b - A x||^2. The prox solves
/// (scale A^T A + D) x = scale A^T b - s + D center by PCG preconditioned with D.
class QuadLossBlock final : public BlockOracle {
 public:
  QuadLossBlock(std::shared_ptr<const SparseDesignMatrix> matrix, Vector rhs, double scale = 1.0,
                PcgOptions pcg = {});

  std::string name() const override { return "quad_loss"; }
  double value(const Vector& x) const override;
  Vector subgradient(const Vector& x) const override;
  ProxResult prox_solve(const Vector& s, const Vector& center,
                        const DiagonalMetric& metric) override;

  const SparseDesignMatrix& matrix() const { return *matrix_; }
  const Vector& rhs() const { return rhs_; }
  double scale() const { return scale_; }
  /// PCG diagnostics of the most recent prox_solve.
  const PcgResult& last_pcg() const { return last_pcg_; }

 private:
  std::shared_ptr<const SparseDesignMatrix> matrix_;
  Vector rhs_;
  double scale_;
  PcgOptions pcg_;
  Vector scaled_atb_;  // scale * A^T b
  PcgResult last_pcg_;
};

/// Componentwise minimizer of lambda1 ||x||_1 + <s, x> + 1/2 ||x - center||_D^2:
/// x_i = sgn(t_i) max(0, |t_i| - lambda1 / d_i), t_i = center_i - s_i / d_i.
Vector l1_prox(const Vector& s, const Vector& center, const DiagonalMetric& metric,
               double lambda1);

class L1Block final : public BlockOracle {
 public:
  explicit L1Block(double lambda1);

  std::string name() const override { return "l1"; }
  double value(const Vector& x) const override;
  Vector subgradient(const Vector& x) const override;
  ProxResult prox_solve(const Vector& s, const Vector& center,
                        const DiagonalMetric& metric) override;

  double lambda1() const { return lambda1_; }

 private:
  double lambda1_;
};

struct CoordinateDescentOptions {
  /// Stop when the largest projected dual-gradient component is <= tol.
  double tol = 1e-10;
  /// 0 means 50 * n.
  int max_sweeps = 0;
};

struct TvProxResult {
  Vector x;
  Vector mu;  // dual multipliers, |mu_j| <= lambda2
  int sweeps = 0;
  double kkt_residual = 0.0;
  bool converged = true;
};

/// (R x)_j = x_{j+1} - x_j, length n - 1.
Vector first_differences(const Vector& x);
/// R^T mu, length mu.size() + 1.
Vector first_differences_adjoint(const Vector& mu);

/// Minimizer of lambda2 sum_j |x_{j+1} - x_j| + <s, x> + 1/2 ||x - center||_D^2.
///
/// Solves the box-constrained dual
///   max_mu -1/2 mu^T R D^{-1} R^T mu + mu^T R (center - D^{-1} s),  |mu_j| <= lambda2
/// by cyclic coordinate ascent with exact per-coordinate maximization, then
/// recovers x = center - D^{-1} (s + R^T mu). Each sweep is O(n) because
/// R D^{-1} R^T is tridiagonal. `warm_mu`, if given with matching size, is
/// the starting dual point.
TvProxResult tv_prox(const Vector& s, const Vector& center, const DiagonalMetric& metric,
                     double lambda2, const CoordinateDescentOptions& options = {},
                     const Vector* warm_mu = nullptr);

/// lambda2 * sum_j |x_{j+1} - x_j|. Keeps the last dual solution as a warm start.
class TVBlock final : public BlockOracle {
 public:
  explicit TVBlock(double lambda2, CoordinateDescentOptions options = {},
                   bool warm_start = true);

  std::string name() const override { return "total_variation"; }
  double value(const Vector& x) const override;
  Vector subgradient(const Vector& x) const override;
  ProxResult prox_solve(const Vector& s, const Vector& center,
                        const DiagonalMetric& metric) override;

  double lambda2() const { return lambda2_; }
  const TvProxResult& last_result() const { return last_; }

 private:
  double lambda2_;
  CoordinateDescentOptions options_;
  bool warm_start_;
  TvProxResult last_;
};

}  // namespace slin
