#pragma once

#include <cstdint>

#include "slin/block.hpp"
#include "slin/pcg.hpp"
#include "slin/sparse_matrix.hpp"

namespace slin {

/// Slow, high-accuracy reference computations. These are deliberately
/// algorithmically different from the production solvers so that agreement
/// between the two is evidence of correctness.
struct OracleConfig {
  double tol = 1e-10;
  int max_iter = 200000;
  /// Seeds the starting vectors of power iterations.
  std::uint64_t seed = 0;
  /// reference_min takes proximal point steps in the metric prox_weight * D.
  double prox_weight = 1e-2;
};

/// Inner PCG settings for quadratic blocks of an objective handed to the
/// oracles. Consensus ADMM stalls near its tolerance when block solves are
/// only accurate to the default PCG residual.
inline PcgOptions oracle_pcg_options() { return PcgOptions{1e-14, 0}; }

struct OracleProxResult {
  Vector x;
  /// F(x) + 1/2 ||x - center||_D^2, i.e. the Moreau-Yosida value F_D(center).
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// argmin_x F(x) + 1/2 ||x - center||_D^2 by consensus ADMM in the product
/// space: each block keeps its own copy x_i, solved with its exact prox in
/// the metric rho D, and copies are averaged with the quadratic term.
/// Stops when primal and dual residuals (D-norm) fall below
/// tol * max(1, ||x||_D).
OracleProxResult reference_prox(Objective& objective, const Vector& center,
                                const DiagonalMetric& metric, const OracleConfig& config = {});

struct OracleMinResult {
  Vector x;
  double objective = 0.0;
  int outer_iterations = 0;
  int inner_iterations = 0;
  bool converged = false;
};

/// Proximal point iteration x <- reference_prox(x) in the metric
/// prox_weight * D, from x0 (zero if null), until
/// ||x+ - x||_D <= tol * max(1, ||x||_D).
OracleMinResult reference_min(Objective& objective, const DiagonalMetric& metric,
                              const OracleConfig& config = {}, const Vector* x0 = nullptr);

/// alpha = 1/2 lambda_min(D^{-1/2} (scale A^T A) D^{-1/2}), a growth constant
/// F(x) - F(x*) >= alpha ||x - x*||_D^2 certified by the quadratic loss alone.
/// Computed by inverse power iteration on a Cholesky factorization; throws
/// NumericalError when A^T A is (numerically) rank deficient.
double growth_constant(const SparseDesignMatrix& a, const DiagonalMetric& metric,
                       double scale = 1.0, const OracleConfig& config = {});

/// Symmetric tridiagonal matrix; off[j] = Q(j, j+1) = Q(j+1, j).
struct SymTridiagonal {
  Vector diag;
  Vector off;

  Eigen::Index size() const { return diag.size(); }
  Vector apply(const Vector& x) const;
};

struct DualQpResult {
  Vector mu;
  int iterations = 0;
  double kkt_residual = 0.0;
  bool converged = false;
};

/// max_mu -1/2 mu^T Q mu + c^T mu subject to |mu_j| <= bound, by projected
/// gradient with fixed step 1/L (L from power iteration) until the projected
/// gradient residual is <= tol.
DualQpResult dual_qp_oracle(const SymTridiagonal& q, const Vector& c, double bound,
                            double tol = 1e-10, int max_iter = 5'000'000,
                            std::uint64_t seed = 0);

/// Root of sum_i (numerators_i / (1 + weights_i / kappa))^2 = d^2 by a
/// logarithmic grid over [1e-12, 1e12] followed by bisection to 1e-12
/// relative. Throws ConfigError when sum numerators_i^2 <= d^2.
double kappa_oracle(const Vector& weights, const Vector& numerators, double d);

}  // namespace slin
