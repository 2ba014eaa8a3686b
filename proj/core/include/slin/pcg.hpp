#pragma once

#include <functional>

#include "slin/metric.hpp"

namespace slin {

/// y = M x for a symmetric positive definite operator M.
using LinearOperator = std::function<void(const Vector& x, Vector& y)>;

struct PcgOptions {
  /// Relative residual target ||Mx - rhs|| <= tol * ||rhs||.
  double tol = 1e-10;
  /// 0 means 2n.
  int max_iter = 0;
};

struct PcgResult {
  Vector x;
  int iterations = 0;
  /// True residual ||Mx - rhs|| / ||rhs|| recomputed at exit.
  double relative_residual = 0.0;
  /// False when max_iter was exhausted before reaching tol; x is then the
  /// best iterate seen.
  bool converged = false;
};

/// Preconditioned conjugate gradient with Jacobi-style preconditioner
/// P^{-1} = diag(precond)^{-1}. Throws NumericalError on NaN/Inf.
PcgResult pcg_solve(const LinearOperator& op, const Vector& rhs, const DiagonalMetric& precond,
                    const PcgOptions& options = {}, const Vector* initial_guess = nullptr);

}  // namespace slin
