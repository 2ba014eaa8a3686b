#include "slin/pcg.hpp"

#include <cmath>

#include "slin/errors.hpp"

namespace slin {

namespace {

void check_finite(const Vector& v, const char* what) {
  if (!v.allFinite()) throw NumericalError(std::string("pcg_solve: non-finite ") + what);
}

}  // namespace

PcgResult pcg_solve(const LinearOperator& op, const Vector& rhs, const DiagonalMetric& precond,
                    const PcgOptions& options, const Vector* initial_guess) {
  const Eigen::Index n = rhs.size();
  require_same_size(static_cast<std::size_t>(precond.size()), static_cast<std::size_t>(n),
                    "pcg_solve preconditioner");
  if (!(options.tol > 0.0)) throw ConfigError("pcg_solve: tol must be positive");
  check_finite(rhs, "right-hand side");

  const int max_iter = options.max_iter > 0 ? options.max_iter : static_cast<int>(2 * n);
  PcgResult result;

  const double rhs_norm = rhs.norm();
  if (rhs_norm == 0.0) {
    result.x = Vector::Zero(n);
    result.converged = true;
    return result;
  }
  const double target = options.tol * rhs_norm;

  Vector x = Vector::Zero(n);
  Vector r = rhs;
  Vector q(n);
  if (initial_guess != nullptr) {
    require_same_size(static_cast<std::size_t>(initial_guess->size()),
                      static_cast<std::size_t>(n), "pcg_solve initial guess");
    x = *initial_guess;
    op(x, q);
    r -= q;
  }

  Vector best_x = x;
  double best_res = r.norm();
  Vector z = precond.apply_inverse(r);
  Vector p = z;
  double rz = r.dot(z);
  int it = 0;
  double res = best_res;

  while (res > target && it < max_iter) {
    op(p, q);
    const double pq = p.dot(q);
    if (!std::isfinite(pq)) throw NumericalError("pcg_solve: non-finite curvature");
    if (pq <= 0.0) break;  // operator not positive definite along p (round-off)
    const double alpha = rz / pq;
    x.noalias() += alpha * p;
    r.noalias() -= alpha * q;
    ++it;
    res = r.norm();
    if (!std::isfinite(res)) throw NumericalError("pcg_solve: non-finite residual");
    if (res < best_res) {
      best_res = res;
      best_x = x;
    }
    z = precond.apply_inverse(r);
    const double rz_next = r.dot(z);
    p = z + (rz_next / rz) * p;
    rz = rz_next;
  }

  check_finite(best_x, "iterate");
  op(best_x, q);
  result.relative_residual = (q - rhs).norm() / rhs_norm;
  result.x = std::move(best_x);
  result.iterations = it;
  result.converged = best_res <= target;
  return result;
}

}  // namespace slin
