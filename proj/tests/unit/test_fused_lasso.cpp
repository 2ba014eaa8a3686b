#include <gtest/gtest.h>

#include "slin/errors.hpp"
#include "slin/fused_lasso.hpp"
#include "slin/oracle.hpp"
#include "test_support.hpp"

namespace slin {
namespace {

using testing::normal_vector;

/// Minimizes a 1-D convex function on [lo, hi] by a uniform grid followed by
/// golden-section refinement around the best grid point.
template <typename Fn>
double grid_minimize(Fn&& f, double lo, double hi, int points = 2001) {
  double best_t = lo, best = f(lo);
  const double h = (hi - lo) / (points - 1);
  for (int i = 1; i < points; ++i) {
    const double t = lo + h * i;
    const double v = f(t);
    if (v < best) {
      best = v;
      best_t = t;
    }
  }
  double a = std::max(lo, best_t - h), b = std::min(hi, best_t + h);
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  for (int it = 0; it < 200; ++it) {
    const double c = b - g * (b - a), d = a + g * (b - a);
    if (f(c) <= f(d)) {
      b = d;
    } else {
      a = c;
    }
  }
  return 0.5 * (a + b);
}

SymTridiagonal tv_dual_matrix(const DiagonalMetric& d) {
  const Eigen::Index m = d.size() - 1;
  const Vector inv = d.diag().cwiseInverse();
  return SymTridiagonal{inv.head(m) + inv.tail(m), -inv.segment(1, m - 1)};
}

double tv_dual_objective(const Vector& mu, const SymTridiagonal& q, const Vector& c) {
  return -0.5 * mu.dot(q.apply(mu)) + c.dot(mu);
}

double tv_subproblem(const Vector& x, const Vector& s, const Vector& center,
                     const DiagonalMetric& d, double lambda2) {
  return lambda2 * first_differences(x).lpNorm<1>() + s.dot(x) +
         0.5 * d_norm_sq(x - center, d);
}

// ---------------------------------------------------------------------- l1

TEST(L1Prox, ZeroLambdaIsShiftedCenter) {
  CounterRng rng(1, 0);
  const auto d = testing::random_metric(rng, 6);
  const Vector s = normal_vector(rng, 6);
  const Vector c = normal_vector(rng, 6);
  EXPECT_TRUE(l1_prox(s, c, d, 0.0).isApprox(c - d.apply_inverse(s)));
}

TEST(L1Prox, FullShrinkage) {
  const DiagonalMetric d(Eigen::Vector3d(1.0, 2.0, 4.0));
  const Vector c = Eigen::Vector3d(0.5, -0.2, 0.1);
  EXPECT_EQ(l1_prox(Vector::Zero(3), c, d, 0.5), Vector::Zero(3));
}

TEST(L1Prox, HandExample) {
  // d = 2, center = 1, s = -1: tau = 1.5, threshold 1/2
  const Vector x = l1_prox(Vector::Constant(1, -1.0), Vector::Constant(1, 1.0),
                           DiagonalMetric(Vector::Constant(1, 2.0)), 1.0);
  EXPECT_DOUBLE_EQ(x[0], 1.0);
  const double grid = grid_minimize(
      [](double t) { return std::abs(t) - t + 0.5 * 2.0 * (t - 1.0) * (t - 1.0); }, -5.0, 5.0);
  EXPECT_NEAR(grid, 1.0, 1e-6);
}

TEST(L1Prox, MatchesGridMinimizationOnScalarCases) {
  CounterRng rng(2024, 0);
  for (int t = 0; t < 1000; ++t) {
    const double d = 0.1 + 5.0 * rng.next_uniform();
    const double c = 3.0 * rng.next_normal();
    const double s = 3.0 * rng.next_normal();
    const double lam = 2.0 * rng.next_uniform();
    const double x = l1_prox(Vector::Constant(1, s), Vector::Constant(1, c),
                             DiagonalMetric(Vector::Constant(1, d)), lam)[0];
    const double span = std::abs(c) + std::abs(s) / d + lam / d + 1.0;
    const double g = grid_minimize(
        [&](double v) { return lam * std::abs(v) + s * v + 0.5 * d * (v - c) * (v - c); }, -span,
        span);
    EXPECT_NEAR(x, g, 1e-6) << "case " << t;
  }
}

TEST(L1Prox, NonexpansiveInDNorm) {
  CounterRng rng(77, 0);
  for (int t = 0; t < 500; ++t) {
    const int n = testing::uniform_int(rng, 1, 20);
    const auto d = testing::random_metric(rng, n);
    const double lam = rng.next_uniform();
    const Vector zero = Vector::Zero(n);
    const Vector u = normal_vector(rng, n, 2.0);
    const Vector v = normal_vector(rng, n, 2.0);
    const double lhs = std::sqrt(d_norm_sq(l1_prox(zero, u, d, lam) - l1_prox(zero, v, d, lam), d));
    EXPECT_LE(lhs, std::sqrt(d_norm_sq(u - v, d)) + 1e-12);
  }
}

TEST(L1Prox, Validation) {
  const auto d = DiagonalMetric::identity(2);
  EXPECT_THROW(l1_prox(Vector::Zero(2), Vector::Zero(2), d, -1.0), ConfigError);
  EXPECT_THROW(l1_prox(Vector::Zero(3), Vector::Zero(2), d, 1.0), DimensionError);
  EXPECT_THROW(L1Block(-0.5), ConfigError);
}

TEST(L1Block, ValueAndSubgradient) {
  L1Block b(2.0);
  const Vector x = Eigen::Vector3d(1.0, 0.0, -3.0);
  EXPECT_DOUBLE_EQ(b.value(x), 8.0);
  EXPECT_TRUE(b.subgradient(x).isApprox(Eigen::Vector3d(2.0, 0.0, -2.0)));
}

// ---------------------------------------------------------------------- tv

TEST(FirstDifferences, AdjointIdentity) {
  CounterRng rng(5, 5);
  for (int t = 0; t < 50; ++t) {
    const int n = testing::uniform_int(rng, 2, 30);
    const Vector x = normal_vector(rng, n);
    const Vector mu = normal_vector(rng, n - 1);
    EXPECT_NEAR(first_differences(x).dot(mu), x.dot(first_differences_adjoint(mu)), 1e-12 * n);
  }
  EXPECT_EQ(first_differences(Vector::Ones(1)).size(), 0);
  EXPECT_TRUE(first_differences(Eigen::Vector3d(1.0, 4.0, 2.0)).isApprox(Eigen::Vector2d(3, -2)));
}

TEST(TvProx, ZeroLambdaIsLinearOffsetProx) {
  CounterRng rng(3, 3);
  const auto d = testing::random_metric(rng, 10);
  const Vector s = normal_vector(rng, 10);
  const Vector c = normal_vector(rng, 10);
  const auto r = tv_prox(s, c, d, 0.0);
  EXPECT_EQ(r.mu, Vector::Zero(9));
  EXPECT_LE((r.x - (c - d.apply_inverse(s))).norm(), 1e-15 * std::max(1.0, c.norm()));
  EXPECT_TRUE(r.converged);
}

TEST(TvProx, SingleCoordinateHasNoPenalty) {
  const auto r = tv_prox(Vector::Constant(1, 2.0), Vector::Constant(1, 1.0),
                         DiagonalMetric(Vector::Constant(1, 4.0)), 3.0);
  EXPECT_DOUBLE_EQ(r.x[0], 0.5);
  EXPECT_EQ(r.mu.size(), 0);
}

TEST(TvProx, TwoCoordinatesMatchDualGridSearch) {
  for (double t : {-3.0, -0.4, 0.0, 0.7, 5.0}) {
    for (double lam : {0.1, 1.0, 2.0}) {
      const Vector c = Eigen::Vector2d(0.0, t);
      const auto r = tv_prox(Vector::Zero(2), c, DiagonalMetric::identity(2), lam);
      // dual: max_mu -mu^2 + t mu on [-lam, lam]
      const double mu = grid_minimize([&](double m) { return m * m - t * m; }, -lam, lam);
      EXPECT_NEAR(r.mu[0], mu, 1e-6) << "t=" << t << " lam=" << lam;
      EXPECT_NEAR(r.x[0], mu, 1e-6);
      EXPECT_NEAR(r.x[1], t - mu, 1e-6);
    }
  }
}

TEST(TvProx, MatchesProjectedGradientDualOracle) {
  CounterRng rng(12, 12);
  for (int t = 0; t < 40; ++t) {
    const int n = 12;
    const auto d = testing::random_metric(rng, n);
    const Vector s = normal_vector(rng, n);
    const Vector c = normal_vector(rng, n, 2.0);
    const double lam = 0.05 + rng.next_uniform();
    const auto r = tv_prox(s, c, d, lam);
    ASSERT_TRUE(r.converged);
    const auto q = tv_dual_matrix(d);
    const Vector lin = first_differences(c - d.apply_inverse(s));
    const auto oracle = dual_qp_oracle(q, lin, lam);
    ASSERT_TRUE(oracle.converged);
    EXPECT_NEAR(tv_dual_objective(r.mu, q, lin), tv_dual_objective(oracle.mu, q, lin), 1e-8);
    const Vector x_oracle = c - d.apply_inverse(s + first_differences_adjoint(oracle.mu));
    EXPECT_LE((r.x - x_oracle).lpNorm<Eigen::Infinity>(), 1e-6);
  }
}

TEST(TvProx, DualFeasibilityAndKkt) {
  CounterRng rng(21, 0);
  for (int t = 0; t < 100; ++t) {
    const int n = testing::uniform_int(rng, 2, 40);
    const auto d = testing::random_metric(rng, n, 0.01, 50.0);
    const Vector s = normal_vector(rng, n, 3.0);
    const Vector c = normal_vector(rng, n, 3.0);
    const double lam = 2.0 * rng.next_uniform();
    CoordinateDescentOptions opt;
    const auto r = tv_prox(s, c, d, lam, opt);
    ASSERT_TRUE(r.converged);
    EXPECT_LE(r.mu.lpNorm<Eigen::Infinity>(), lam);  // exact, by clipping
    const auto q = tv_dual_matrix(d);
    const Vector grad = first_differences(c - d.apply_inverse(s)) - q.apply(r.mu);
    for (Eigen::Index j = 0; j < r.mu.size(); ++j) {
      if (std::abs(r.mu[j]) < lam) {
        EXPECT_LE(std::abs(grad[j]), opt.tol) << "j=" << j;
      }
    }
  }
}

TEST(TvProx, ImpliedSubgradientSatisfiesSubgradientInequality) {
  CounterRng rng(8, 1);
  for (int t = 0; t < 20; ++t) {
    const int n = testing::uniform_int(rng, 2, 25);
    const auto d = testing::random_metric(rng, n);
    const Vector s = normal_vector(rng, n);
    const Vector c = normal_vector(rng, n);
    const double lam = rng.next_uniform() + 0.1;
    TVBlock block(lam);
    const Vector z = block.prox_solve(s, c, d).point;
    const Vector g = -s - d.apply(z - c);
    const double fz = block.value(z);
    for (int p = 0; p < 100; ++p) {
      const Vector y = normal_vector(rng, n, 2.0);
      EXPECT_GE(block.value(y), fz + g.dot(y - z) - 1e-8 * std::max(1.0, fz));
    }
  }
}

TEST(TvProx, PrimalObjectiveNotBeatenByPerturbations) {
  CounterRng rng(9, 9);
  const int n = 15;
  const auto d = testing::random_metric(rng, n);
  const Vector s = normal_vector(rng, n);
  const Vector c = normal_vector(rng, n);
  const auto r = tv_prox(s, c, d, 0.6);
  const double best = tv_subproblem(r.x, s, c, d, 0.6);
  for (int p = 0; p < 200; ++p) {
    const Vector y = r.x + normal_vector(rng, n, 1e-3);
    EXPECT_GE(tv_subproblem(y, s, c, d, 0.6), best - 1e-12);
  }
}

TEST(TvProx, SweepCapIsFlagged) {
  CounterRng rng(2, 2);
  const int n = 30;
  const auto d = testing::random_metric(rng, n, 0.01, 100.0);
  CoordinateDescentOptions opt;
  opt.max_sweeps = 1;
  const auto r = tv_prox(normal_vector(rng, n), normal_vector(rng, n, 0.5), d, 100.0, opt);
  EXPECT_FALSE(r.converged);
  EXPECT_EQ(r.sweeps, 1);
  EXPECT_GT(r.kkt_residual, opt.tol);
  TVBlock block(100.0, opt);
  EXPECT_FALSE(block.prox_solve(normal_vector(rng, n), normal_vector(rng, n, 0.5), d).converged);
}

TEST(TvProx, Validation) {
  const auto d = DiagonalMetric::identity(3);
  EXPECT_THROW(tv_prox(Vector::Zero(3), Vector::Zero(3), d, -1.0), ConfigError);
  CoordinateDescentOptions bad;
  bad.tol = 0.0;
  EXPECT_THROW(tv_prox(Vector::Zero(3), Vector::Zero(3), d, 1.0, bad), ConfigError);
  EXPECT_THROW(tv_prox(Vector::Zero(2), Vector::Zero(3), d, 1.0), DimensionError);
  EXPECT_THROW(TVBlock(-1.0), ConfigError);
}

TEST(TVBlock, WarmStartReachesSameSolution) {
  CounterRng rng(6, 6);
  const int n = 20;
  const auto d = testing::random_metric(rng, n);
  TVBlock warm(0.8, {}, true);
  TVBlock cold(0.8, {}, false);
  for (int t = 0; t < 5; ++t) {
    const Vector s = normal_vector(rng, n);
    const Vector c = normal_vector(rng, n);
    const Vector a = warm.prox_solve(s, c, d).point;
    const Vector b = cold.prox_solve(s, c, d).point;
    EXPECT_LE((a - b).lpNorm<Eigen::Infinity>(), 1e-8);
  }
}

TEST(TVBlock, ValueAndSubgradient) {
  TVBlock b(0.5);
  const Vector x = Eigen::Vector4d(1.0, 3.0, 3.0, 0.0);
  EXPECT_DOUBLE_EQ(b.value(x), 0.5 * (2.0 + 0.0 + 3.0));
  // u = 0.5 * sign(Rx) = (0.5, 0, -0.5)
  EXPECT_TRUE(b.subgradient(x).isApprox(Eigen::Vector4d(-0.5, 0.5, 0.5, -0.5)));
  EXPECT_EQ(b.subgradient(Vector::Ones(1)), Vector::Zero(1));
}

}  // namespace
}  // namespace slin
