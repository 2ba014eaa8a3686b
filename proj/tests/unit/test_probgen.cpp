#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>

#include "slin/errors.hpp"
#include "slin/fused_lasso.hpp"
#include "slin/probgen.hpp"
#include "slin/rng.hpp"

namespace slin {
namespace {

namespace fs = std::filesystem;

std::set<std::size_t> as_set(const GroupSpec& g) { return {g.indices.begin(), g.indices.end()}; }

std::set<std::size_t> union_of(const std::vector<GroupSpec>& groups) {
  std::set<std::size_t> u;
  for (const auto& g : groups) u.insert(g.indices.begin(), g.indices.end());
  return u;
}

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("slin_probgen_" + name);
  fs::remove_all(p);
  return p;
}

TEST(CounterRng, StreamsAndSeedsAreIndependentAndReproducible) {
  CounterRng a(7, 1), b(7, 1), c(7, 2), d(8, 1);
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next_u64();
    EXPECT_EQ(x, b.next_u64());
    EXPECT_NE(x, c.next_u64());
    EXPECT_NE(x, d.next_u64());
  }
  EXPECT_EQ(a.counter(), 100u);
}

TEST(CounterRng, FirstDrawMatchesDefinition) {
  CounterRng r(42, 3);
  const std::uint64_t key = CounterRng::mix64(42 ^ CounterRng::mix64(3 + 0x9E3779B97F4A7C15ULL));
  EXPECT_EQ(r.next_u64(), CounterRng::mix64(key + 0x9E3779B97F4A7C15ULL));
}

TEST(CounterRng, DistributionMoments) {
  CounterRng r(1, 0);
  constexpr int kN = 200000;
  double su = 0.0, sn = 0.0, sn2 = 0.0;
  int below = 0;
  for (int i = 0; i < kN; ++i) {
    const double u = r.next_uniform();
    ASSERT_GT(u, 0.0);
    ASSERT_LT(u, 1.0);
    su += u;
    const double z = r.next_normal();
    sn += z;
    sn2 += z * z;
    below += r.next_below(10) < 3 ? 1 : 0;
  }
  EXPECT_NEAR(su / kN, 0.5, 0.005);
  EXPECT_NEAR(sn / kN, 0.0, 0.01);
  EXPECT_NEAR(sn2 / kN, 1.0, 0.02);
  EXPECT_NEAR(static_cast<double>(below) / kN, 0.3, 0.005);
  EXPECT_THROW(r.next_below(0), std::invalid_argument);
}

TEST(GenFused, DimensionsDeterminismAndTau) {
  const auto a = gen_fused(12, 7, 0.5, 0.25, 3);
  const auto b = gen_fused(12, 7, 0.5, 0.25, 3);
  const auto c = gen_fused(12, 7, 0.5, 0.25, 4);
  EXPECT_EQ(a.matrix->rows(), 12);
  EXPECT_EQ(a.matrix->cols(), 7);
  EXPECT_EQ(a.rhs.size(), 12);
  EXPECT_EQ(a.matrix->to_dense(), b.matrix->to_dense());
  EXPECT_EQ(a.rhs, b.rhs);
  EXPECT_NE(a.rhs, c.rhs);
  const Vector atb = a.matrix->to_dense().transpose() * a.rhs;
  EXPECT_DOUBLE_EQ(a.tau, atb.cwiseAbs().maxCoeff());
  EXPECT_THROW(gen_fused(3, 3, -1.0, 0.0, 1), ConfigError);
  EXPECT_THROW(gen_fused(0, 3, 0.0, 0.0, 1), ConfigError);
}

TEST(GenFused, TauScaling) {
  const auto inst = gen_fused_tau_scaled(20, 10, 0.25, 5);
  EXPECT_DOUBLE_EQ(inst.lambda1, 0.25 * inst.tau);
  EXPECT_DOUBLE_EQ(inst.lambda2, 0.25 * inst.tau);
}

TEST(GenFused, LassoZeroAboveTau) {
  // lambda1 >= tau and lambda2 = 0: x = 0 satisfies 0 in -A^T b + lambda1 [-1, 1]^n
  const auto inst = gen_fused(15, 6, 0.0, 0.0, 9);
  const Vector g = inst.matrix->multiply_transpose(inst.rhs);
  EXPECT_LE(g.cwiseAbs().maxCoeff(), inst.tau);
}

TEST(StructuredGroups, SmallCases) {
  const auto one = gen_structured_groups(1, 4, 1);
  ASSERT_EQ(one.size(), 1u);
  EXPECT_EQ(one[0].indices, (std::vector<std::size_t>{0, 1, 2, 3}));
  EXPECT_DOUBLE_EQ(one[0].weight, 1.0);

  const auto two = gen_structured_groups(2, 4, 1);
  EXPECT_EQ(two[1].indices, (std::vector<std::size_t>{3, 4, 5, 6}));
  EXPECT_EQ(structured_dimension(2, 4, 1), 7u);
  EXPECT_DOUBLE_EQ(two[1].weight, 0.5);
}

TEST(StructuredGroups, DefaultShapeOverlapsAndCoverage) {
  const std::size_t k = 5;
  const auto groups = gen_structured_groups(k);
  const std::size_t n = structured_dimension(k);
  EXPECT_EQ(n, 90u * k + 10u);
  std::set<std::size_t> all;
  for (std::size_t i = 0; i < n; ++i) all.insert(i);
  EXPECT_EQ(union_of(groups), all);
  for (std::size_t g = 0; g < k; ++g) {
    EXPECT_EQ(groups[g].indices.size(), 100u);
    EXPECT_NO_THROW(groups[g].validate(n));
    for (std::size_t h = g + 1; h < k; ++h) {
      std::vector<std::size_t> common;
      std::set_intersection(groups[g].indices.begin(), groups[g].indices.end(),
                            groups[h].indices.begin(), groups[h].indices.end(),
                            std::back_inserter(common));
      EXPECT_EQ(common.size(), h == g + 1 ? 10u : 0u);
    }
  }
  EXPECT_THROW(gen_structured_groups(0), ConfigError);
  EXPECT_THROW(gen_structured_groups(3, 5, 5), ConfigError);
}

TEST(RandomGroups, SortedDistinctDeterministic) {
  const auto a = gen_random_groups(6, 40, 12, 3);
  const auto b = gen_random_groups(6, 40, 12, 3);
  const auto c = gen_random_groups(6, 40, 12, 4);
  ASSERT_EQ(a.size(), 6u);
  bool differs = false;
  for (std::size_t g = 0; g < a.size(); ++g) {
    EXPECT_EQ(a[g].indices, b[g].indices);
    differs = differs || a[g].indices != c[g].indices;
    EXPECT_EQ(a[g].indices.size(), 12u);
    EXPECT_NO_THROW(a[g].validate(40));
    EXPECT_DOUBLE_EQ(a[g].weight, 1.0 / 6.0);
  }
  EXPECT_TRUE(differs);
  EXPECT_THROW(gen_random_groups(2, 5, 6, 1), ConfigError);
  const auto full = gen_random_groups(3, 5, 5, 1);
  EXPECT_EQ(full[2].indices, (std::vector<std::size_t>{0, 1, 2, 3, 4}));
}

TEST(TreeGroups, LaminarAndLeafCount) {
  for (std::size_t depth = 1; depth <= 4; ++depth) {
    for (std::size_t branching = 1; branching <= 3; ++branching) {
      for (std::size_t width = 1; width <= 2; ++width) {
        const auto groups = gen_tree_groups(depth, branching, width);
        const std::size_t n = tree_dimension(depth, branching, width);
        std::size_t expect_nodes = 0, level = 1;
        for (std::size_t l = 0; l < depth; ++l, level *= branching) expect_nodes += level;
        ASSERT_EQ(groups.size(), expect_nodes);
        EXPECT_EQ(groups[0].indices.size(), n);
        std::size_t leaves = 0;
        for (std::size_t g = 0; g < groups.size(); ++g) {
          EXPECT_NO_THROW(groups[g].validate(n));
          if (groups[g].indices.size() == width) ++leaves;
          const auto sg = as_set(groups[g]);
          for (std::size_t h = 0; h < groups.size(); ++h) {
            const auto sh = as_set(groups[h]);
            std::vector<std::size_t> common;
            std::set_intersection(sg.begin(), sg.end(), sh.begin(), sh.end(),
                                  std::back_inserter(common));
            const bool nested = std::includes(sg.begin(), sg.end(), sh.begin(), sh.end()) ||
                                std::includes(sh.begin(), sh.end(), sg.begin(), sg.end());
            EXPECT_TRUE(common.empty() || nested) << g << " vs " << h;
          }
        }
        if (branching > 1) {
          EXPECT_EQ(leaves * width, n);
        }
      }
    }
  }
}

TEST(TreeGroups, DepthOneIsSingleGroupAndBreadthFirst) {
  const auto root = gen_tree_groups(1, 3, 2);
  ASSERT_EQ(root.size(), 1u);
  EXPECT_EQ(root[0].indices, (std::vector<std::size_t>{0, 1}));
  const auto t = gen_tree_groups(3, 2);
  ASSERT_EQ(t.size(), 7u);
  EXPECT_EQ(t[1].indices, (std::vector<std::size_t>{0, 1}));
  EXPECT_EQ(t[2].indices, (std::vector<std::size_t>{2, 3}));
  EXPECT_EQ(t[6].indices, (std::vector<std::size_t>{3}));
  EXPECT_DOUBLE_EQ(t[0].weight, 1.0 / 7.0);
  EXPECT_THROW(gen_tree_groups(0, 2), ConfigError);
}

TEST(GroupInstance, TrueSignalAndDeterminism) {
  const auto inst = gen_group_instance(30, 12, gen_structured_groups(2, 7, 2), 0.4, 6);
  ASSERT_EQ(inst.true_x.size(), 12);
  EXPECT_DOUBLE_EQ(inst.true_x[0], -1.0);
  EXPECT_DOUBLE_EQ(inst.true_x[1], std::exp(-0.01));
  EXPECT_DOUBLE_EQ(inst.true_x[2], -std::exp(-0.02));
  EXPECT_DOUBLE_EQ(inst.loss_scale(), 1.0 / (2 * 0.4));
  const auto again = gen_group_instance(30, 12, gen_structured_groups(2, 7, 2), 0.4, 6);
  EXPECT_EQ(inst.rhs, again.rhs);
  // b - A x is the noise stream
  const Vector noise = inst.rhs - inst.matrix->multiply(inst.true_x);
  CounterRng rng(6, kStreamNoise);
  for (Eigen::Index i = 0; i < 30; ++i) EXPECT_NEAR(noise[i], rng.next_normal(), 1e-12);
  EXPECT_THROW(gen_group_instance(5, 4, {}, 1.0, 1), ConfigError);
  EXPECT_THROW(gen_group_instance(5, 4, gen_structured_groups(1, 4, 0), 0.0, 1), ConfigError);
  EXPECT_THROW(gen_group_instance(5, 3, gen_structured_groups(1, 4, 0), 1.0, 1), ConfigError);
}

TEST(GroupInstance, NormalizeCentersAndScales) {
  const auto inst = gen_group_instance(25, 8, gen_tree_groups(4, 2), 1.0, 2, true);
  const Eigen::MatrixXd a = inst.matrix->to_dense();
  for (Eigen::Index j = 0; j < 8; ++j) {
    EXPECT_NEAR(a.col(j).sum(), 0.0, 1e-12);
    EXPECT_NEAR(a.col(j).norm(), 1.0, 1e-12);
  }
  EXPECT_NEAR(inst.rhs.sum(), 0.0, 1e-12);
  EXPECT_NEAR(inst.rhs.norm(), 1.0, 1e-12);
}

TEST(Problems, BlockLayoutAndMetric) {
  const auto f = gen_fused(10, 4, 0.3, 0.2, 1);
  Problem p = make_fused_problem(f);
  ASSERT_EQ(p.objective.size(), 3u);
  EXPECT_EQ(p.objective.block(0).name(), "quad_loss");
  EXPECT_EQ(p.objective.block(1).name(), "l1");
  EXPECT_EQ(p.objective.block(2).name(), "total_variation");
  EXPECT_EQ(p.metric.diag(), f.matrix->column_sq_norms());

  const auto g = gen_group_instance(10, 7, gen_structured_groups(2, 4, 1), 0.5, 1);
  Problem q = make_group_problem(g);
  ASSERT_EQ(q.objective.size(), 3u);
  EXPECT_EQ(q.objective.block(1).name(), "group");
  EXPECT_TRUE(q.metric.diag().isApprox(g.matrix->column_sq_norms() / (2 * 0.5)));
  const Vector x = Vector::LinSpaced(7, -1.0, 1.0);
  const Vector r = g.rhs - g.matrix->multiply(x);
  double expect = r.squaredNorm() / (2.0 * 2 * 0.5);
  for (const auto& gs : g.groups) expect += group_value(x, gs);
  EXPECT_NEAR(q.objective.value(x), expect, 1e-12 * expect);
}

TEST(InstanceIo, FusedRoundTripIsExact) {
  const auto dir = scratch_dir("fused");
  const auto inst = gen_fused_tau_scaled(9, 5, 0.3, 2);
  save_instance(dir, inst);
  const auto back = std::get<FusedLassoInstance>(load_instance(dir / "instance.json"));
  EXPECT_EQ(back.matrix->to_dense(), inst.matrix->to_dense());
  EXPECT_EQ(back.rhs, inst.rhs);
  EXPECT_EQ(back.lambda1, inst.lambda1);
  EXPECT_EQ(back.lambda2, inst.lambda2);
  EXPECT_EQ(back.tau, inst.tau);
  EXPECT_EQ(back.seed, 2u);
  fs::remove_all(dir);
}

TEST(InstanceIo, GroupRoundTripIsExact) {
  const auto dir = scratch_dir("group");
  const auto inst = gen_group_instance(11, 10, gen_random_groups(3, 10, 4, 8), 0.6, 8, true);
  save_instance(dir, inst);
  const auto back = std::get<GroupLassoInstance>(load_instance(dir / "instance.json"));
  EXPECT_EQ(back.matrix->to_dense(), inst.matrix->to_dense());
  EXPECT_EQ(back.rhs, inst.rhs);
  EXPECT_EQ(back.true_x, inst.true_x);
  EXPECT_EQ(back.lambda, inst.lambda);
  ASSERT_EQ(back.groups.size(), 3u);
  for (std::size_t g = 0; g < 3; ++g) {
    EXPECT_EQ(back.groups[g].indices, inst.groups[g].indices);
    EXPECT_EQ(back.groups[g].weight, inst.groups[g].weight);
  }
  fs::remove_all(dir);
}

TEST(InstanceIo, RejectsBadSidecars) {
  const auto dir = scratch_dir("bad");
  EXPECT_THROW(load_instance(dir / "instance.json"), std::runtime_error);
  save_instance(dir, gen_fused(4, 3, 0.0, 0.0, 1));
  {
    std::ifstream in(dir / "instance.json");
    auto j = nlohmann::json::parse(in);
    j["problem"] = "mystery";
    std::ofstream(dir / "instance.json") << j.dump();
  }
  EXPECT_THROW(load_instance(dir / "instance.json"), ConfigError);
  {
    std::ifstream in(dir / "instance.json");
    auto j = nlohmann::json::parse(in);
    j["problem"] = "fused";
    j["rhs"] = std::vector<double>{1.0, 2.0};
    std::ofstream(dir / "instance.json") << j.dump();
  }
  EXPECT_THROW(load_instance(dir / "instance.json"), DimensionError);
  fs::remove_all(dir);
}

}  // namespace
}  // namespace slin
