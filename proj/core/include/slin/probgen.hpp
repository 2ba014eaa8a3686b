#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "slin/block.hpp"
#include "slin/group_lasso.hpp"
#include "slin/pcg.hpp"
#include "slin/sparse_matrix.hpp"

namespace slin {

// Stream ids for CounterRng; fixed so that instances are reproducible.
inline constexpr std::uint64_t kStreamMatrix = 1;
inline constexpr std::uint64_t kStreamRhs = 2;
inline constexpr std::uint64_t kStreamNoise = 3;
inline constexpr std::uint64_t kStreamGroups = 4;

/// 1/2 ||b - Ax||^2 + lambda1 ||x||_1 + lambda2 sum |x_{j+1} - x_j|.
struct FusedLassoInstance {
  std::shared_ptr<const SparseDesignMatrix> matrix;
  Vector rhs;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  std::uint64_t seed = 0;
  /// ||A^T b||_inf: the smallest lambda1 for which the plain lasso solution is 0.
  double tau = 0.0;
};

/// 1/(2 K lambda) ||b - Ax||^2 + sum_j d_j ||x_{G_j}||_2.
struct GroupLassoInstance {
  std::shared_ptr<const SparseDesignMatrix> matrix;
  Vector rhs;
  double lambda = 1.0;
  std::vector<GroupSpec> groups;
  Vector true_x;
  std::uint64_t seed = 0;

  std::size_t num_groups() const { return groups.size(); }
  double loss_scale() const { return 1.0 / (static_cast<double>(groups.size()) * lambda); }
};

/// Dense m x n matrix with i.i.d. standard normal entries, drawn row by row.
SparseDesignMatrix gen_gaussian_matrix(Eigen::Index m, Eigen::Index n, std::uint64_t seed);

double lasso_tau(const SparseDesignMatrix& a, const Vector& b);

/// A and b i.i.d. standard normal (independent streams).
FusedLassoInstance gen_fused(Eigen::Index m, Eigen::Index n, double lambda1, double lambda2,
                             std::uint64_t seed);
/// Same instance with lambda1 = lambda2 = ratio * tau.
FusedLassoInstance gen_fused_tau_scaled(Eigen::Index m, Eigen::Index n, double ratio,
                                        std::uint64_t seed);

/// K groups of `group_size` consecutive indices, successive groups sharing
/// `overlap` indices; n = (group_size - overlap) K + overlap; d_j = 1/K.
std::vector<GroupSpec> gen_structured_groups(std::size_t k, std::size_t group_size = 100,
                                             std::size_t overlap = 10);
std::size_t structured_dimension(std::size_t k, std::size_t group_size = 100,
                                 std::size_t overlap = 10);

/// K groups of `group_size` indices sampled without replacement from [0, n); d_j = 1/K.
std::vector<GroupSpec> gen_random_groups(std::size_t k, std::size_t n, std::size_t group_size,
                                         std::uint64_t seed);

/// One group per node of a complete tree with the given depth and branching;
/// each leaf owns `leaf_width` consecutive indices and a node's group is the
/// union of its leaves. Groups are listed breadth-first; d_j = 1/K.
std::vector<GroupSpec> gen_tree_groups(std::size_t depth, std::size_t branching,
                                       std::size_t leaf_width = 1);
std::size_t tree_dimension(std::size_t depth, std::size_t branching, std::size_t leaf_width = 1);

/// x_j = (-1)^j exp(-(j-1)/100) (1-based j), b = A x + noise with standard
/// normal noise. With normalize_columns, A's columns and b are centered and
/// scaled to unit l2 norm.
GroupLassoInstance gen_group_instance(Eigen::Index m, Eigen::Index n,
                                      std::vector<GroupSpec> groups, double lambda,
                                      std::uint64_t seed, bool normalize_columns = false);

/// Blocks plus the proximal metric used with them.
struct Problem {
  Objective objective;
  DiagonalMetric metric;
};

/// Blocks [quad, l1, tv]; D = diag(A^T A) floored at `floor`. `pcg`
/// configures the quadratic block's inner solver.
Problem make_fused_problem(const FusedLassoInstance& instance,
                           double floor = DiagonalMetric::kDefaultFloor, PcgOptions pcg = {});
/// Blocks [quad, group_1, ..., group_K]; D = (1/(K lambda)) diag(A^T A).
Problem make_group_problem(const GroupLassoInstance& instance,
                           double floor = DiagonalMetric::kDefaultFloor, PcgOptions pcg = {});

/// Writes <dir>/A.mtx and <dir>/instance.json (metadata, rhs, groups).
void save_instance(const std::filesystem::path& dir, const FusedLassoInstance& instance);
void save_instance(const std::filesystem::path& dir, const GroupLassoInstance& instance);

using Instance = std::variant<FusedLassoInstance, GroupLassoInstance>;
/// Reads an instance.json sidecar; the matrix path inside it is relative to the sidecar.
Instance load_instance(const std::filesystem::path& sidecar);

}  // namespace slin
