#include "slin/probgen.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "slin/errors.hpp"
#include "slin/fused_lasso.hpp"
#include "slin/rng.hpp"

namespace slin {

SparseDesignMatrix gen_gaussian_matrix(Eigen::Index m, Eigen::Index n, std::uint64_t seed) {
  if (m < 1 || n < 1) throw ConfigError("gen_gaussian_matrix: dimensions must be positive");
  CounterRng rng(seed, kStreamMatrix);
  Eigen::MatrixXd dense(m, n);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) dense(i, j) = rng.next_normal();
  }
  return SparseDesignMatrix::from_dense(dense);
}

double lasso_tau(const SparseDesignMatrix& a, const Vector& b) {
  return a.multiply_transpose(b).lpNorm<Eigen::Infinity>();
}

FusedLassoInstance gen_fused(Eigen::Index m, Eigen::Index n, double lambda1, double lambda2,
                             std::uint64_t seed) {
  if (!(lambda1 >= 0.0) || !(lambda2 >= 0.0)) {
    throw ConfigError("gen_fused: lambdas must be nonnegative");
  }
  FusedLassoInstance inst;
  inst.matrix = std::make_shared<const SparseDesignMatrix>(gen_gaussian_matrix(m, n, seed));
  CounterRng rng(seed, kStreamRhs);
  inst.rhs = Vector(m);
  for (Eigen::Index i = 0; i < m; ++i) inst.rhs[i] = rng.next_normal();
  inst.lambda1 = lambda1;
  inst.lambda2 = lambda2;
  inst.seed = seed;
  inst.tau = lasso_tau(*inst.matrix, inst.rhs);
  return inst;
}

FusedLassoInstance gen_fused_tau_scaled(Eigen::Index m, Eigen::Index n, double ratio,
                                        std::uint64_t seed) {
  FusedLassoInstance inst = gen_fused(m, n, 0.0, 0.0, seed);
  inst.lambda1 = ratio * inst.tau;
  inst.lambda2 = ratio * inst.tau;
  return inst;
}

std::size_t structured_dimension(std::size_t k, std::size_t group_size, std::size_t overlap) {
  return (group_size - overlap) * k + overlap;
}

std::vector<GroupSpec> gen_structured_groups(std::size_t k, std::size_t group_size,
                                             std::size_t overlap) {
  if (k < 1) throw ConfigError("gen_structured_groups: K must be at least 1");
  if (group_size < 1 || overlap >= group_size) {
    throw ConfigError("gen_structured_groups: need 0 <= overlap < group_size");
  }
  const std::size_t stride = group_size - overlap;
  std::vector<GroupSpec> groups(k);
  for (std::size_t g = 0; g < k; ++g) {
    groups[g].weight = 1.0 / static_cast<double>(k);
    groups[g].indices.resize(group_size);
    std::iota(groups[g].indices.begin(), groups[g].indices.end(), g * stride);
  }
  return groups;
}

std::vector<GroupSpec> gen_random_groups(std::size_t k, std::size_t n, std::size_t group_size,
                                         std::uint64_t seed) {
  if (k < 1) throw ConfigError("gen_random_groups: K must be at least 1");
  if (group_size < 1 || group_size > n) {
    throw ConfigError("gen_random_groups: need 1 <= group_size <= n");
  }
  CounterRng rng(seed, kStreamGroups);
  std::vector<std::size_t> pool(n);
  std::vector<GroupSpec> groups(k);
  for (auto& g : groups) {
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    // partial Fisher-Yates: the first group_size slots form the sample
    for (std::size_t i = 0; i < group_size; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(rng.next_below(n - i));
      std::swap(pool[i], pool[j]);
    }
    g.indices.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(group_size));
    std::sort(g.indices.begin(), g.indices.end());
    g.weight = 1.0 / static_cast<double>(k);
  }
  return groups;
}

std::size_t tree_dimension(std::size_t depth, std::size_t branching, std::size_t leaf_width) {
  std::size_t leaves = 1;
  for (std::size_t l = 1; l < depth; ++l) leaves *= branching;
  return leaves * leaf_width;
}

std::vector<GroupSpec> gen_tree_groups(std::size_t depth, std::size_t branching,
                                       std::size_t leaf_width) {
  if (depth < 1 || branching < 1 || leaf_width < 1) {
    throw ConfigError("gen_tree_groups: depth, branching and leaf_width must be at least 1");
  }
  const std::size_t n = tree_dimension(depth, branching, leaf_width);
  std::vector<GroupSpec> groups;
  std::size_t nodes_at_level = 1;
  std::size_t span = n;  // indices covered by one node at this level
  for (std::size_t level = 0; level < depth; ++level) {
    for (std::size_t p = 0; p < nodes_at_level; ++p) {
      GroupSpec g;
      g.indices.resize(span);
      std::iota(g.indices.begin(), g.indices.end(), p * span);
      groups.push_back(std::move(g));
    }
    nodes_at_level *= branching;
    span /= branching;
  }
  for (auto& g : groups) g.weight = 1.0 / static_cast<double>(groups.size());
  return groups;
}

GroupLassoInstance gen_group_instance(Eigen::Index m, Eigen::Index n,
                                      std::vector<GroupSpec> groups, double lambda,
                                      std::uint64_t seed, bool normalize_columns) {
  if (!(lambda > 0.0)) throw ConfigError("gen_group_instance: lambda must be positive");
  if (groups.empty()) throw ConfigError("gen_group_instance: need at least one group");
  for (const auto& g : groups) g.validate(static_cast<std::size_t>(n));

  Eigen::MatrixXd a = gen_gaussian_matrix(m, n, seed).to_dense();
  Vector x(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    // 1-based j = i + 1: (-1)^j exp(-(j - 1)/100)
    x[i] = ((i + 1) % 2 == 0 ? 1.0 : -1.0) * std::exp(-static_cast<double>(i) / 100.0);
  }
  CounterRng noise(seed, kStreamNoise);
  Vector b = a * x;
  for (Eigen::Index i = 0; i < m; ++i) b[i] += noise.next_normal();

  if (normalize_columns) {
    for (Eigen::Index j = 0; j < n; ++j) {
      a.col(j).array() -= a.col(j).mean();
      const double norm = a.col(j).norm();
      if (norm > 0.0) a.col(j) /= norm;
    }
    b.array() -= b.mean();
    const double bn = b.norm();
    if (bn > 0.0) b /= bn;
  }

  GroupLassoInstance inst;
  inst.matrix = std::make_shared<const SparseDesignMatrix>(SparseDesignMatrix::from_dense(a));
  inst.rhs = std::move(b);
  inst.lambda = lambda;
  inst.groups = std::move(groups);
  inst.true_x = std::move(x);
  inst.seed = seed;
  return inst;
}

Problem make_fused_problem(const FusedLassoInstance& instance, double floor, PcgOptions pcg) {
  Problem p{Objective(instance.matrix->cols()),
            DiagonalMetric(instance.matrix->column_sq_norms(), floor)};
  p.objective.add(std::make_unique<QuadLossBlock>(instance.matrix, instance.rhs, 1.0, pcg));
  p.objective.add(std::make_unique<L1Block>(instance.lambda1));
  p.objective.add(std::make_unique<TVBlock>(instance.lambda2));
  return p;
}

Problem make_group_problem(const GroupLassoInstance& instance, double floor, PcgOptions pcg) {
  const double scale = instance.loss_scale();
  const auto n = static_cast<std::size_t>(instance.matrix->cols());
  Problem p{Objective(instance.matrix->cols()),
            DiagonalMetric(scale * instance.matrix->column_sq_norms(), floor)};
  p.objective.add(std::make_unique<QuadLossBlock>(instance.matrix, instance.rhs, scale, pcg));
  for (const auto& g : instance.groups) p.objective.add(std::make_unique<GroupBlock>(g, n));
  return p;
}

namespace {

std::vector<double> to_std(const Vector& v) { return {v.data(), v.data() + v.size()}; }

Vector from_std(const std::vector<double>& v) {
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

}  // namespace

void save_instance(const std::filesystem::path& dir, const FusedLassoInstance& instance) {
  std::filesystem::create_directories(dir);
  write_matrix_market(dir / "A.mtx", *instance.matrix);
  nlohmann::json j;
  j["problem"] = "fused";
  j["matrix"] = "A.mtx";
  j["m"] = instance.matrix->rows();
  j["n"] = instance.matrix->cols();
  j["seed"] = instance.seed;
  j["lambda1"] = instance.lambda1;
  j["lambda2"] = instance.lambda2;
  j["tau"] = instance.tau;
  j["rhs"] = to_std(instance.rhs);
  write_json(dir / "instance.json", j);
}

void save_instance(const std::filesystem::path& dir, const GroupLassoInstance& instance) {
  std::filesystem::create_directories(dir);
  write_matrix_market(dir / "A.mtx", *instance.matrix);
  nlohmann::json j;
  j["problem"] = "group";
  j["matrix"] = "A.mtx";
  j["m"] = instance.matrix->rows();
  j["n"] = instance.matrix->cols();
  j["seed"] = instance.seed;
  j["lambda"] = instance.lambda;
  j["groups"] = instance.groups;
  j["true_x"] = to_std(instance.true_x);
  j["rhs"] = to_std(instance.rhs);
  write_json(dir / "instance.json", j);
}

Instance load_instance(const std::filesystem::path& sidecar) {
  std::ifstream in(sidecar);
  if (!in) throw std::runtime_error("cannot open " + sidecar.string());
  const nlohmann::json j = nlohmann::json::parse(in);
  auto matrix = std::make_shared<const SparseDesignMatrix>(
      read_matrix_market(sidecar.parent_path() / j.at("matrix").get<std::string>()));
  Vector rhs = from_std(j.at("rhs").get<std::vector<double>>());
  require_same_size(static_cast<std::size_t>(rhs.size()),
                    static_cast<std::size_t>(matrix->rows()), "instance rhs");

  const auto problem = j.at("problem").get<std::string>();
  if (problem == "fused") {
    FusedLassoInstance inst;
    inst.matrix = std::move(matrix);
    inst.rhs = std::move(rhs);
    inst.lambda1 = j.at("lambda1").get<double>();
    inst.lambda2 = j.at("lambda2").get<double>();
    inst.seed = j.value("seed", std::uint64_t{0});
    inst.tau = lasso_tau(*inst.matrix, inst.rhs);
    return inst;
  }
  if (problem == "group") {
    GroupLassoInstance inst;
    inst.matrix = std::move(matrix);
    inst.rhs = std::move(rhs);
    inst.lambda = j.at("lambda").get<double>();
    inst.groups = j.at("groups").get<std::vector<GroupSpec>>();
    for (const auto& g : inst.groups) g.validate(static_cast<std::size_t>(inst.matrix->cols()));
    if (j.contains("true_x")) inst.true_x = from_std(j.at("true_x").get<std::vector<double>>());
    inst.seed = j.value("seed", std::uint64_t{0});
    return inst;
  }
  throw ConfigError("instance.json: unknown problem '" + problem + "'");
}

}  // namespace slin
