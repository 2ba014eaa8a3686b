#pragma once

#include <cstddef>
#include <vector>

#include <nlohmann/json.hpp>

#include "slin/block.hpp"

namespace slin {

/// Index set G (0-based, sorted, duplicate-free) with weight d > 0.
struct GroupSpec {
  std::vector<std::size_t> indices;
  double weight = 1.0;

  /// Throws ConfigError unless nonempty, sorted, duplicate-free, in [0, n)
  /// and weight > 0.
  void validate(std::size_t dimension) const;
};

/// JSON form {"weight": d, "indices": [0-based ...]}.
void to_json(nlohmann::json& j, const GroupSpec& spec);
void from_json(const nlohmann::json& j, GroupSpec& spec);

/// d ||x_G||_2
double group_value(const Vector& x, const GroupSpec& spec);

/// d x_G / ||x_G||_2 on G (zero elsewhere); the zero vector when x_G = 0.
Vector group_subgradient(const Vector& x, const GroupSpec& spec);

struct GroupProxResult {
  Vector x;
  /// d / ||x_G||; 0 when the group is zeroed.
  double kappa = 0.0;
  bool zero_group = false;
  int bisection_steps = 0;
};

/// Left side of the kappa equation, sum_i (w_i / (1 + D_ii / kappa))^2 with
/// w_i = D_ii center_i - s_i over i in G. Increasing in kappa.
double kappa_equation_lhs(double kappa, const Vector& weights, const Vector& numerators);

/// argmin_x d ||x_G||_2 + <s, x> + 1/2 ||x - center||_D^2.
///
/// Outside G the solution is center - D^{-1} s. Inside G it is zero when
/// sum (D_ii center_i - s_i)^2 <= d^2; otherwise kappa solves the kappa
/// equation (bisection) and x_i = (D_ii center_i - s_i) / (kappa + D_ii).
GroupProxResult group_prox(const Vector& s, const Vector& center, const DiagonalMetric& metric,
                           const GroupSpec& spec);

class GroupBlock final : public BlockOracle {
 public:
  GroupBlock(GroupSpec spec, std::size_t dimension);

  std::string name() const override { return "group"; }
  double value(const Vector& x) const override { return group_value(x, spec_); }
  Vector subgradient(const Vector& x) const override { return group_subgradient(x, spec_); }
  ProxResult prox_solve(const Vector& s, const Vector& center,
                        const DiagonalMetric& metric) override;

  const GroupSpec& spec() const { return spec_; }

 private:
  GroupSpec spec_;
};

}  // namespace slin
