#include "slin/group_lasso.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "slin/errors.hpp"

namespace slin {

void GroupSpec::validate(std::size_t dimension) const {
  if (indices.empty()) throw ConfigError("GroupSpec: empty index set");
  if (!(weight > 0.0) || !std::isfinite(weight)) {
    throw ConfigError("GroupSpec: weight must be positive");
  }
  for (std::size_t k = 0; k < indices.size(); ++k) {
    if (indices[k] >= dimension) {
      throw ConfigError("GroupSpec: index " + std::to_string(indices[k]) +
                        " out of range for dimension " + std::to_string(dimension));
    }
    if (k > 0 && indices[k] <= indices[k - 1]) {
      throw ConfigError("GroupSpec: indices must be sorted and duplicate-free");
    }
  }
}

void to_json(nlohmann::json& j, const GroupSpec& spec) {
  j = nlohmann::json{{"weight", spec.weight}, {"indices", spec.indices}};
}

void from_json(const nlohmann::json& j, GroupSpec& spec) {
  j.at("weight").get_to(spec.weight);
  j.at("indices").get_to(spec.indices);
}

double group_value(const Vector& x, const GroupSpec& spec) {
  double sq = 0.0;
  for (std::size_t i : spec.indices) sq += x[static_cast<Eigen::Index>(i)] * x[static_cast<Eigen::Index>(i)];
  return spec.weight * std::sqrt(sq);
}

Vector group_subgradient(const Vector& x, const GroupSpec& spec) {
  Vector g = Vector::Zero(x.size());
  double sq = 0.0;
  for (std::size_t i : spec.indices) sq += x[static_cast<Eigen::Index>(i)] * x[static_cast<Eigen::Index>(i)];
  if (sq == 0.0) return g;
  const double factor = spec.weight / std::sqrt(sq);
  for (std::size_t i : spec.indices) {
    const auto ii = static_cast<Eigen::Index>(i);
    g[ii] = factor * x[ii];
  }
  return g;
}

double kappa_equation_lhs(double kappa, const Vector& weights, const Vector& numerators) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < weights.size(); ++i) {
    const double t = numerators[i] * kappa / (kappa + weights[i]);
    total += t * t;
  }
  return total;
}

GroupProxResult group_prox(const Vector& s, const Vector& center, const DiagonalMetric& metric,
                           const GroupSpec& spec) {
  const Eigen::Index n = center.size();
  require_same_size(static_cast<std::size_t>(s.size()), static_cast<std::size_t>(n), "group_prox");
  require_same_size(static_cast<std::size_t>(metric.size()), static_cast<std::size_t>(n),
                    "group_prox");
  spec.validate(static_cast<std::size_t>(n));

  GroupProxResult result;
  result.x = center - metric.apply_inverse(s);

  const auto g = static_cast<Eigen::Index>(spec.indices.size());
  Vector weights(g), numerators(g);
  for (Eigen::Index k = 0; k < g; ++k) {
    const auto i = static_cast<Eigen::Index>(spec.indices[static_cast<std::size_t>(k)]);
    weights[k] = metric[i];
    numerators[k] = metric[i] * center[i] - s[i];
  }

  const double target = spec.weight * spec.weight;
  if (numerators.squaredNorm() <= target) {
    for (std::size_t i : spec.indices) result.x[static_cast<Eigen::Index>(i)] = 0.0;
    result.zero_group = true;
    return result;
  }

  double lo = 1e-12;
  double hi = 1.0;
  double f_lo = kappa_equation_lhs(lo, weights, numerators);
  double f_hi = kappa_equation_lhs(hi, weights, numerators);
  while (f_hi <= target) {
    hi *= 10.0;
    const double next = kappa_equation_lhs(hi, weights, numerators);
    if (!(next >= f_hi) || !std::isfinite(hi)) {
      throw NumericalError("group_prox: failed to bracket the kappa equation");
    }
    f_hi = next;
  }
  if (!(f_lo <= f_hi)) throw NumericalError("group_prox: kappa equation not increasing");

  int steps = 0;
  if (f_lo >= target) {
    hi = lo;  // root below the lower bracket end; clamp
  } else {
    while (steps < 200 && hi - lo > 1e-12 * std::max(1.0, lo)) {
      const double mid = 0.5 * (lo + hi);
      if (kappa_equation_lhs(mid, weights, numerators) < target) {
        lo = mid;
      } else {
        hi = mid;
      }
      ++steps;
    }
  }
  const double kappa = 0.5 * (lo + hi);
  for (Eigen::Index k = 0; k < g; ++k) {
    const auto i = static_cast<Eigen::Index>(spec.indices[static_cast<std::size_t>(k)]);
    result.x[i] = numerators[k] / (kappa + weights[k]);
  }
  result.kappa = kappa;
  result.bisection_steps = steps;
  return result;
}

GroupBlock::GroupBlock(GroupSpec spec, std::size_t dimension) : spec_(std::move(spec)) {
  spec_.validate(dimension);
}

ProxResult GroupBlock::prox_solve(const Vector& s, const Vector& center,
                                  const DiagonalMetric& metric) {
  auto r = group_prox(s, center, metric, spec_);
  return ProxResult{std::move(r.x), true, r.bisection_steps};
}

}  // namespace slin
