#include "slin/engine.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "slin/errors.hpp"

namespace slin {

Linearization Linearization::at(const Vector& point, double value, Vector subgradient) {
  require_same_size(static_cast<std::size_t>(point.size()),
                    static_cast<std::size_t>(subgradient.size()), "Linearization::at");
  Linearization lin;
  lin.intercept = value - subgradient.dot(point);
  lin.slope = std::move(subgradient);
  return lin;
}

AggregateOffset aggregate_offset(const LinearizationSlots& slots, std::size_t active,
                                 Eigen::Index dimension) {
  AggregateOffset out{Vector::Zero(dimension), 0.0};
  for (std::size_t i = 0; i < slots.size(); ++i) {
    if (i == active) continue;
    if (!slots[i]) {
      throw ConfigError("aggregate_offset: linearization slot " + std::to_string(i) +
                        " is empty");
    }
    require_same_size(static_cast<std::size_t>(slots[i]->slope.size()),
                      static_cast<std::size_t>(dimension), "aggregate_offset");
    out.slope += slots[i]->slope;
    out.constant += slots[i]->intercept;
  }
  return out;
}

Vector implied_subgradient(const Vector& s, const Vector& z, const Vector& center,
                           const DiagonalMetric& metric) {
  require_same_size(static_cast<std::size_t>(s.size()), static_cast<std::size_t>(z.size()),
                    "implied_subgradient");
  require_same_size(static_cast<std::size_t>(center.size()), static_cast<std::size_t>(z.size()),
                    "implied_subgradient");
  return -s - metric.apply(z - center);
}

double model_value(double active_value_at_z, const LinearizationSlots& slots,
                   std::size_t active, const Vector& z) {
  const auto offset = aggregate_offset(slots, active, z.size());
  return active_value_at_z + offset.constant + offset.slope.dot(z);
}

double model_value(const BlockOracle& block, const LinearizationSlots& slots, std::size_t active,
                   const Vector& z) {
  return model_value(block.value(z), slots, active, z);
}

std::string_view to_string(StepKind kind) {
  switch (kind) {
    case StepKind::descent: return "descent";
    case StepKind::null: return "null";
    case StepKind::stop: return "stop";
  }
  return "?";
}

StepKind descent_test(double objective_at_center, double objective_at_trial, double gap,
                      double beta) {
  return objective_at_trial <= objective_at_center - beta * gap ? StepKind::descent
                                                                : StepKind::null;
}

std::size_t select_next_block(std::span<const double> block_values_at_z,
                              const LinearizationSlots& slots, std::size_t active,
                              const Vector& z) {
  if (slots.size() < 2) throw ConfigError("select_next_block: need at least two blocks");
  require_same_size(block_values_at_z.size(), slots.size(), "select_next_block");
  std::size_t best = kNoBlock;
  double best_gap = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < slots.size(); ++i) {
    if (i == active) continue;
    if (!slots[i]) {
      throw ConfigError("select_next_block: linearization slot " + std::to_string(i) +
                        " is empty");
    }
    const double gap = block_values_at_z[i] - slots[i]->evaluate(z);
    if (gap > best_gap) {  // strict: ties keep the lower index
      best_gap = gap;
      best = i;
    }
  }
  return best;
}

std::size_t select_next_block(const Objective& objective, const LinearizationSlots& slots,
                              std::size_t active, const Vector& z) {
  const auto values = objective.block_values(z);
  return select_next_block(values, slots, active, z);
}

std::string_view to_string(Variant variant) {
  switch (variant) {
    case Variant::slin: return "slin";
    case Variant::alin: return "alin";
    case Variant::douglas_rachford: return "dr";
    case Variant::peaceman_rachford: return "pr";
  }
  return "?";
}

std::optional<Variant> parse_variant(std::string_view name) {
  if (name == "slin" || name == "selective") return Variant::slin;
  if (name == "alin" || name == "alternating") return Variant::alin;
  if (name == "dr" || name == "douglas_rachford") return Variant::douglas_rachford;
  if (name == "pr" || name == "peaceman_rachford") return Variant::peaceman_rachford;
  return std::nullopt;
}

std::string_view to_string(Termination t) {
  switch (t) {
    case Termination::epsilon: return "epsilon";
    case Termination::max_iter: return "max_iter";
    case Termination::aborted: return "aborted";
  }
  return "?";
}

void EngineConfig::validate(std::size_t num_blocks, Eigen::Index dimension) const {
  if (!(beta > 0.0 && beta < 1.0)) throw ConfigError("beta must lie in (0, 1)");
  if (!(epsilon > 0.0)) throw ConfigError("epsilon must be positive");
  if (max_iter < 1) throw ConfigError("max_iter must be at least 1");
  if (num_blocks < 2) throw ConfigError("the engine requires at least two blocks");
  if (initial_block >= num_blocks) throw ConfigError("initial_block out of range");
  if (!(gap_tolerance >= 0.0)) throw ConfigError("gap_tolerance must be nonnegative");
  if (metric.size() != dimension) {
    throw ConfigError("metric dimension " + std::to_string(metric.size()) +
                      " does not match problem dimension " + std::to_string(dimension));
  }
}

namespace {

using Clock = std::chrono::steady_clock;

double millis_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

bool moves_center(Variant variant, StepKind test_result, int k, std::size_t num_blocks) {
  switch (variant) {
    case Variant::slin:
    case Variant::alin: return test_result == StepKind::descent;
    case Variant::douglas_rachford: return k % static_cast<int>(num_blocks) == 0;
    case Variant::peaceman_rachford: return true;
  }
  return false;
}

}  // namespace

SolveReport run_solver(Variant variant, Objective& objective, const EngineConfig& config,
                       const Vector& x1) {
  const std::size_t num_blocks = objective.size();
  const Eigen::Index n = objective.dimension();
  config.validate(num_blocks, n);
  require_same_size(static_cast<std::size_t>(x1.size()), static_cast<std::size_t>(n),
                    "run_solver initial point");

  const auto start = Clock::now();
  const DiagonalMetric& metric = config.metric;

  SolveReport report;
  report.variant = variant;

  Vector center = x1;
  double f_center = objective.value(center);

  std::size_t active = config.initial_block;
  LinearizationSlots slots(num_blocks);
  for (std::size_t i = 0; i < num_blocks; ++i) {
    if (i == active) continue;
    const BlockOracle& b = objective.block(i);
    slots[i] = Linearization::at(x1, b.value(x1), b.subgradient(x1));
  }

  auto abort_with = [&](std::string message) {
    report.terminated_by = Termination::aborted;
    report.diagnostic = std::move(message);
  };

  for (int k = 1; k <= config.max_iter; ++k) {
    const AggregateOffset offset = aggregate_offset(slots, active, n);

    ProxResult prox;
    try {
      prox = objective.block(active).prox_solve(offset.slope, center, metric);
    } catch (const std::exception& e) {
      abort_with("iteration " + std::to_string(k) + ": block " + std::to_string(active) + " (" +
                 objective.block(active).name() + ") prox_solve failed: " + e.what());
      break;
    }
    if (prox.point.size() != n || !prox.point.allFinite()) {
      abort_with("iteration " + std::to_string(k) + ": block " + std::to_string(active) +
                 " returned an invalid trial point");
      break;
    }
    if (!prox.converged) ++report.inexact_subsolves;
    const Vector& trial = prox.point;

    const std::vector<double> values = objective.block_values(trial);
    const double active_value = values[active];
    const double model = active_value + offset.constant + offset.slope.dot(trial);
    const double step_norm_sq = d_norm_sq(trial - center, metric);
    const double gap = stopping_gap(f_center, model);
    const double f_trial = std::accumulate(values.begin(), values.end(), 0.0);
    const double scale = std::max(1.0, std::abs(f_center));

    if (!std::isfinite(gap) || gap < -config.gap_tolerance * scale) {
      abort_with("iteration " + std::to_string(k) + ": negative model gap " +
                 std::to_string(gap) + " (inexact block solve in " +
                 objective.block(active).name() + ")");
      break;
    }

    IterationRecord rec;
    rec.k = k;
    rec.block = active;
    rec.objective = f_center;
    rec.gap = gap;
    rec.eta = model + 0.5 * step_norm_sq;
    rec.trial_objective = f_trial;
    rec.step_norm_sq = step_norm_sq;

    const double threshold = config.relative_epsilon ? config.epsilon * scale : config.epsilon;
    if (gap <= threshold) {
      rec.step = StepKind::stop;
      rec.millis = millis_since(start);
      ++report.iterations;
      report.terminated_by = Termination::epsilon;
      if (config.observer) config.observer(IterationView{rec, center, trial});
      if (config.trace_level == TraceLevel::full) report.records.push_back(rec);
      break;
    }

    const StepKind test = descent_test(f_center, f_trial, gap, config.beta);
    const bool move = moves_center(variant, test, k, num_blocks);

    const Vector g = implied_subgradient(offset.slope, trial, center, metric);
    slots[active] = Linearization::at(trial, active_value, g);

    const std::size_t next = variant == Variant::slin
                                 ? select_next_block(values, slots, active, trial)
                                 : (active + 1) % num_blocks;
    rec.next_block = next;
    rec.step = move ? StepKind::descent : StepKind::null;
    rec.millis = millis_since(start);
    ++report.iterations;
    if (move) {
      ++report.descent_steps;
    } else {
      ++report.null_steps;
    }
    if (config.observer) config.observer(IterationView{rec, center, trial});
    if (config.trace_level == TraceLevel::full) report.records.push_back(rec);

    if (move) {
      center = trial;
      f_center = f_trial;
    }
    slots[next].reset();
    active = next;
  }

  report.x = std::move(center);
  report.objective = f_center;
  report.millis = millis_since(start);
  return report;
}

}  // namespace slin
