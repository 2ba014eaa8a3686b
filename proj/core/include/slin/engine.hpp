#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "slin/block.hpp"
#include "slin/metric.hpp"

namespace slin {

/// Affine minorant x -> intercept + <slope, x> of one block. Only the
/// intercept f_i(z) - <g_i, z> is kept; the linearization point is not stored.
struct Linearization {
  Vector slope;
  double intercept = 0.0;

  double evaluate(const Vector& x) const { return intercept + slope.dot(x); }

  /// Minorant through (point, value) with the given subgradient.
  static Linearization at(const Vector& point, double value, Vector subgradient);
};

/// One slot per block; the active block's slot is empty.
using LinearizationSlots = std::vector<std::optional<Linearization>>;

struct AggregateOffset {
  Vector slope;           // s = sum_{i != j} g_i
  double constant = 0.0;  // c = sum_{i != j} a_i
};

/// Sum of all stored minorants except `active`. Throws ConfigError if a
/// slot i != active is empty.
AggregateOffset aggregate_offset(const LinearizationSlots& slots, std::size_t active,
                                 Eigen::Index dimension);

/// -s - D (z - center): the subgradient of the active block at z that
/// appears in the optimality condition of its proximal subproblem.
Vector implied_subgradient(const Vector& s, const Vector& z, const Vector& center,
                           const DiagonalMetric& metric);

/// f_j(z) + sum_{i != j} minorant_i(z).
double model_value(const BlockOracle& block, const LinearizationSlots& slots, std::size_t active,
                   const Vector& z);
double model_value(double active_value_at_z, const LinearizationSlots& slots,
                   std::size_t active, const Vector& z);

/// v = F(center) - model(trial).
inline double stopping_gap(double objective_at_center, double model_at_trial) {
  return objective_at_center - model_at_trial;
}

enum class StepKind { descent, null, stop };
std::string_view to_string(StepKind kind);

/// Descent iff F(trial) <= F(center) - beta * v.
StepKind descent_test(double objective_at_center, double objective_at_trial, double gap,
                      double beta);

/// argmax_{i != active} f_i(z) - minorant_i(z); ties go to the lowest index.
std::size_t select_next_block(std::span<const double> block_values_at_z,
                              const LinearizationSlots& slots, std::size_t active,
                              const Vector& z);
std::size_t select_next_block(const Objective& objective, const LinearizationSlots& slots,
                              std::size_t active, const Vector& z);

/// Outer-loop variants sharing the same subproblem machinery.
enum class Variant {
  slin,               // selective block choice + descent test
  alin,               // fixed cyclic order + descent test
  douglas_rachford,   // fixed order, center moves after each full cycle
  peaceman_rachford,  // fixed order, center moves after every block
};
std::string_view to_string(Variant variant);
/// Accepts "slin", "alin", "dr", "pr" and the long names above.
std::optional<Variant> parse_variant(std::string_view name);

enum class TraceLevel { summary, full };
enum class Termination { epsilon, max_iter, aborted };
std::string_view to_string(Termination t);

inline constexpr std::size_t kNoBlock = std::numeric_limits<std::size_t>::max();

struct IterationRecord {
  int k = 0;
  std::size_t block = 0;
  StepKind step = StepKind::null;
  double objective = 0.0;        // F(x^k)
  double gap = 0.0;              // v_k
  double eta = 0.0;              // subproblem optimal value
  double trial_objective = 0.0;  // F(z^k)
  std::size_t next_block = kNoBlock;
  double millis = 0.0;           // wall time since solve start
  double step_norm_sq = 0.0;     // ||z^k - x^k||_D^2
};

/// Read-only view handed to an observer after each recorded iteration.
struct IterationView {
  const IterationRecord& record;
  const Vector& center;
  const Vector& trial;
};
using IterationObserver = std::function<void(const IterationView&)>;

struct EngineConfig {
  double beta = 0.5;
  double epsilon = 1e-7;
  /// Stop when v <= epsilon * max(1, |F(x^k)|) instead of v <= epsilon.
  bool relative_epsilon = false;
  DiagonalMetric metric;
  int max_iter = 1000;
  std::size_t initial_block = 0;
  TraceLevel trace_level = TraceLevel::full;
  /// v < -gap_tolerance * max(1, |F(x^k)|) aborts the run.
  double gap_tolerance = 1e-12;
  IterationObserver observer;

  /// Throws ConfigError on out-of-range values or fewer than two blocks.
  void validate(std::size_t num_blocks, Eigen::Index dimension) const;
};

struct SolveReport {
  Variant variant = Variant::slin;
  std::vector<IterationRecord> records;
  Vector x;
  double objective = 0.0;
  int iterations = 0;
  int descent_steps = 0;
  int null_steps = 0;
  Termination terminated_by = Termination::max_iter;
  std::string diagnostic;
  /// Block solves whose inner solver reported non-convergence.
  int inexact_subsolves = 0;
  double millis = 0.0;
};

SolveReport run_solver(Variant variant, Objective& objective, const EngineConfig& config,
                       const Vector& x1);

inline SolveReport run_slin(Objective& f, const EngineConfig& c, const Vector& x1) {
  return run_solver(Variant::slin, f, c, x1);
}
inline SolveReport run_fixed_order_alin(Objective& f, const EngineConfig& c, const Vector& x1) {
  return run_solver(Variant::alin, f, c, x1);
}
inline SolveReport run_cyclic_splitting(Objective& f, const EngineConfig& c, const Vector& x1) {
  return run_solver(Variant::douglas_rachford, f, c, x1);
}
inline SolveReport run_per_block_splitting(Objective& f, const EngineConfig& c,
                                           const Vector& x1) {
  return run_solver(Variant::peaceman_rachford, f, c, x1);
}

}  // namespace slin
