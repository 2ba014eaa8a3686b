#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "slin/engine.hpp"
#include "slin/probgen.hpp"

namespace slin::harness {

enum class ProblemKind { fused, group_structured, group_random, group_tree };

std::string_view to_string(ProblemKind kind);
std::optional<ProblemKind> parse_problem(std::string_view name);

struct ExperimentSpec {
  ProblemKind problem = ProblemKind::fused;
  // fused and group-random dimensions; group-structured and group-tree
  // derive n from their group layout.
  int m = 50;
  int n = 30;
  // fused: explicit lambdas unless lambda_ratio is set (then lambda1 = lambda2 = ratio * tau)
  double lambda1 = 1.0;
  double lambda2 = 1.0;
  std::optional<double> lambda_ratio;
  // group problems; lambda defaults to K / 5
  int k_groups = 5;
  std::optional<double> lambda;
  int group_size = 100;
  int overlap = 10;
  int tree_depth = 3;
  int tree_branching = 2;
  int leaf_width = 1;
  bool normalize = false;

  std::vector<Variant> solvers{Variant::slin};
  std::vector<std::uint64_t> seeds{1};
  double epsilon = 1e-7;
  bool relative_epsilon = false;
  int max_iter = 1000;
  double beta = 0.5;
  std::filesystem::path out = "out";
  int jobs = 1;
  /// Fill the millis columns of trace and summary CSVs. Off by default so
  /// CSVs are byte-identical across reruns; timings always go to the manifest.
  bool timing_in_csv = false;
  bool convergence_csv = true;

  /// Throws ConfigError.
  void validate() const;
  double group_lambda() const;
};

nlohmann::json to_json(const ExperimentSpec& spec);

/// Size limits under which reference_min is run for relative errors.
struct OracleCap {
  int max_n = 200;
  int max_m = 500;

  bool admits(Eigen::Index m, Eigen::Index n) const { return n <= max_n && m <= max_m; }
  /// Defaults, overridden by SLIN_ORACLE_CAP ("N" or "N,M").
  static OracleCap from_environment();
};

Instance generate_instance(const ExperimentSpec& spec, std::uint64_t seed);
Problem build_problem(const Instance& instance, PcgOptions pcg = {});
/// Problem parameters needed to regenerate the instance bit-exactly.
nlohmann::json describe_instance(const Instance& instance);

struct RunResult {
  Variant solver = Variant::slin;
  std::uint64_t seed = 0;
  SolveReport report;
  std::optional<double> relative_error;
};

struct SummaryRow {
  Variant solver = Variant::slin;
  int runs = 0;
  double mean_iterations = 0.0;
  double std_iterations = 0.0;
  double mean_millis = 0.0;
  double std_millis = 0.0;
  std::optional<double> mean_relative_error;
  std::optional<double> std_relative_error;
  int maxiter_count = 0;
  int abort_count = 0;
};

struct ExperimentResult {
  std::vector<RunResult> runs;  // ordered by (solver as given, seed as given)
  std::vector<SummaryRow> summary;
  std::vector<std::optional<double>> optimal_values;  // per seed
  bool any_aborted() const;
};

/// Sample mean and standard deviation (n - 1 denominator; 0 for one value).
std::pair<double, double> mean_std(const std::vector<double>& values);

/// (F_solver - F*) / max(1, |F*|)
double relative_error(double objective, double optimum);

std::vector<SummaryRow> summarize(const std::vector<RunResult>& runs,
                                  const std::vector<Variant>& solvers);

std::string trace_file_name(Variant solver, std::uint64_t seed);

void write_trace_csv(const std::filesystem::path& path, const SolveReport& report,
                     bool with_timing);
void write_summary_csv(const std::filesystem::path& path, const std::vector<SummaryRow>& rows,
                       bool with_timing);

/// Long-format (solver, seed, k, F) rows sorted by (solver, seed, k).
void emit_convergence(const std::filesystem::path& path, const std::vector<RunResult>& runs);

/// Generates every instance, runs every (seed, solver) pair on up to
/// spec.jobs threads, and writes under spec.out:
///   traces/<solver>_seed<seed>.csv, summary.csv, convergence.csv, manifest.json.
/// Throws ConfigError on an invalid spec and std::runtime_error when the
/// output directory cannot be written. Solver aborts are recorded, not thrown.
ExperimentResult run_experiment(const ExperimentSpec& spec, OracleCap cap = OracleCap::from_environment());

/// Shortest round-trip decimal form, as written to every CSV.
std::string format_double(double v);

}  // namespace slin::harness
