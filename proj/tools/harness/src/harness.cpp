#include "slin/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <thread>

#include "slin/errors.hpp"
#include "slin/oracle.hpp"
#include "slin/version.hpp"

namespace slin::harness {

namespace fs = std::filesystem;

std::string_view to_string(ProblemKind kind) {
  switch (kind) {
    case ProblemKind::fused: return "fused";
    case ProblemKind::group_structured: return "group-structured";
    case ProblemKind::group_random: return "group-random";
    case ProblemKind::group_tree: return "group-tree";
  }
  return "unknown";
}

std::optional<ProblemKind> parse_problem(std::string_view name) {
  for (auto kind : {ProblemKind::fused, ProblemKind::group_structured, ProblemKind::group_random,
                    ProblemKind::group_tree}) {
    if (name == to_string(kind)) return kind;
  }
  return std::nullopt;
}

void ExperimentSpec::validate() const {
  if (solvers.empty()) throw ConfigError("at least one solver is required");
  if (std::set<Variant>(solvers.begin(), solvers.end()).size() != solvers.size()) {
    throw ConfigError("solvers must be distinct");
  }
  if (seeds.empty()) throw ConfigError("at least one seed is required");
  if (std::set<std::uint64_t>(seeds.begin(), seeds.end()).size() != seeds.size()) {
    throw ConfigError("seeds must be distinct");
  }
  if (!(beta > 0.0 && beta < 1.0)) throw ConfigError("beta must lie in (0, 1)");
  if (!(epsilon > 0.0)) throw ConfigError("eps must be positive");
  if (max_iter < 1) throw ConfigError("max-iter must be at least 1");
  if (jobs < 1) throw ConfigError("jobs must be at least 1");
  if (m < 1) throw ConfigError("m must be at least 1");
  switch (problem) {
    case ProblemKind::fused:
      if (n < 2) throw ConfigError("fused problems need n >= 2");
      if (lambda_ratio) {
        if (!(*lambda_ratio >= 0.0)) throw ConfigError("lambda ratio must be nonnegative");
      } else if (!(lambda1 >= 0.0) || !(lambda2 >= 0.0)) {
        throw ConfigError("lambda1 and lambda2 must be nonnegative");
      }
      break;
    case ProblemKind::group_structured:
      if (k_groups < 1) throw ConfigError("k-groups must be at least 1");
      if (group_size < 1 || overlap < 0 || overlap >= group_size) {
        throw ConfigError("need 0 <= overlap < group-size");
      }
      break;
    case ProblemKind::group_random:
      if (k_groups < 1) throw ConfigError("k-groups must be at least 1");
      if (group_size < 1 || group_size > n) throw ConfigError("need 1 <= group-size <= n");
      break;
    case ProblemKind::group_tree:
      if (tree_depth < 1 || tree_branching < 1 || leaf_width < 1) {
        throw ConfigError("tree depth, branching and leaf width must be at least 1");
      }
      if (tree_depth > 12) throw ConfigError("tree depth above 12 is not supported");
      break;
  }
  if (problem != ProblemKind::fused && lambda && !(*lambda > 0.0)) {
    throw ConfigError("lambda must be positive");
  }
}

double ExperimentSpec::group_lambda() const {
  if (lambda) return *lambda;
  const std::size_t k = problem == ProblemKind::group_tree
                            ? gen_tree_groups(static_cast<std::size_t>(tree_depth),
                                              static_cast<std::size_t>(tree_branching))
                                  .size()
                            : static_cast<std::size_t>(k_groups);
  return static_cast<double>(k) / 5.0;
}

nlohmann::json to_json(const ExperimentSpec& spec) {
  nlohmann::json j;
  j["problem"] = to_string(spec.problem);
  j["m"] = spec.m;
  j["n"] = spec.n;
  if (spec.problem == ProblemKind::fused) {
    if (spec.lambda_ratio) {
      j["lambda_ratio"] = *spec.lambda_ratio;
    } else {
      j["lambda1"] = spec.lambda1;
      j["lambda2"] = spec.lambda2;
    }
  } else {
    j["k_groups"] = spec.k_groups;
    j["lambda"] = spec.group_lambda();
    j["group_size"] = spec.group_size;
    j["overlap"] = spec.overlap;
    j["tree_depth"] = spec.tree_depth;
    j["tree_branching"] = spec.tree_branching;
    j["leaf_width"] = spec.leaf_width;
    j["normalize"] = spec.normalize;
  }
  std::vector<std::string> solvers;
  for (auto v : spec.solvers) solvers.emplace_back(to_string(v));
  j["solvers"] = solvers;
  j["seeds"] = spec.seeds;
  j["eps"] = spec.epsilon;
  j["relative_eps"] = spec.relative_epsilon;
  j["max_iter"] = spec.max_iter;
  j["beta"] = spec.beta;
  j["jobs"] = spec.jobs;
  return j;
}

OracleCap OracleCap::from_environment() {
  OracleCap cap;
  const char* env = std::getenv("SLIN_ORACLE_CAP");
  if (env == nullptr || *env == '\0') return cap;
  const std::string text(env);
  const auto comma = text.find(',');
  try {
    cap.max_n = std::stoi(text.substr(0, comma));
    if (comma != std::string::npos) cap.max_m = std::stoi(text.substr(comma + 1));
  } catch (const std::exception&) {
    throw ConfigError("SLIN_ORACLE_CAP must be \"N\" or \"N,M\", got '" + text + "'");
  }
  return cap;
}

Instance generate_instance(const ExperimentSpec& spec, std::uint64_t seed) {
  const auto k = static_cast<std::size_t>(spec.k_groups);
  switch (spec.problem) {
    case ProblemKind::fused:
      if (spec.lambda_ratio) return gen_fused_tau_scaled(spec.m, spec.n, *spec.lambda_ratio, seed);
      return gen_fused(spec.m, spec.n, spec.lambda1, spec.lambda2, seed);
    case ProblemKind::group_structured: {
      const auto gs = static_cast<std::size_t>(spec.group_size);
      const auto ov = static_cast<std::size_t>(spec.overlap);
      return gen_group_instance(spec.m, static_cast<Eigen::Index>(structured_dimension(k, gs, ov)),
                                gen_structured_groups(k, gs, ov), spec.group_lambda(), seed,
                                spec.normalize);
    }
    case ProblemKind::group_random:
      return gen_group_instance(spec.m, spec.n,
                                gen_random_groups(k, static_cast<std::size_t>(spec.n),
                                                  static_cast<std::size_t>(spec.group_size), seed),
                                spec.group_lambda(), seed, spec.normalize);
    case ProblemKind::group_tree: {
      const auto depth = static_cast<std::size_t>(spec.tree_depth);
      const auto branching = static_cast<std::size_t>(spec.tree_branching);
      const auto width = static_cast<std::size_t>(spec.leaf_width);
      return gen_group_instance(
          spec.m, static_cast<Eigen::Index>(tree_dimension(depth, branching, width)),
          gen_tree_groups(depth, branching, width), spec.group_lambda(), seed, spec.normalize);
    }
  }
  throw ConfigError("unknown problem kind");
}

Problem build_problem(const Instance& instance, PcgOptions pcg) {
  return std::visit(
      [&pcg](const auto& inst) -> Problem {
        using T = std::decay_t<decltype(inst)>;
        if constexpr (std::is_same_v<T, FusedLassoInstance>) {
          return make_fused_problem(inst, DiagonalMetric::kDefaultFloor, pcg);
        } else {
          return make_group_problem(inst, DiagonalMetric::kDefaultFloor, pcg);
        }
      },
      instance);
}

nlohmann::json describe_instance(const Instance& instance) {
  return std::visit(
      [](const auto& inst) {
        using T = std::decay_t<decltype(inst)>;
        nlohmann::json j;
        j["seed"] = inst.seed;
        j["m"] = inst.matrix->rows();
        j["n"] = inst.matrix->cols();
        if constexpr (std::is_same_v<T, FusedLassoInstance>) {
          j["tau"] = inst.tau;
          j["lambda1"] = inst.lambda1;
          j["lambda2"] = inst.lambda2;
        } else {
          j["lambda"] = inst.lambda;
          j["k_groups"] = inst.num_groups();
          j["loss_scale"] = inst.loss_scale();
        }
        return j;
      },
      instance);
}

bool ExperimentResult::any_aborted() const {
  return std::any_of(runs.begin(), runs.end(), [](const RunResult& r) {
    return r.report.terminated_by == Termination::aborted;
  });
}

std::pair<double, double> mean_std(const std::vector<double>& values) {
  if (values.empty()) return {0.0, 0.0};
  double sum = 0.0;
  for (double v : values) sum += v;
  const double mean = sum / static_cast<double>(values.size());
  if (values.size() < 2) return {mean, 0.0};
  double sq = 0.0;
  for (double v : values) sq += (v - mean) * (v - mean);
  return {mean, std::sqrt(sq / static_cast<double>(values.size() - 1))};
}

double relative_error(double objective, double optimum) {
  return (objective - optimum) / std::max(1.0, std::abs(optimum));
}

std::vector<SummaryRow> summarize(const std::vector<RunResult>& runs,
                                  const std::vector<Variant>& solvers) {
  std::vector<SummaryRow> rows;
  for (Variant solver : solvers) {
    SummaryRow row;
    row.solver = solver;
    std::vector<double> iterations, millis, errors;
    for (const auto& run : runs) {
      if (run.solver != solver) continue;
      ++row.runs;
      iterations.push_back(run.report.iterations);
      millis.push_back(run.report.millis);
      if (run.relative_error) errors.push_back(*run.relative_error);
      if (run.report.terminated_by == Termination::max_iter) ++row.maxiter_count;
      if (run.report.terminated_by == Termination::aborted) ++row.abort_count;
    }
    std::tie(row.mean_iterations, row.std_iterations) = mean_std(iterations);
    std::tie(row.mean_millis, row.std_millis) = mean_std(millis);
    if (!errors.empty()) {
      const auto [mean, sd] = mean_std(errors);
      row.mean_relative_error = mean;
      row.std_relative_error = sd;
    }
    rows.push_back(row);
  }
  return rows;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string trace_file_name(Variant solver, std::uint64_t seed) {
  return std::string(to_string(solver)) + "_seed" + std::to_string(seed) + ".csv";
}

namespace {

std::ofstream open_for_write(const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

std::string block_field(std::size_t b) { return b == kNoBlock ? "" : std::to_string(b); }

std::string optional_field(const std::optional<double>& v) {
  return v ? format_double(*v) : std::string();
}

}  // namespace

void write_trace_csv(const fs::path& path, const SolveReport& report, bool with_timing) {
  auto out = open_for_write(path);
  out << "k,block,step_kind,F,v,eta,F_trial,next_block,millis\n";
  for (const auto& r : report.records) {
    out << r.k << ',' << r.block << ',' << to_string(r.step) << ',' << format_double(r.objective)
        << ',' << format_double(r.gap) << ',' << format_double(r.eta) << ','
        << format_double(r.trial_objective) << ',' << block_field(r.next_block) << ','
        << (with_timing ? format_double(r.millis) : std::string()) << '\n';
  }
}

void write_summary_csv(const fs::path& path, const std::vector<SummaryRow>& rows,
                       bool with_timing) {
  auto out = open_for_write(path);
  out << "solver,runs,mean_iterations,std_iterations,mean_millis,std_millis,"
         "mean_relative_error,std_relative_error,maxiter_count,abort_count\n";
  for (const auto& r : rows) {
    out << to_string(r.solver) << ',' << r.runs << ',' << format_double(r.mean_iterations) << ','
        << format_double(r.std_iterations) << ','
        << (with_timing ? format_double(r.mean_millis) : std::string()) << ','
        << (with_timing ? format_double(r.std_millis) : std::string()) << ','
        << optional_field(r.mean_relative_error) << ',' << optional_field(r.std_relative_error)
        << ',' << r.maxiter_count << ',' << r.abort_count << '\n';
  }
}

void emit_convergence(const fs::path& path, const std::vector<RunResult>& runs) {
  std::vector<const RunResult*> order;
  for (const auto& r : runs) order.push_back(&r);
  std::sort(order.begin(), order.end(), [](const RunResult* a, const RunResult* b) {
    const auto na = to_string(a->solver), nb = to_string(b->solver);
    if (na != nb) return na < nb;
    return a->seed < b->seed;
  });
  auto out = open_for_write(path);
  out << "solver,seed,k,F\n";
  for (const RunResult* r : order) {
    for (const auto& rec : r->report.records) {
      out << to_string(r->solver) << ',' << r->seed << ',' << rec.k << ','
          << format_double(rec.objective) << '\n';
    }
  }
}

namespace {

struct SeedData {
  Instance instance;
  std::optional<double> optimum;
  std::optional<OracleMinResult> oracle;
  double oracle_millis = 0.0;
};

template <typename Fn>
void parallel_for(std::size_t count, int jobs, Fn&& fn) {
  const auto workers = static_cast<std::size_t>(std::max(1, jobs));
  if (workers == 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < std::min(workers, count); ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

double elapsed_ms(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
      .count();
}

}  // namespace

ExperimentResult run_experiment(const ExperimentSpec& spec, OracleCap cap) {
  spec.validate();
  const auto wall_start = std::chrono::steady_clock::now();
  std::error_code ec;
  fs::create_directories(spec.out / "traces", ec);
  if (ec) throw std::runtime_error("cannot create " + (spec.out / "traces").string());

  std::vector<SeedData> seeds;
  for (auto seed : spec.seeds) seeds.push_back(SeedData{generate_instance(spec, seed), {}, {}, 0});

  parallel_for(seeds.size(), spec.jobs, [&](std::size_t i) {
    SeedData& sd = seeds[i];
    const auto [m, n] = std::visit(
        [](const auto& inst) { return std::pair{inst.matrix->rows(), inst.matrix->cols()}; },
        sd.instance);
    if (!cap.admits(m, n)) return;
    Problem p = build_problem(sd.instance, oracle_pcg_options());
    const auto start = std::chrono::steady_clock::now();
    sd.oracle = reference_min(p.objective, p.metric);
    sd.oracle_millis = elapsed_ms(start);
    sd.optimum = sd.oracle->objective;
  });

  ExperimentResult result;
  for (Variant v : spec.solvers) {
    for (auto seed : spec.seeds) result.runs.push_back(RunResult{v, seed, {}, std::nullopt});
  }
  parallel_for(result.runs.size(), spec.jobs, [&](std::size_t i) {
    RunResult& run = result.runs[i];
    const std::size_t seed_index = i % spec.seeds.size();
    Problem p = build_problem(seeds[seed_index].instance);
    EngineConfig config;
    config.beta = spec.beta;
    config.epsilon = spec.epsilon;
    config.relative_epsilon = spec.relative_epsilon;
    config.max_iter = spec.max_iter;
    config.metric = p.metric;
    run.report = run_solver(run.solver, p.objective, config,
                            Vector::Zero(p.objective.dimension()));
    const auto& opt = seeds[seed_index].optimum;
    if (opt && run.report.terminated_by != Termination::aborted &&
        std::isfinite(run.report.objective)) {
      run.relative_error = relative_error(run.report.objective, *opt);
    }
  });
  for (const auto& sd : seeds) result.optimal_values.push_back(sd.optimum);
  result.summary = summarize(result.runs, spec.solvers);

  for (const auto& run : result.runs) {
    write_trace_csv(spec.out / "traces" / trace_file_name(run.solver, run.seed), run.report,
                    spec.timing_in_csv);
  }
  write_summary_csv(spec.out / "summary.csv", result.summary, spec.timing_in_csv);
  if (spec.convergence_csv) emit_convergence(spec.out / "convergence.csv", result.runs);

  nlohmann::json manifest;
  manifest["software"] = {{"name", "slin"}, {"version", std::string(kVersion)}};
  manifest["spec"] = to_json(spec);
  manifest["oracle_cap"] = {{"max_n", cap.max_n}, {"max_m", cap.max_m}};
  manifest["instances"] = nlohmann::json::array();
  for (const auto& sd : seeds) {
    nlohmann::json inst = describe_instance(sd.instance);
    if (sd.oracle) {
      inst["optimal_value"] = sd.oracle->objective;
      inst["oracle"] = {{"converged", sd.oracle->converged},
                        {"outer_iterations", sd.oracle->outer_iterations},
                        {"inner_iterations", sd.oracle->inner_iterations},
                        {"millis", sd.oracle_millis}};
    } else {
      inst["optimal_value"] = nullptr;
    }
    manifest["instances"].push_back(inst);
  }
  manifest["runs"] = nlohmann::json::array();
  for (const auto& run : result.runs) {
    const auto& r = run.report;
    nlohmann::json j;
    j["solver"] = to_string(run.solver);
    j["seed"] = run.seed;
    j["trace"] = "traces/" + trace_file_name(run.solver, run.seed);
    j["iterations"] = r.iterations;
    j["descent_steps"] = r.descent_steps;
    j["null_steps"] = r.null_steps;
    j["objective"] = std::isfinite(r.objective) ? nlohmann::json(r.objective) : nlohmann::json();
    j["terminated_by"] = to_string(r.terminated_by);
    j["inexact_subsolves"] = r.inexact_subsolves;
    j["relative_error"] =
        run.relative_error ? nlohmann::json(*run.relative_error) : nlohmann::json();
    j["millis"] = r.millis;
    if (!r.diagnostic.empty()) j["diagnostic"] = r.diagnostic;
    manifest["runs"].push_back(j);
  }
  manifest["summary"] = nlohmann::json::array();
  for (const auto& row : result.summary) {
    manifest["summary"].push_back({{"solver", to_string(row.solver)},
                                   {"mean_millis", row.mean_millis},
                                   {"std_millis", row.std_millis}});
  }
  manifest["total_millis"] = elapsed_ms(wall_start);
  auto out = open_for_write(spec.out / "manifest.json");
  out << manifest.dump(2) << '\n';
  return result;
}

}  // namespace slin::harness
