// slin_bench: generate instances, run solver variants, write traces and summaries.
//
//   slin_bench run --problem fused --m 200 --n 60 --lambda-ratio 1 --solvers slin,alin,dr,pr
//       --seeds 1-10 --eps 1e-7 --out results/fused
//   slin_bench generate --problem group-structured --k-groups 5 --m 400 --seed 3 --out inst/
//   slin_bench solve --instance inst/instance.json --solver slin --trace trace.csv

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "slin/errors.hpp"
#include "slin/harness.hpp"
#include "slin/version.hpp"

namespace {

using namespace slin;
using harness::ExperimentSpec;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitAbort = 2;

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : text) {
    if (c == sep) {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  parts.push_back(cur);
  return parts;
}

// "1,2,5" or "1-10" or a mix: "1-3,7".
std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  for (const auto& part : split(text, ',')) {
    if (part.empty()) throw ConfigError("empty entry in --seeds");
    const auto dash = part.find('-');
    try {
      if (dash == std::string::npos) {
        seeds.push_back(std::stoull(part));
      } else {
        const auto lo = std::stoull(part.substr(0, dash));
        const auto hi = std::stoull(part.substr(dash + 1));
        if (hi < lo) throw ConfigError("descending seed range '" + part + "'");
        for (auto s = lo; s <= hi; ++s) seeds.push_back(s);
      }
    } catch (const std::logic_error&) {
      throw ConfigError("cannot parse seed '" + part + "'");
    }
  }
  return seeds;
}

std::vector<Variant> parse_solvers(const std::string& text) {
  std::vector<Variant> out;
  for (const auto& name : split(text, ',')) {
    auto v = parse_variant(name);
    if (!v) throw ConfigError("unknown solver '" + name + "' (expected slin, alin, dr, pr)");
    out.push_back(*v);
  }
  return out;
}

struct ProblemFlags {
  std::string problem = "fused";
  std::optional<double> lambda1, lambda2, lambda, lambda_ratio;
  bool normalize = false;
  bool no_normalize = false;
};

void add_problem_flags(CLI::App& cmd, ExperimentSpec& spec, ProblemFlags& flags) {
  cmd.add_option("--problem", flags.problem,
                 "fused | group-structured | group-random | group-tree")
      ->capture_default_str();
  cmd.add_option("--m", spec.m, "rows of A")->capture_default_str();
  cmd.add_option("--n", spec.n, "columns of A (fused, group-random)")->capture_default_str();
  cmd.add_option("--lambda1", flags.lambda1, "fused: l1 weight");
  cmd.add_option("--lambda2", flags.lambda2, "fused: total-variation weight");
  cmd.add_option("--lambda-ratio", flags.lambda_ratio,
                 "fused: lambda1 = lambda2 = ratio * ||A^T b||_inf");
  cmd.add_option("--k-groups", spec.k_groups, "number of groups")->capture_default_str();
  cmd.add_option("--lambda", flags.lambda, "group: loss scale is 1/(K lambda); default K/5");
  cmd.add_option("--group-size", spec.group_size)->capture_default_str();
  cmd.add_option("--overlap", spec.overlap, "group-structured: shared indices")
      ->capture_default_str();
  cmd.add_option("--tree-depth", spec.tree_depth)->capture_default_str();
  cmd.add_option("--tree-branching", spec.tree_branching)->capture_default_str();
  cmd.add_option("--leaf-width", spec.leaf_width)->capture_default_str();
  cmd.add_flag("--normalize", flags.normalize,
               "center and unit-scale columns of A and b (default for group-tree)");
  cmd.add_flag("--no-normalize", flags.no_normalize);
}

void apply_problem_flags(ExperimentSpec& spec, const ProblemFlags& flags) {
  auto kind = harness::parse_problem(flags.problem);
  if (!kind) throw ConfigError("unknown problem '" + flags.problem + "'");
  spec.problem = *kind;
  if (flags.lambda1) spec.lambda1 = *flags.lambda1;
  if (flags.lambda2) spec.lambda2 = *flags.lambda2;
  spec.lambda_ratio = flags.lambda_ratio;
  spec.lambda = flags.lambda;
  spec.normalize = !flags.no_normalize &&
                   (flags.normalize || spec.problem == harness::ProblemKind::group_tree);
}

void add_engine_flags(CLI::App& cmd, ExperimentSpec& spec) {
  cmd.add_option("--beta", spec.beta, "descent test parameter in (0,1)")->capture_default_str();
  cmd.add_option("--eps", spec.epsilon, "stopping tolerance on the model gap")
      ->capture_default_str();
  cmd.add_flag("--relative-eps", spec.relative_epsilon, "stop on v <= eps * max(1, |F|)");
  cmd.add_option("--max-iter", spec.max_iter)->capture_default_str();
}

int cmd_run(const ExperimentSpec& spec) {
  const auto result = harness::run_experiment(spec);
  std::printf("%-6s %5s %10s %10s %12s %8s\n", "solver", "runs", "mean_it", "std_it",
              "mean_relerr", "maxiter");
  for (const auto& row : result.summary) {
    std::printf("%-6s %5d %10.1f %10.2f %12s %8d\n", std::string(to_string(row.solver)).c_str(),
                row.runs, row.mean_iterations, row.std_iterations,
                row.mean_relative_error ? harness::format_double(*row.mean_relative_error).c_str()
                                        : "-",
                row.maxiter_count);
  }
  std::printf("wrote %s\n", spec.out.string().c_str());
  if (result.any_aborted()) {
    std::fprintf(stderr, "one or more runs aborted; see manifest.json\n");
    return kExitAbort;
  }
  return kExitOk;
}

int cmd_generate(const ExperimentSpec& spec, std::uint64_t seed) {
  spec.validate();
  const Instance inst = harness::generate_instance(spec, seed);
  std::visit([&](const auto& i) { save_instance(spec.out, i); }, inst);
  std::printf("wrote %s\n", (spec.out / "instance.json").string().c_str());
  return kExitOk;
}

int cmd_solve(const std::string& path, const std::string& solver, const ExperimentSpec& spec,
              const std::string& trace) {
  spec.validate();
  auto variant = parse_variant(solver);
  if (!variant) throw ConfigError("unknown solver '" + solver + "'");
  const Instance inst = load_instance(path);
  Problem p = harness::build_problem(inst);
  EngineConfig config;
  config.beta = spec.beta;
  config.epsilon = spec.epsilon;
  config.relative_epsilon = spec.relative_epsilon;
  config.max_iter = spec.max_iter;
  config.metric = p.metric;
  const SolveReport report =
      run_solver(*variant, p.objective, config, Vector::Zero(p.objective.dimension()));
  if (!trace.empty()) harness::write_trace_csv(trace, report, true);
  nlohmann::json j;
  j["solver"] = to_string(report.variant);
  j["iterations"] = report.iterations;
  j["descent_steps"] = report.descent_steps;
  j["null_steps"] = report.null_steps;
  j["objective"] = report.objective;
  j["terminated_by"] = to_string(report.terminated_by);
  j["millis"] = report.millis;
  if (!report.diagnostic.empty()) j["diagnostic"] = report.diagnostic;
  std::cout << j.dump(2) << '\n';
  return report.terminated_by == Termination::aborted ? kExitAbort : kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Selective linearization benchmark harness"};
  app.set_version_flag("--version", std::string(slin::kVersion));
  app.require_subcommand(1);

  ExperimentSpec spec;
  ProblemFlags flags;
  std::string solvers = "slin";
  std::string seeds = "1";
  std::string out = "out";

  auto* run = app.add_subcommand("run", "run solver variants over seeded instances");
  add_problem_flags(*run, spec, flags);
  add_engine_flags(*run, spec);
  run->add_option("--solvers", solvers, "comma list of slin, alin, dr, pr")
      ->capture_default_str();
  run->add_option("--seeds", seeds, "e.g. 1,2,3 or 1-10")->capture_default_str();
  run->add_option("--out", out, "output directory")->capture_default_str();
  run->add_option("--jobs", spec.jobs, "worker threads")->capture_default_str();
  run->add_flag("--timing", spec.timing_in_csv, "also write wall-clock millis into the CSVs");

  std::uint64_t gen_seed = 1;
  auto* gen = app.add_subcommand("generate", "write one instance as MatrixMarket + JSON");
  add_problem_flags(*gen, spec, flags);
  gen->add_option("--seed", gen_seed)->capture_default_str();
  gen->add_option("--out", out, "output directory")->capture_default_str();

  std::string instance_path, solver = "slin", trace;
  auto* solve = app.add_subcommand("solve", "solve a saved instance with one solver");
  solve->add_option("--instance", instance_path, "instance.json written by generate")
      ->required();
  solve->add_option("--solver", solver, "slin, alin, dr or pr")->capture_default_str();
  solve->add_option("--trace", trace, "write the iteration trace CSV here");
  add_engine_flags(*solve, spec);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    spec.out = out;
    if (*run) {
      apply_problem_flags(spec, flags);
      spec.solvers = parse_solvers(solvers);
      spec.seeds = parse_seeds(seeds);
      return cmd_run(spec);
    }
    if (*gen) {
      apply_problem_flags(spec, flags);
      return cmd_generate(spec, gen_seed);
    }
    return cmd_solve(instance_path, solver, spec, trace);
  } catch (const slin::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const slin::DimensionError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfig;
  }
}
