#include <benchmark/benchmark.h>

#include "slin/engine.hpp"
#include "slin/fused_lasso.hpp"
#include "slin/group_lasso.hpp"
#include "slin/pcg.hpp"
#include "slin/probgen.hpp"
#include "slin/rng.hpp"

namespace {

using namespace slin;

Vector normals(std::uint64_t seed, Eigen::Index n) {
  CounterRng rng(seed, 0);
  Vector v(n);
  for (auto& x : v) x = rng.next_normal();
  return v;
}

void BM_QuadProx(benchmark::State& state) {
  const auto n = static_cast<Eigen::Index>(state.range(0));
  const auto inst = gen_fused(n, n, 0.0, 0.0, 1);
  QuadLossBlock block(inst.matrix, inst.rhs);
  const DiagonalMetric d(inst.matrix->column_sq_norms());
  const Vector s = normals(2, n), c = normals(3, n);
  for (auto _ : state) benchmark::DoNotOptimize(block.prox_solve(s, c, d));
}
BENCHMARK(BM_QuadProx)->Arg(60)->Arg(200)->Arg(500);

void BM_TvProx(benchmark::State& state) {
  const auto n = static_cast<Eigen::Index>(state.range(0));
  const DiagonalMetric d(Vector::Constant(n, 2.0));
  const Vector s = normals(4, n), c = normals(5, n);
  for (auto _ : state) benchmark::DoNotOptimize(tv_prox(s, c, d, 0.5));
}
BENCHMARK(BM_TvProx)->Arg(60)->Arg(200)->Arg(1000);

void BM_GroupProx(benchmark::State& state) {
  const auto n = static_cast<Eigen::Index>(state.range(0));
  const auto groups = gen_structured_groups(1, static_cast<std::size_t>(n), 0);
  const DiagonalMetric d(Vector::LinSpaced(n, 0.5, 3.0));
  const Vector s = normals(6, n), c = normals(7, n);
  const GroupSpec g{groups[0].indices, 0.5};
  for (auto _ : state) benchmark::DoNotOptimize(group_prox(s, c, d, g));
}
BENCHMARK(BM_GroupProx)->Arg(100)->Arg(1000);

void BM_RunSlinFused(benchmark::State& state) {
  const auto inst = gen_fused_tau_scaled(state.range(0), state.range(1), 0.1, 1);
  for (auto _ : state) {
    Problem p = make_fused_problem(inst);
    EngineConfig c;
    c.metric = p.metric;
    c.trace_level = TraceLevel::summary;
    const auto rep = run_slin(p.objective, c, Vector::Zero(inst.matrix->cols()));
    state.counters["iterations"] = rep.iterations;
  }
}
BENCHMARK(BM_RunSlinFused)->Args({50, 30})->Args({200, 60})->Unit(benchmark::kMillisecond);

void BM_RunSlinGroup(benchmark::State& state) {
  const auto inst = gen_group_instance(200, 460, gen_structured_groups(5), 1.0, 1);
  for (auto _ : state) {
    Problem p = make_group_problem(inst);
    EngineConfig c;
    c.metric = p.metric;
    c.epsilon = 1e-4;
    c.trace_level = TraceLevel::summary;
    const auto rep = run_slin(p.objective, c, Vector::Zero(460));
    state.counters["iterations"] = rep.iterations;
  }
}
BENCHMARK(BM_RunSlinGroup)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
