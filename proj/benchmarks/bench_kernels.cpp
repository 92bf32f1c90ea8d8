// Serial vs OpenMP timings for the planner sweeps and the replication runner.
#include <benchmark/benchmark.h>

#include "cgl/bench.hpp"
#include "cgl/planner.hpp"
#include "cgl/rng.hpp"

namespace {

struct SweepFixture {
  cgl::ExplicitModel model;
  std::vector<cgl::PriorPolicy> priors;
  std::vector<double> betas{-2000.0, -2000.0};
  std::vector<double> cg;

  explicit SweepFixture(int n) {
    cgl::GridWorldSpec spec;
    spec.n = n;
    cgl::GridWorld env(spec);
    auto [offline, online] = cgl::gridworld_priors(env);
    priors = {offline, online};
    model = cgl::ExplicitModel::from_env(env);
    cg.resize(static_cast<size_t>(model.num_states) * model.num_actions);
    cgl::Rng rng(7);
    for (double& v : cg) v = rng.uniform();
  }
};

void sweep(benchmark::State& state, bool parallel) {
  SweepFixture fx(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    auto out = cgl::apply_b_star(fx.model, fx.priors, fx.betas, fx.cg, 0.9,
                                 parallel);
    benchmark::DoNotOptimize(out.data());
  }
}

void BM_sweep_serial(benchmark::State& state) { sweep(state, false); }
void BM_sweep_parallel(benchmark::State& state) { sweep(state, true); }

void solve(benchmark::State& state, bool parallel) {
  SweepFixture fx(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    auto report = cgl::solve_fixed_point(fx.model, fx.priors, fx.betas, 0.9,
                                         1e-10, 10000, parallel);
    benchmark::DoNotOptimize(report.cg_star.data());
  }
}

void BM_solve_serial(benchmark::State& state) { solve(state, false); }
void BM_solve_parallel(benchmark::State& state) { solve(state, true); }

void replications(benchmark::State& state, bool parallel) {
  cgl::GridBenchConfig cfg;
  cfg.sizes = {6};
  cfg.hp.replications = static_cast<int>(state.range(0));
  cfg.hp.episodes = 25;
  for (auto _ : state) {
    auto result = cgl::run_grid_benchmark(cfg, parallel);
    benchmark::DoNotOptimize(result.cells.data());
  }
}

void BM_replications_serial(benchmark::State& state) {
  replications(state, false);
}
void BM_replications_parallel(benchmark::State& state) {
  replications(state, true);
}

}  // namespace

BENCHMARK(BM_sweep_serial)->Arg(6)->Arg(10)->Arg(12);
BENCHMARK(BM_sweep_parallel)->Arg(6)->Arg(10)->Arg(12);
BENCHMARK(BM_solve_serial)->Arg(6)->Arg(10);
BENCHMARK(BM_solve_parallel)->Arg(6)->Arg(10);
BENCHMARK(BM_replications_serial)->Arg(8);
BENCHMARK(BM_replications_parallel)->Arg(8);

BENCHMARK_MAIN();
