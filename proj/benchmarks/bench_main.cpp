#include <benchmark/benchmark.h>

#include <cmath>

#include "kpplab/front_analysis.hpp"
#include "kpplab/linear_oracle.hpp"
#include "kpplab/pde_solver.hpp"
#include "kpplab/traveling_wave.hpp"

using namespace kpplab;

static void BM_SolverStep(benchmark::State& state) {
  Scenario sc;
  sc.env = {0.5, 2.2, 0.0};
  sc.horizon = 1e6;
  sc.solver.scheme = static_cast<TimeScheme>(state.range(0));
  if (sc.solver.scheme == TimeScheme::Imex) sc.solver.dt = 0.01;
  Solver solver(sc);
  for (int k = 0; k < 500; ++k) solver.advance();
  for (auto _ : state) {
    solver.step_only(sc.solver.dt);
    benchmark::DoNotOptimize(solver.field().u.data());
  }
  state.counters["cells"] = static_cast<double>(solver.field().size());
}
BENCHMARK(BM_SolverStep)->Arg(0)->Arg(1)->Arg(2);

static void BM_Run(benchmark::State& state) {
  Scenario sc;
  sc.env = {0.5, 2.2, 0.0};
  sc.horizon = static_cast<double>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(run(sc).trace().xi.back());
}
BENCHMARK(BM_Run)->Arg(50)->Arg(200)->Unit(benchmark::kMillisecond);

static void BM_PsiEval(benchmark::State& state) {
  TailInitialData d;
  d.q = 1.0;
  d.lambda = 0.5;
  double x = 10.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(psi_eval(20.0, x, 1.0, d));
    x = x > 80.0 ? 10.0 : x + 0.37;
  }
}
BENCHMARK(BM_PsiEval);

static void BM_ComputeProfile(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(compute_profile(0.5, 1.0).samples().size());
}
BENCHMARK(BM_ComputeProfile)->Unit(benchmark::kMillisecond);

static void BM_FitDelay(benchmark::State& state) {
  FrontTrace tr;
  for (double t = 1.0; t <= 4000.0; t += 1.0) tr.push(t, 2.0 * t - 1.5 * std::log(t), 0.0, 0.0);
  FitOptions o;
  o.mode = FitMode::SpeedFree;
  for (auto _ : state) benchmark::DoNotOptimize(fit_delay(tr, o).theta_hat);
}
BENCHMARK(BM_FitDelay);

BENCHMARK_MAIN();
