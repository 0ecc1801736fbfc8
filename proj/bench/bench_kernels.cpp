// Dense reference kernels against the node-diagonalized OpenMP kernels.

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "becsplit/evaluation.hpp"
#include "becsplit/moment_kernels.hpp"

using namespace becsplit;

namespace {

std::vector<double> controls(int steps) {
  std::mt19937 rng(1);
  std::uniform_real_distribution<double> u(0.0, 20.0);
  std::vector<double> v(steps);
  for (auto& x : v) x = u(rng);
  return v;
}

void BM_StepJacobiansReference(benchmark::State& state) {
  const int order = static_cast<int>(state.range(0));
  const Truncation spec(9);
  const MomentState m = MomentState::rest(order, spec);
  for (auto _ : state) benchmark::DoNotOptimize(reference::step_jacobians(m, 7.0, 0.1, spec, 0.001));
}

void BM_StepJacobiansFast(benchmark::State& state) {
  const int order = static_cast<int>(state.range(0));
  const Truncation spec(9);
  const MomentNodeBasis basis(order, 0.1, spec);
  const MomentState m = MomentState::rest(order, spec);
  for (auto _ : state) benchmark::DoNotOptimize(moment_step_jacobians(basis, m, 7.0, 0.001));
}

void BM_SensitivityReference(benchmark::State& state) {
  const int steps = static_cast<int>(state.range(0));
  const Truncation spec(9);
  const MomentState m0 = MomentState::rest(8, spec);
  const auto u = controls(steps);
  for (auto _ : state) benchmark::DoNotOptimize(reference::terminal_sensitivity(m0, u, 0.1, spec, 0.001));
}

void BM_SensitivityFast(benchmark::State& state) {
  const int steps = static_cast<int>(state.range(0));
  const Truncation spec(9);
  const MomentNodeBasis basis(8, 0.1, spec);
  const MomentState m0 = MomentState::rest(8, spec);
  const auto u = controls(steps);
  for (auto _ : state) benchmark::DoNotOptimize(terminal_sensitivity(basis, m0, u, 0.001));
}

// Full-size sensitivity (N = 20, 3000 steps) with 1 thread and with all of them.
void BM_SensitivityThreads(benchmark::State& state) {
#ifdef _OPENMP
  const int saved = omp_get_max_threads();
  omp_set_num_threads(state.range(0) == 0 ? 1 : omp_get_num_procs());
#endif
  const Truncation spec(9);
  const MomentNodeBasis basis(20, 0.1, spec);
  const MomentState m0 = MomentState::rest(20, spec);
  const auto u = controls(3000);
  for (auto _ : state) benchmark::DoNotOptimize(terminal_sensitivity(basis, m0, u, 0.001));
#ifdef _OPENMP
  omp_set_num_threads(saved);
#endif
}

void BM_PerformanceIndexThreads(benchmark::State& state) {
#ifdef _OPENMP
  const int saved = omp_get_max_threads();
  omp_set_num_threads(state.range(0) == 0 ? 1 : omp_get_num_procs());
#endif
  const ControlArtifact a{PulseEnvelope(0.001, controls(3000)), "bench"};
  for (auto _ : state) benchmark::DoNotOptimize(performance_index(a, 0.1, TargetSpec(1, 24)));
#ifdef _OPENMP
  omp_set_num_threads(saved);
#endif
}

}  // namespace

BENCHMARK(BM_StepJacobiansReference)->Arg(4)->Arg(8)->Arg(20)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_StepJacobiansFast)->Arg(4)->Arg(8)->Arg(20)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SensitivityReference)->Arg(50)->Arg(200)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SensitivityFast)->Arg(50)->Arg(200)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SensitivityThreads)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PerformanceIndexThreads)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
