#include <numbers>

#include <benchmark/benchmark.h>

#include "exciton/dynamics.hpp"
#include "exciton/oracle.hpp"
#include "exciton/spectral.hpp"

namespace {

using namespace exciton;

const ModelParams kRates{0.0, 1.0, 0.08, 0.3};

void BM_EigGeneral(benchmark::State& state) {
  const CMat l = liouvillian_block({2, 3}, kRates, LiouvillianMode::Canonical).matrix;
  for (auto _ : state) benchmark::DoNotOptimize(eig_general(l));
}
BENCHMARK(BM_EigGeneral);

void BM_Expm(benchmark::State& state) {
  const CMat l = liouvillian_block({2, 3}, kRates, LiouvillianMode::Canonical).matrix;
  for (auto _ : state) benchmark::DoNotOptimize(expm(l, 7.5));
}
BENCHMARK(BM_Expm);

void BM_ClosedFormDecomposition(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(closed_form_decomposition({2, 3}, kRates));
}
BENCHMARK(BM_ClosedFormDecomposition);

void BM_NumericalDecomposition(benchmark::State& state) {
  const LiouvillianBlock gen = liouvillian_block({2, 3}, kRates, LiouvillianMode::Printed);
  for (auto _ : state) benchmark::DoNotOptimize(numerical_decomposition(gen));
}
BENCHMARK(BM_NumericalDecomposition);

void BM_EvolveSpectral(benchmark::State& state) {
  const BlockedDensity rho0 = initial_superposition(2, std::numbers::pi / 4.0);
  const std::vector<double> grid = uniform_grid(20.0, 0.01);
  EvolveOptions opt;
  opt.threads = static_cast<unsigned>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(evolve(rho0, kRates, grid, opt));
}
BENCHMARK(BM_EvolveSpectral)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_EvolveExpm(benchmark::State& state) {
  const BlockedDensity rho0 = initial_superposition(2, std::numbers::pi / 4.0);
  const std::vector<double> grid = uniform_grid(20.0, 0.01);
  EvolveOptions opt;
  opt.method = EvolutionMethod::Expm;
  for (auto _ : state) benchmark::DoNotOptimize(evolve(rho0, kRates, grid, opt));
}
BENCHMARK(BM_EvolveExpm)->Unit(benchmark::kMillisecond);

void BM_Rk4(benchmark::State& state) {
  const int n_max = static_cast<int>(state.range(0));
  const FullSuperoperator sup = build_full_superoperator(kRates, n_max);
  const FullState rho0 = assemble(initial_dressed(2), n_max);
  const std::vector<double> grid = uniform_grid(2.0, 0.1);
  for (auto _ : state) benchmark::DoNotOptimize(rk4_evolve(rho0, sup, grid, 0.0, false));
}
BENCHMARK(BM_Rk4)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);

void BM_BuildFullSuperoperator(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(build_full_superoperator(kRates, kDefaultTruncation));
}
BENCHMARK(BM_BuildFullSuperoperator)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
