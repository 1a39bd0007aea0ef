#include <benchmark/benchmark.h>

#include <array>
#include <vector>

#include "cyclelab/bounds.hpp"
#include "cyclelab/idealgas.hpp"
#include "cyclelab/kernels.hpp"
#include "cyclelab/latticegas.hpp"
#include "cyclelab/pimc.hpp"

namespace {

using namespace cyclelab;

// theta_sum switches between the direct lattice sum and its dual form, so
// probe both sides of the crossover. a = range / 100.
void BM_ThetaSum(benchmark::State& state) {
  const double a = state.range(0) / 100.0;
  for (auto _ : state) benchmark::DoNotOptimize(kernels::theta_sum(a));
}
BENCHMARK(BM_ThetaSum)->Arg(5)->Arg(100)->Arg(2000);

void BM_RecursionTable(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  auto params = SystemParams::natural(3, 8.0, 1.0).with_count(n);
  for (auto _ : state)
    benchmark::DoNotOptimize(idealgas::recursion_table(params, n));
  state.SetComplexityN(n);
}
BENCHMARK(BM_RecursionTable)->RangeMultiplier(4)->Range(64, 4096)->Complexity();

void BM_CycleDistributionExact(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  auto params = SystemParams::natural(3, 8.0, 1.0).with_count(n);
  auto table = idealgas::recursion_table(params, n);
  for (auto _ : state)
    benchmark::DoNotOptimize(idealgas::cycle_distribution_exact(table));
}
BENCHMARK(BM_CycleDistributionExact)->Arg(256)->Arg(1024);

void BM_QminusResidual(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  auto params = SystemParams::natural(3, 6.0, 1.0).with_count(n);
  for (auto _ : state)
    benchmark::DoNotOptimize(bounds::qminus_residual(params, n, 0.001, 0.1));
}
BENCHMARK(BM_QminusResidual)->Arg(500)->Arg(2000);

void BM_HBetaKernel(benchmark::State& state) {
  auto params = SystemParams::natural(3, 8.0, 1.0);
  const int k_max = static_cast<int>(state.range(0));
  for (auto _ : state)
    benchmark::DoNotOptimize(bounds::h_beta_kernel(0.7, params, k_max));
}
BENCHMARK(BM_HBetaKernel)->Arg(500)->Arg(4000);

void BM_LatticeBridge(benchmark::State& state) {
  const std::array<int, 3> x{1, 2, 3};
  for (auto _ : state)
    benchmark::DoNotOptimize(lattice::lattice_bridge(2.0, x, 16));
}
BENCHMARK(BM_LatticeBridge);

void BM_SectorDiagonalize(benchmark::State& state) {
  lattice::LatticeParams params;
  params.anisotropy = 0.5;
  const int filling = static_cast<int>(state.range(0));
  for (auto _ : state) {
    auto sector = lattice::build_sector(params, filling);
    lattice::diagonalize(sector);
    benchmark::DoNotOptimize(sector);
  }
}
BENCHMARK(BM_SectorDiagonalize)->Arg(2)->Arg(4);

void BM_SampleBridge(benchmark::State& state) {
  const int slices = static_cast<int>(state.range(0));
  const std::array<double, 3> x{0.1, 0.8, 0.4};
  const std::array<double, 3> y{0.9, 0.2, 0.5};
  pimc::Rng rng(17);
  for (auto _ : state)
    benchmark::DoNotOptimize(pimc::sample_bridge(x, y, 0.9, 1.0, slices, 6, rng));
}
BENCHMARK(BM_SampleBridge)->Arg(16)->Arg(64)->Arg(256);

// One sweep of permutation moves on a small free gas: the inner loop of the
// cycle estimator.
void BM_SwapSweep(benchmark::State& state) {
  pimc::PimcConfig cfg;
  cfg.system = SystemParams::natural(3, 2.0, 1.0);
  cfg.n_particles = 8;
  cfg.slices = 16;
  auto chain = pimc::initial_state(cfg);
  pimc::Rng rng(29);
  pimc::MoveStats merge, split, redraw;
  for (auto _ : state) {
    for (int i = 0; i < cfg.n_particles; ++i) {
      pimc::move_swap(chain, cfg, rng, merge, split);
      pimc::move_redraw(chain, cfg, rng, redraw);
    }
    benchmark::DoNotOptimize(chain);
  }
}
BENCHMARK(BM_SwapSweep);

}  // namespace

BENCHMARK_MAIN();
