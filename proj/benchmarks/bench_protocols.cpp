#include <benchmark/benchmark.h>

#include "chameleon/analysis.hpp"
#include "chameleon/protocols.hpp"

using namespace chameleon;

static void BM_RunDirect(benchmark::State& state) {
  ExperimentConfig cfg;
  cfg.b = Angle(1.0);
  cfg.n_total = static_cast<std::uint64_t>(state.range(0));
  cfg.seed = 1;
  for (auto _ : state) {
    auto records = run_direct(cfg, static_cast<unsigned>(state.range(1)));
    benchmark::DoNotOptimize(analysis::estimate_correlation(records));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_RunDirect)->Args({100'000, 1})->Args({1'000'000, 1})->Args({1'000'000, 0})->Unit(benchmark::kMillisecond);

static void BM_RunOld(benchmark::State& state) {
  ExperimentConfig cfg;
  cfg.protocol = ProtocolKind::Old;
  cfg.n_grid = static_cast<std::uint64_t>(state.range(0));
  cfg.n_total = cfg.n_grid;
  cfg.seed = 1;
  for (auto _ : state) benchmark::DoNotOptimize(run_old(cfg));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_RunOld)->Arg(100'000)->Unit(benchmark::kMillisecond);

static void BM_BellExperiment(benchmark::State& state) {
  ExperimentConfig cfg;
  cfg.n_total = 1'000'000;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        analysis::run_bell_experiment(Angle(0.0), Angle(2 * kPi / 3), Angle(kPi / 3), cfg));
  }
}
BENCHMARK(BM_BellExperiment)->Unit(benchmark::kMillisecond);
