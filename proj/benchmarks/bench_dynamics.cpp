#include <benchmark/benchmark.h>

#include "chameleon/contextual.hpp"
#include "chameleon/dynamics.hpp"

using namespace chameleon;

static void BM_QuadratureCorrelation(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(dynamics::quadrature_correlation(Angle(0.3), Angle(2.1), n));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_QuadratureCorrelation)->RangeMultiplier(10)->Range(1000, 1'000'000);

static void BM_ContextualBatch(benchmark::State& state) {
  contextual::BatchOptions opts;
  opts.models = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(contextual::run_batch(opts));
}
BENCHMARK(BM_ContextualBatch)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);
