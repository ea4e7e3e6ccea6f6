#include <benchmark/benchmark.h>

#include "chameleon/netsim/message.hpp"
#include "chameleon/netsim/session.hpp"

using namespace chameleon;
using namespace chameleon::netsim;

static void BM_EncodeTrial(benchmark::State& state) {
  std::uint64_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(encode_frame(encode_body(Message::trial(i++, Angle(1.2345)))));
}
BENCHMARK(BM_EncodeTrial);

static void BM_DecodeReply(benchmark::State& state) {
  const std::string body = encode_body(Message::reply(123456, Outcome::Minus));
  for (auto _ : state) benchmark::DoNotOptimize(decode_body(body));
}
BENCHMARK(BM_DecodeReply);

static void BM_DecodeTrialNonCanonical(benchmark::State& state) {
  const std::string body = R"({ "sigma": 1.2345, "index": 7, "kind": "trial" })";
  for (auto _ : state) benchmark::DoNotOptimize(decode_body(body));
}
BENCHMARK(BM_DecodeTrialNonCanonical);

static void BM_Session(benchmark::State& state) {
  ExperimentConfig cfg;
  cfg.b = Angle(1.0);
  cfg.n_total = static_cast<std::uint64_t>(state.range(0));
  cfg.seed = 1;
  SessionOptions opts;
  opts.transport = state.range(1) ? TransportKind::Tcp : TransportKind::InProcess;
  for (auto _ : state) benchmark::DoNotOptimize(run_session(cfg, opts).report);
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Session)->Args({100'000, 0})->Args({100'000, 1})->Unit(benchmark::kMillisecond);
