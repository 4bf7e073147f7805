#include <benchmark/benchmark.h>

#include "wurba/methods.hpp"
#include "wurba/sim_kernel.hpp"
#include "wurba/wur_codec.hpp"

using namespace wurba;

namespace {

void BM_SerializeRoundTrip(benchmark::State& state) {
  WurFrame f;
  f.address = 0x2A5;
  f.td_control = 0x123;
  f.body.assign(static_cast<std::size_t>(state.range(0)), 0x5A);
  for (auto _ : state) {
    auto bits = serialize_mac(f);
    benchmark::DoNotOptimize(deserialize_mac(bits));
  }
}
BENCHMARK(BM_SerializeRoundTrip)->Arg(0)->Arg(16);

void BM_Manchester(benchmark::State& state) {
  const auto rate = state.range(0) == 0 ? DataRate::LDR : DataRate::HDR;
  WurFrame f;
  f.address = 0x7;
  const auto bits = serialize_mac(f);
  for (auto _ : state) {
    auto symbols = encode_manchester(bits, rate);
    benchmark::DoNotOptimize(decode_manchester(symbols, rate));
  }
}
BENCHMARK(BM_Manchester)->Arg(0)->Arg(1);

void BM_EventKernel(benchmark::State& state) {
  const auto n = state.range(0);
  for (auto _ : state) {
    Simulator sim;
    RngStream rng(1, 0);
    std::int64_t fired = 0;
    for (std::int64_t i = 0; i < n; ++i) {
      sim.schedule(Duration{static_cast<std::int64_t>(rng.uniform_int(1'000'000))}, [&fired] { ++fired; });
    }
    sim.run();
    benchmark::DoNotOptimize(fired);
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_EventKernel)->Arg(1 << 10)->Arg(1 << 16);

void BM_SingleRun(benchmark::State& state) {
  ScenarioConfig c;
  const auto method = kAllMethods[static_cast<std::size_t>(state.range(0))];
  std::uint64_t seed = 1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(run_method(c, method, milliseconds(10), seed++));
  }
  state.SetLabel(std::string(to_string(method)));
}
BENCHMARK(BM_SingleRun)->DenseRange(0, 3)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
