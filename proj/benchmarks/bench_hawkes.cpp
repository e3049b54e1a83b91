#include <benchmark/benchmark.h>

#include "hhr/hawkes.hpp"

namespace {

void BM_HawkesPath(benchmark::State& state) {
  hhr::ModelParams p;
  p.T = static_cast<double>(state.range(0));
  const auto model = hhr::validate_or_throw(p);
  const auto dist = hhr::JumpDistribution::exponential(1.0);
  std::uint64_t i = 0;
  std::size_t events = 0;
  for (auto _ : state) {
    const auto path = hhr::simulate_hawkes(model, dist, 7, i++);
    events += path.size();
    benchmark::DoNotOptimize(path.size());
  }
  state.counters["events/path"] = benchmark::Counter(static_cast<double>(events) / static_cast<double>(i));
}
BENCHMARK(BM_HawkesPath)->Arg(1)->Arg(10);

void BM_ResidualTest(benchmark::State& state) {
  const auto model = hhr::validate_or_throw(hhr::ModelParams{});
  const auto dist = hhr::JumpDistribution::exponential(1.0);
  const auto paths = hhr::simulate_hawkes_paths(model, dist, 3, static_cast<std::size_t>(state.range(0)));
  const std::vector<double> times{0.5, 1.0};
  for (auto _ : state) {
    benchmark::DoNotOptimize(hhr::martingale_residual_test(paths, times, 1.0).all_pass());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ResidualTest)->Arg(10000);

}  // namespace
