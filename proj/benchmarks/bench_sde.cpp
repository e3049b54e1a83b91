#include <benchmark/benchmark.h>

#include "hhr/sde_simulator.hpp"

namespace {

void BM_Simulate(benchmark::State& state) {
  const auto model = hhr::validate_or_throw(hhr::ModelParams{});
  const auto dist = hhr::JumpDistribution::exponential(1.0);
  const auto sel = hhr::select_measure(hhr::a_bounds(model, dist), 0.3, hhr::MeasureLevel::EmQS);
  hhr::SimulationOptions o;
  o.n_paths = 2000;
  o.n_steps = static_cast<int>(state.range(0));
  o.measure = state.range(1) ? hhr::SimMeasure::Q : hhr::SimMeasure::P;
  o.selection = sel;
  for (auto _ : state) {
    o.seed++;
    benchmark::DoNotOptimize(hhr::simulate(model, dist, o).X.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long long>(o.n_paths) * o.n_steps);
}
BENCHMARK(BM_Simulate)->Args({252, 0})->Args({252, 1})->Args({1000, 1})->Unit(benchmark::kMillisecond);

}  // namespace
