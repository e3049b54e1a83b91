#include <benchmark/benchmark.h>

#include <cmath>

#include "hhr/pide.hpp"
#include "hhr/thiele.hpp"

namespace {

struct Desk {
  hhr::ValidatedModel model = hhr::validate_or_throw(hhr::ModelParams{});
  hhr::JumpDistribution dist = hhr::JumpDistribution::exponential(1.0);
  hhr::MeasureSelection sel = hhr::select_measure(hhr::a_bounds(model, dist), 0.5, hhr::MeasureLevel::EmQS);
};

void BM_PriceSolve(benchmark::State& state) {
  const Desk d;
  const int n = static_cast<int>(state.range(0));
  const hhr::GridSize size{64, n, n / 2, n / 3};
  const auto payoff = hhr::Payoff::guarantee(100.0 * std::exp(0.03));
  for (auto _ : state) {
    benchmark::DoNotOptimize(hhr::solve_price_pide(payoff, 1.0, d.model, d.dist, d.sel, size).values.data());
  }
  state.counters["nodes"] = n * (n / 2) * (n / 3);
}
BENCHMARK(BM_PriceSolve)->Arg(24)->Arg(48)->Arg(96)->Unit(benchmark::kMillisecond);

// One Hundsdorfer-Verwer step on the default grid.
void BM_HvStep(benchmark::State& state) {
  const Desk d;
  const hhr::Grid4 grid = hhr::make_grid(d.model, 1.0, hhr::GridSize{});
  const hhr::GeneratorDiscretization op(grid, d.model, hhr::q_dynamics(d.model, d.sel),
                                        hhr::JumpQuadrature::build(d.dist), hhr::XMinBoundary::OneSided);
  const hhr::AdiSolver solver(op, hhr::PideOptions{}.theta);
  std::vector<std::vector<double>> u(1, std::vector<double>(grid.spatial_size()));
  for (std::size_t c = 0; c < u[0].size(); ++c) u[0][c] = std::max(grid.x[c % grid.nx()], 100.0);
  for (auto _ : state) solver.hv_step(u, 0.0, grid.dt(), nullptr, nullptr);
}
BENCHMARK(BM_HvStep)->Unit(benchmark::kMicrosecond);

void BM_ThieleCrossValidation(benchmark::State& state) {
  const Desk d;
  const auto policy = hhr::endowment_guarantee(0.02, 100.0);
  for (auto _ : state) {
    const auto q = hhr::reserve_quadrature(policy, d.model, d.dist, d.sel);
    const auto p = hhr::solve_thiele_pide(policy, d.model, d.dist, d.sel);
    benchmark::DoNotOptimize(hhr::cross_validate(q, p, d.model.params()).max_rel_diff);
  }
}
BENCHMARK(BM_ThieleCrossValidation)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
