#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include <nlohmann/json.hpp>

#include "hhr/hawkes.hpp"
#include "hhr/stats.hpp"
#include "oracles.hpp"

namespace {

hhr::ValidatedModel desk(double alpha = 0.5, double T = 1.0) {
  hhr::ModelParams p;
  p.alpha = alpha;
  p.T = T;
  return hhr::validate_or_throw(p);
}

TEST(HawkesPath, IntensityAndCompensatorByHand) {
  // lambda0 = 1, alpha = 0.5, beta = 1, events at 0.2 and 0.7.
  const hhr::HawkesPath path(1.0, 0.5, 1.0, 1.0, {0.2, 0.7}, {1.5, 0.25});
  EXPECT_DOUBLE_EQ(path.lambda_at(0.1), 1.0);
  EXPECT_DOUBLE_EQ(path.lambda_at(0.2), 1.5);
  EXPECT_DOUBLE_EQ(path.lambda_before(0.2), 1.0);
  const double after2 = 1.0 + 0.5 * std::exp(-0.5) + 0.5;
  EXPECT_NEAR(path.lambda_after(1), after2, 1e-15);
  EXPECT_EQ(path.N_at(0.69), 1u);
  EXPECT_EQ(path.N_at(0.7), 2u);
  EXPECT_DOUBLE_EQ(path.L_at(1.0), 1.75);
  const double excess = 0.5 * (1.0 - std::exp(-0.5)) + (after2 - 1.0) * (1.0 - std::exp(-0.3));
  EXPECT_NEAR(path.integrated_intensity(1.0), 1.0 + excess, 1e-14);
  const auto c = hhr::compensator(path, 2.0, 1.0);
  EXPECT_NEAR(c.LambdaL, 2.0 * c.LambdaN, 1e-15);
}

TEST(HawkesPath, RejectsUnsortedEvents) {
  EXPECT_THROW(hhr::HawkesPath(1.0, 0.5, 1.0, 1.0, {0.5, 0.2}, {1.0, 1.0}), hhr::Error);
}

TEST(Hawkes, MeanIntensityMatchesRk4) {
  for (double alpha : {0.0, 0.3, 0.9}) {
    const auto m = desk(alpha, 3.0);
    for (double t : {0.5, 1.0, 3.0}) {
      const auto mom = hhr::mean_intensity_ode(m, t);
      EXPECT_NEAR(mom.Elambda, oracle::hawkes_mean_intensity(1.0, alpha, 1.0, t), 1e-12);
      const double EN = oracle::simpson([&](double u) { return oracle::hawkes_mean_intensity(1.0, alpha, 1.0, u); },
                                        0.0, t, 400);
      EXPECT_NEAR(mom.EN, EN, 1e-9);
    }
  }
  EXPECT_NEAR(hhr::mean_intensity_ode(desk(), 1.0).Elambda, 2.0 - std::exp(-0.5), 1e-15);
}

TEST(Hawkes, DeterministicInSeedAndIndex) {
  const auto m = desk();
  const auto dist = hhr::JumpDistribution::exponential(1.0);
  const auto a = hhr::simulate_hawkes(m, dist, 11, 5);
  const auto b = hhr::simulate_hawkes(m, dist, 11, 5);
  const auto c = hhr::simulate_hawkes(m, dist, 11, 6);
  EXPECT_EQ(a.event_times(), b.event_times());
  EXPECT_EQ(a.marks(), b.marks());
  EXPECT_NE(a.event_times(), c.event_times());
}

TEST(Hawkes, SimulatedMeanIntensityAndCompensator) {
  const auto m = desk();
  const auto dist = hhr::JumpDistribution::exponential(1.0);
  const auto paths = hhr::simulate_hawkes_paths(m, dist, 2, 40000);
  std::vector<double> lam;
  for (const auto& p : paths) lam.push_back(p.lambda_at(1.0));
  EXPECT_TRUE(hhr::estimate_mean(lam).within(2.0 - std::exp(-0.5), 3.5));
  const std::vector<double> times{0.5, 1.0};
  EXPECT_TRUE(hhr::martingale_residual_test(paths, times, 1.0).all_pass());
}

TEST(Hawkes, PoissonReductionWhenAlphaZero) {
  const auto m = desk(0.0, 2.0);
  const auto dist = hhr::JumpDistribution::constant(1.0);
  const auto paths = hhr::simulate_hawkes_paths(m, dist, 4, 20000);
  std::vector<double> gaps, counts;
  for (const auto& p : paths) {
    EXPECT_DOUBLE_EQ(p.lambda_at(1.3), 1.0);
    EXPECT_NEAR(p.integrated_intensity(2.0), 2.0, 1e-14);
    counts.push_back(static_cast<double>(p.N_at(2.0)));
    if (!p.event_times().empty()) gaps.push_back(p.event_times()[0]);
  }
  EXPECT_TRUE(hhr::estimate_mean(counts).within(2.0, 3.5));
  // First arrival given an arrival before 2 is a truncated exponential.
  const double ks = hhr::ks_statistic(gaps, [](double t) { return (1.0 - std::exp(-t)) / (1.0 - std::exp(-2.0)); });
  EXPECT_LT(std::sqrt(static_cast<double>(gaps.size())) * ks, hhr::kKsCritical1Percent);
}

TEST(Hawkes, EventCapRaisesOverflow) {
  const auto m = desk(0.5, 50.0);
  const auto dist = hhr::JumpDistribution::exponential(1.0);
  try {
    hhr::simulate_hawkes(m, dist, 1, 0, 5);
    FAIL();
  } catch (const hhr::Error& e) {
    EXPECT_EQ(e.kind(), hhr::ErrorKind::EventOverflow);
  }
}

TEST(Hawkes, EventsCsvHasHeaderAndRows) {
  const auto m = desk();
  const auto dist = hhr::JumpDistribution::exponential(1.0);
  const auto paths = hhr::simulate_hawkes_paths(m, dist, 3, 3);
  std::ostringstream os;
  hhr::write_events_csv(os, paths);
  std::size_t events = 0;
  for (const auto& p : paths) events += p.size();
  const std::string s = os.str();
  EXPECT_EQ(s.rfind("path_id,event_index,time,mark,lambda_after\n", 0), 0u);
  EXPECT_EQ(static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')), events + 1);
}

}  // namespace
