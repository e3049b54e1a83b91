#include <gtest/gtest.h>

#include <cmath>

#include <nlohmann/json.hpp>

#include "hhr/measure_change.hpp"
#include "oracles.hpp"

namespace {

oracle::NovikovInputs inputs(const hhr::ModelParams& p, const hhr::JumpDistribution& d) {
  const bool expo = d.kind() == hhr::JumpDistribution::Kind::Exponential;
  return {p.kappa, p.sigma, p.eta, p.T, p.alpha, p.beta, expo ? d.parameter() : -1.0, expo ? 0.0 : d.parameter()};
}

TEST(Novikov, LambdaCapMatchesClosedFormAndIsContinuousAtCap) {
  const auto m = hhr::validate_or_throw(hhr::ModelParams{});
  const auto in = inputs(m.params(), hhr::JumpDistribution::exponential(1.0));
  for (double c : {0.1, 1.0, 5.0, 9.0}) EXPECT_NEAR(hhr::lambda_cap(m, c), oracle::riccati_lambda(in, c), 1e-14);
  const double cap = hhr::c_cap(m);
  EXPECT_DOUBLE_EQ(cap, 4.0 / (2.0 * 0.09));
  EXPECT_NEAR(hhr::lambda_cap(m, cap * (1 - 1e-12)), hhr::lambda_cap(m, cap), 1e-9);
  EXPECT_THROW(hhr::big_d(m, cap * 1.01), hhr::Error);
}

TEST(Novikov, ThresholdAgreesWithScanOracle) {
  const auto dist = hhr::JumpDistribution::exponential(1.0);
  for (double eta : {0.05, 0.3, 1.0}) {
    hhr::ModelParams p;
    p.eta = eta;
    const auto m = hhr::validate_or_throw(p);
    const auto t = hhr::compute_c_l(m, dist);
    EXPECT_NEAR(t.value, oracle::c_l_scan(inputs(p, dist), 100000), 1e-10) << eta;
    EXPECT_TRUE(t.monotone_scan);
  }
}

TEST(Novikov, EtaZeroGivesCapExactly) {
  hhr::ModelParams p;
  p.eta = 0.0;
  const auto m = hhr::validate_or_throw(p);
  const auto t = hhr::compute_c_l(m, hhr::JumpDistribution::exponential(1.0));
  EXPECT_EQ(t.value, hhr::c_cap(m));
  EXPECT_TRUE(t.at_cap);
}

TEST(Admissibility, DeskValues) {
  const auto m = hhr::validate_or_throw(hhr::ModelParams{});
  const auto r = hhr::a_bounds(m, hhr::JumpDistribution::exponential(1.0));
  EXPECT_NEAR(r.c_l.value, 7.756640, 1e-6);
  EXPECT_NEAR(r.bound_E, std::sqrt(2.0 * r.c_l.value), 1e-15);
  ASSERT_TRUE(r.bound_Em);
  EXPECT_NEAR(*r.bound_Em, std::min(std::sqrt(2.0 * r.c_l.value) / 2.0, std::sqrt(r.c_l.value - 0.25)), 1e-15);
  ASSERT_TRUE(r.bound_EmQS);
  EXPECT_NEAR(*r.bound_EmQS, 0.655646, 1e-6);
  EXPECT_NEAR(*r.Q2, 3.3239, 1e-4);
  EXPECT_NEAR(*r.Q1, *r.Q2 / (*r.Q2 - 1.0), 1e-15);
  EXPECT_TRUE(r.all_assumptions());
  EXPECT_LE(*r.bound_EmQS, *r.bound_Em);
  EXPECT_LE(*r.bound_Em, r.bound_E);
}

TEST(Admissibility, GateErrorsNameTheBound) {
  const auto m = hhr::validate_or_throw(hhr::ModelParams{});
  const auto r = hhr::a_bounds(m, hhr::JumpDistribution::exponential(1.0));
  EXPECT_NO_THROW(hhr::select_measure(r, 0.5, hhr::MeasureLevel::EmQS));
  try {
    hhr::select_measure(r, 0.7, hhr::MeasureLevel::EmQS);
    FAIL();
  } catch (const hhr::Error& e) {
    EXPECT_EQ(e.kind(), hhr::ErrorKind::Admissibility);
    EXPECT_NE(std::string(e.what()).find("EmQS"), std::string::npos);
  }
  EXPECT_NO_THROW(hhr::select_measure(r, 0.7, hhr::MeasureLevel::E));
}

TEST(Admissibility, RhoTooLargeAndAssumptionFailures) {
  hhr::ModelParams p;
  p.eta = 3.0;
  p.rho = -0.95;
  const auto m = hhr::validate_or_throw(p);
  const auto r = hhr::a_bounds(m, hhr::JumpDistribution::exponential(1.0));
  if (!(p.rho * p.rho < r.c_l.value)) {
    EXPECT_FALSE(r.bound_Em);
    try {
      hhr::level_bound(r, hhr::MeasureLevel::Em);
      FAIL();
    } catch (const hhr::Error& e) {
      EXPECT_EQ(e.kind(), hhr::ErrorKind::RhoTooLarge);
    }
  }
  hhr::ModelParams q;
  q.sigma = 0.39;  // 2 kappa vbar = 0.16 < 1.1 sigma^2
  const auto mq = hhr::validate_or_throw(q);
  const auto rq = hhr::a_bounds(mq, hhr::JumpDistribution::exponential(1.0));
  EXPECT_FALSE(rq.assumption_ok[2]);
  try {
    hhr::level_bound(rq, hhr::MeasureLevel::EmQS);
    FAIL();
  } catch (const hhr::Error& e) {
    EXPECT_EQ(e.kind(), hhr::ErrorKind::Assumption3Violated);
  }
}

TEST(Admissibility, VacuousNegativeMomentConditionWhenDriftEqualsRate) {
  hhr::ModelParams p;
  p.mu = hhr::PiecewiseConstant(p.r);
  const auto m = hhr::validate_or_throw(p);
  const auto r = hhr::a_bounds(m, hhr::JumpDistribution::exponential(1.0));
  EXPECT_EQ(r.D, 0.0);
  EXPECT_TRUE(std::isinf(r.condition2_value));
  ASSERT_TRUE(r.Q2);
  EXPECT_NEAR(*r.Q2, 1e8, 1.0);
}

TEST(MeasureChange, ThetaAndQDynamics) {
  const auto m = hhr::validate_or_throw(hhr::ModelParams{});
  const auto r = hhr::a_bounds(m, hhr::JumpDistribution::exponential(1.0));
  const auto sel = hhr::select_measure(r, 0.4, hhr::MeasureLevel::EmQS);
  const double v = 0.09;
  const double expected = ((0.05 - 0.03) / 0.3 - 0.4 * -0.5 * 0.3) / std::sqrt(0.75);
  EXPECT_NEAR(hhr::theta(m, sel, 0.3, v), expected, 1e-15);
  const auto q = hhr::q_dynamics(m, sel);
  EXPECT_DOUBLE_EQ(q.kappa_a, 2.0 + 0.4 * 0.3);
  EXPECT_NEAR(q.kappa_a * q.vbar_a, 2.0 * 0.04, 1e-15);
  try {
    hhr::q_dynamics(m, -10.0);
    FAIL();
  } catch (const hhr::Error& e) {
    EXPECT_EQ(e.kind(), hhr::ErrorKind::DegenerateReversion);
  }
  EXPECT_THROW(hhr::theta(m, sel, 0.0, 0.0), hhr::Error);
}

TEST(MeasureChange, ReportJsonNamesAssumptions) {
  const auto m = hhr::validate_or_throw(hhr::ModelParams{});
  const auto j = hhr::to_json(hhr::a_bounds(m, hhr::JumpDistribution::exponential(1.0)));
  EXPECT_EQ(j.at("assumptions").size(), 3u);
  EXPECT_EQ(j.at("c_l_method"), "bisection");
  EXPECT_EQ(hhr::parse_measure_level("Em"), hhr::MeasureLevel::Em);
  EXPECT_THROW(hhr::parse_measure_level("F"), hhr::Error);
}

}  // namespace
