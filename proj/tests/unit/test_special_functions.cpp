#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include <nlohmann/json.hpp>

#include "hhr/error.hpp"
#include "hhr/special_functions.hpp"
#include "oracles.hpp"

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

TEST(Hyp1F1, MatchesFiftyDigitSeriesOnGrid) {
  double worst = 0.0;
  for (double a : {0.5, 1.0, 2.5})
    for (double b : {0.5, 1.0, 2.5})
      for (double z = -20.0; z <= 20.0; z += 2.5) worst = std::max(worst, rel(hhr::hyp1f1(a, b, z), oracle::hyp1f1(a, b, z)));
  EXPECT_LT(worst, 1e-13);
}

TEST(Hyp1F1, KummerBranchMatchesOracle) {
  for (double z : {-35.0, -60.0, -150.0}) {
    EXPECT_LT(rel(hhr::hyp1f1(0.7, 2.2, z), oracle::hyp1f1(0.7, 2.2, z)), 1e-12) << z;
  }
}

TEST(Hyp1F1, Identities) {
  EXPECT_EQ(hhr::hyp1f1(3.1, 0.4, 0.0), 1.0);
  for (double z : {-8.0, 0.5, 12.0}) EXPECT_LT(rel(hhr::hyp1f1(1.7, 1.7, z), std::exp(z)), 1e-14);
  EXPECT_LT(rel(hhr::hyp1f1(0.6, 1.9, 7.0), std::exp(7.0) * hhr::hyp1f1(1.3, 1.9, -7.0)), 1e-13);
  // a a nonpositive integer terminates: M(-2, b; z) = 1 - 2z/b + z^2/(b(b+1)).
  EXPECT_NEAR(hhr::hyp1f1(-2.0, 3.0, 1.5), 1.0 - 1.0 + 2.25 / 12.0, 1e-15);
}

TEST(Hyp1F1, ErrorsAndScaledForm) {
  try {
    hhr::hyp1f1(1.0, -2.0, 1.0);
    FAIL();
  } catch (const hhr::Error& e) {
    EXPECT_EQ(e.kind(), hhr::ErrorKind::Domain);
  }
  EXPECT_THROW(hhr::hyp1f1(1.0, 2.0, 701.0), hhr::Error);
  hhr::Hyp1F1Params tight;
  tight.max_terms = 3;
  try {
    hhr::hyp1f1(1.0, 2.0, 10.0, tight);
    FAIL();
  } catch (const hhr::Error& e) {
    EXPECT_EQ(e.kind(), hhr::ErrorKind::NonConvergence);
  }
  for (double z : {0.3, 15.0, 300.0}) {
    EXPECT_LT(rel(hhr::hyp1f1_scaled(1.2, 2.7, z), std::exp(-z) * hhr::hyp1f1(1.2, 2.7, z)), 1e-12);
  }
  EXPECT_TRUE(std::isfinite(hhr::hyp1f1_scaled(1.2, 2.7, 5e4)));
}

TEST(CirNegMoment, MatchesExactTransitionSampling) {
  struct Case {
    double kappa, vbar, sigma, v0, t, s;
  };
  for (const Case c : {Case{2.0, 0.04, 0.3, 0.04, 1.0, 0.5}, Case{3.0, 0.09, 0.2, 0.09, 1.0, 1.0},
                       Case{1.0, 0.05, 0.2, 0.02, 0.25, 1.0}}) {
    std::mt19937_64 gen(17);
    std::vector<double> xs(200000);
    for (double& x : xs) x = std::pow(oracle::cir_step(gen, c.v0, c.t, c.kappa, c.vbar, c.sigma), -c.s);
    const auto mc = oracle::mean_se(xs);
    const double f = hhr::cir_neg_moment(c.kappa, c.vbar, c.sigma, c.v0, c.t, c.s);
    EXPECT_NEAR(f, mc.mean, 4.0 * mc.se + 1e-3 * mc.mean) << c.kappa << " " << c.s;
  }
}

TEST(CirNegMoment, LargeArgumentAndDeterministicLimits) {
  // Small t: v_t is close to v0, so E[v^-s] -> (e^{kappa t}/v0)^s.
  const double near = hhr::cir_neg_moment(2.0, 0.04, 0.3, 0.04, 1e-6, 1.0);
  EXPECT_NEAR(near, 25.0, 25.0 * 1e-4);
  const double det = hhr::cir_neg_moment(2.0, 0.04, 1e-6, 0.09, 1.0, 1.0);
  EXPECT_NEAR(det, 1.0 / (0.04 + 0.05 * std::exp(-2.0)), 1e-6);
  try {
    hhr::cir_neg_moment(2.0, 0.04, 0.3, 0.04, 1.0, 2.0);
    FAIL();
  } catch (const hhr::Error& e) {
    EXPECT_EQ(e.kind(), hhr::ErrorKind::HypothesisViolated);
  }
  EXPECT_THROW(hhr::cir_neg_moment(2.0, 0.04, 0.3, 0.04, 0.0, 1.0), hhr::Error);
}

TEST(IntegratedInverseCir, UnitAtZeroAndMatchesFineStepPaths) {
  EXPECT_EQ(hhr::integrated_inverse_cir_exp(2.0, 0.04, 0.3, 0.04, 1.0, 0.0), 1.0);
  const double kappa = 3.0, vbar = 0.09, sigma = 0.2, v0 = 0.09, T = 1.0, c = 0.15;
  std::mt19937_64 gen(23);
  const int steps = 400;
  const double dt = T / steps;
  std::vector<double> xs(20000);
  for (double& x : xs) {
    double v = v0, integral = 0.0;
    for (int k = 0; k < steps; ++k) {
      const double next = oracle::cir_step(gen, v, dt, kappa, vbar, sigma);
      integral += 0.5 * dt * (1.0 / v + 1.0 / next);
      v = next;
    }
    x = std::exp(c * integral);
  }
  const auto mc = oracle::mean_se(xs);
  const double f = hhr::integrated_inverse_cir_exp(kappa, vbar, sigma, v0, T, c);
  EXPECT_NEAR(f, mc.mean, 4.0 * mc.se + 5e-3 * mc.mean);
  try {
    hhr::integrated_inverse_cir_exp(kappa, vbar, sigma, v0, T, 10.0);
    FAIL();
  } catch (const hhr::Error& e) {
    EXPECT_EQ(e.kind(), hhr::ErrorKind::HypothesisViolated);
  }
}

TEST(NoncentralChiSquare, MeanAndVariance) {
  std::mt19937_64 gen(5);
  std::vector<double> xs(200000);
  for (double& x : xs) x = hhr::sample_noncentral_chi_square(gen, 3.0, 2.0);
  const auto e = oracle::mean_se(xs);
  EXPECT_NEAR(e.mean, 5.0, 4.0 * e.se);
  double var = 0.0;
  for (double x : xs) var += (x - e.mean) * (x - e.mean);
  var /= xs.size() - 1;
  EXPECT_NEAR(var, 2.0 * (3.0 + 4.0), 0.15);
}

}  // namespace
