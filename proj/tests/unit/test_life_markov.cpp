#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include <nlohmann/json.hpp>

#include "hhr/life_markov.hpp"

namespace {

hhr::PolicySpec three_state_time_dependent() {
  auto p = hhr::disability_annuity(0.01, 0.005, 0.02, 0.04, 10.0);
  p.transitions[0].rate = hhr::PiecewiseConstant({{0.0, 0.01}, {0.4, 0.03}, {0.7, 0.02}});
  p.transitions[2].rate = hhr::PiecewiseConstant({{0.0, 0.02}, {0.5, 0.5}});
  return p;
}

TEST(TransitionProbs, IdentityAtEqualTimes) {
  const auto p = three_state_time_dependent();
  EXPECT_TRUE(hhr::transition_probs(p, 0.3, 0.3).isIdentity(0.0));
}

TEST(TransitionProbs, TwoStateClosedForm) {
  const auto p = hhr::term_insurance(0.02);
  const auto m = hhr::transition_probs(p, 0.0, 10.0);
  EXPECT_NEAR(m(0, 0), std::exp(-0.2), 1e-14);
  EXPECT_NEAR(m(0, 0), 0.818731, 1e-6);
  EXPECT_EQ(m(1, 1), 1.0);
  EXPECT_EQ(m(1, 0), 0.0);
  EXPECT_NEAR(hhr::transition_probs(p, 0.0, 10.0, hhr::TransitionMethod::Ode)(0, 0), std::exp(-0.2), 1e-10);
}

TEST(TransitionProbs, RowsSumToOneAndEntriesInRange) {
  const auto p = three_state_time_dependent();
  for (auto method : {hhr::TransitionMethod::MatrixExponential, hhr::TransitionMethod::Ode}) {
    const auto m = hhr::transition_probs(p, 0.1, 0.95, method);
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      EXPECT_NEAR(m.row(i).sum(), 1.0, 1e-10);
      for (Eigen::Index j = 0; j < m.cols(); ++j) {
        EXPECT_GE(m(i, j), -1e-15);
        EXPECT_LE(m(i, j), 1.0 + 1e-15);
      }
    }
  }
}

TEST(TransitionProbs, ChapmanKolmogorovOnRandomTriples) {
  const auto p = three_state_time_dependent();
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int n = 0; n < 20; ++n) {
    double a = u(gen), b = u(gen), c = u(gen);
    if (a > b) std::swap(a, b);
    if (b > c) std::swap(b, c);
    if (a > b) std::swap(a, b);
    const Eigen::MatrixXd lhs = hhr::transition_probs(p, a, b) * hhr::transition_probs(p, b, c);
    EXPECT_LT((lhs - hhr::transition_probs(p, a, c)).cwiseAbs().maxCoeff(), 1e-8);
  }
}

TEST(TransitionProbs, RoutesAgreeAcrossBreakpoints) {
  const auto p = three_state_time_dependent();
  const auto a = hhr::transition_probs(p, 0.05, 1.0);
  const auto b = hhr::transition_probs(p, 0.05, 1.0, hhr::TransitionMethod::Ode);
  EXPECT_LT((a - b).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(TransitionProbs, ShortHorizonRecoversGenerator) {
  const auto p = three_state_time_dependent();
  const double eps = 1e-5;
  const auto m = hhr::transition_probs(p, 0.2, 0.2 + eps);
  const Eigen::MatrixXd approx = (m - Eigen::MatrixXd::Identity(3, 3)) / eps;
  EXPECT_LT((approx - p.generator(0.2)).cwiseAbs().maxCoeff(), 1e-5);
}

TEST(TransitionProbs, TimeOrderError) {
  const auto p = hhr::term_insurance(0.02);
  try {
    hhr::transition_probs(p, 0.5, 0.2);
    FAIL();
  } catch (const hhr::Error& e) {
    EXPECT_EQ(e.kind(), hhr::ErrorKind::TimeOrder);
  }
}

TEST(ThetaRate, Examples) {
  auto term = hhr::term_insurance(0.02);
  EXPECT_DOUBLE_EQ(hhr::theta_rate(term, 0, 0.5, 100.0), 0.02);
  EXPECT_DOUBLE_EQ(hhr::theta_rate(hhr::pure_endowment(0.02), 0, 0.5, 100.0), 0.0);
  auto p = hhr::endowment_guarantee(0.02, 150.0);
  p.rate[0] = hhr::Payoff::linear(0.01);
  EXPECT_DOUBLE_EQ(hhr::theta_rate(p, 0, 0.5, 100.0), 4.0);
}

TEST(PolicySpec, CheckRejectsBadSpecs) {
  auto p = hhr::term_insurance(0.02);
  p.transitions[0].rate = hhr::PiecewiseConstant(-0.1);
  EXPECT_THROW(p.check(), hhr::Error);
  auto q = hhr::term_insurance(0.02);
  q.transitions[0].to = 0;
  EXPECT_THROW(q.check(), hhr::Error);
  auto r = hhr::term_insurance(0.02);
  r.terminal.pop_back();
  EXPECT_THROW(r.check(), hhr::Error);
}

TEST(PolicySpec, JsonRoundTripAndTemplates) {
  const hhr::ModelParams model;
  const auto p = three_state_time_dependent();
  const auto back = hhr::PolicySpec::from_json(p.to_json(), model);
  EXPECT_EQ(back.states, p.states);
  ASSERT_EQ(back.transitions.size(), p.transitions.size());
  for (double t : {0.0, 0.45, 0.8}) EXPECT_TRUE(back.generator(t).isApprox(p.generator(t)));
  const auto t = hhr::PolicySpec::from_json(nlohmann::json{{"template", "endowment_guarantee"}, {"G", 120.0}}, model);
  EXPECT_EQ(t.terminal[0](100.0), 120.0);
  EXPECT_THROW(hhr::make_template("tontine", model, nlohmann::json::object()), hhr::Error);
  EXPECT_EQ(hhr::builtin_templates(model).size(), hhr::template_names().size());
  EXPECT_EQ(p.breakpoints(0.0, 1.0), (std::vector<double>{0.4, 0.5, 0.7}));
  EXPECT_NEAR(p.max_exit_rate(), 0.03 + 0.5, 1e-15);
}

}  // namespace
