#include <gtest/gtest.h>

#include <cmath>

#include <nlohmann/json.hpp>

#include "hhr/thiele.hpp"

namespace {

struct Desk {
  hhr::ValidatedModel model;
  hhr::JumpDistribution dist = hhr::JumpDistribution::exponential(1.0);
  hhr::MeasureSelection sel;
  explicit Desk(double T = 1.0, double fraction = 0.8) : model(make(T)), sel(select(model, dist, fraction)) {}
  static hhr::ValidatedModel make(double T) {
    hhr::ModelParams p;
    p.T = T;
    return hhr::validate_or_throw(p);
  }
  static hhr::MeasureSelection select(const hhr::ValidatedModel& m, const hhr::JumpDistribution& d, double f) {
    const auto r = hhr::a_bounds(m, d);
    return hhr::select_measure(r, f * r.bound_E, hhr::MeasureLevel::E);
  }
};

hhr::ReserveOptions small() {
  hhr::ReserveOptions o;
  o.grid = {32, 24, 12, 6};
  o.simpson_panels = 16;
  return o;
}

TEST(Reserve, ZeroPolicyIsZeroBothWays) {
  const Desk s;
  const auto zero = hhr::term_insurance(0.02, hhr::Payoff::zero());
  for (const auto& r : {hhr::reserve_quadrature(zero, s.model, s.dist, s.sel, small()),
                        hhr::solve_thiele_pide(zero, s.model, s.dist, s.sel, small())}) {
    for (const auto& f : r.values)
      for (double v : f) EXPECT_EQ(v, 0.0);
  }
}

TEST(Reserve, UnitTerminalBenefitDiscounts) {
  const Desk s(1.0, 0.0);
  hhr::PolicySpec unit;
  unit.name = "unit";
  unit.states = {"alive"};
  unit.terminal = {hhr::Payoff::constant(1.0)};
  unit.rate = {hhr::Payoff::zero()};
  const auto o = small();
  const double expected = std::exp(-0.03);
  for (const auto& r : {hhr::reserve_quadrature(unit, s.model, s.dist, s.sel, o),
                        hhr::solve_thiele_pide(unit, s.model, s.dist, s.sel, o)}) {
    for (double v : r.values[0]) EXPECT_NEAR(v, expected, 1e-6);
  }
}

TEST(Reserve, TermInsuranceClassicalReduction) {
  const Desk s(10.0, 0.0);
  const auto term = hhr::term_insurance(0.02);
  const double closed = 0.02 / 0.05 * (1.0 - std::exp(-0.5));
  const auto q = hhr::reserve_quadrature(term, s.model, s.dist, s.sel, small());
  const auto p = hhr::solve_thiele_pide(term, s.model, s.dist, s.sel, small());
  EXPECT_NEAR(q.value_at(0, 100.0, 0.04, 1.0), closed, 1e-4);
  EXPECT_NEAR(p.value_at(0, 100.0, 0.04, 1.0), closed, 1e-4);
  EXPECT_NEAR(q.values[1][0], 0.0, 0.0);
}

TEST(Reserve, CrossValidationOnBuiltinTemplates) {
  const Desk s;
  for (const auto& policy : hhr::builtin_templates(s.model.params())) {
    const auto q = hhr::reserve_quadrature(policy, s.model, s.dist, s.sel, small());
    const auto p = hhr::solve_thiele_pide(policy, s.model, s.dist, s.sel, small());
    const auto cv = hhr::cross_validate(q, p, s.model.params());
    EXPECT_EQ(cv.probes.size(), 27u * policy.n_states());
    EXPECT_TRUE(cv.pass) << policy.name << " " << cv.max_rel_diff;
    for (const auto& f : q.values)
      for (double v : f) EXPECT_GE(v, 0.0);
  }
}

TEST(Reserve, ProbePointsSpanThreeNodesPerAxis) {
  const Desk s;
  const auto g = hhr::reserve_grid(s.model, hhr::pure_endowment(0.02), small());
  const auto pts = hhr::probe_points(g, s.model.params());
  ASSERT_EQ(pts.size(), 27u);
  EXPECT_DOUBLE_EQ(pts[13].x, 100.0);
  EXPECT_DOUBLE_EQ(pts[13].y, 0.04);
  EXPECT_DOUBLE_EQ(pts[13].z, g.z[pts[13].k]);
  EXPECT_LT(pts[0].x, pts[1].x);
  EXPECT_LT(pts[0].y, pts[3].y);
  EXPECT_LT(pts[0].z, pts[9].z);
}

TEST(Reserve, MonotoneInGuarantee) {
  const Desk s;
  double prev = 0.0;
  for (double G : {80.0, 100.0, 120.0}) {
    const auto r = hhr::reserve_quadrature(hhr::endowment_guarantee(0.02, G), s.model, s.dist, s.sel, small());
    const double v = r.value_at(0, 100.0, 0.04, 1.0);
    EXPECT_GE(v, prev);
    prev = v;
  }
}

TEST(Reserve, RichardsonDoublingAndMissingPrice) {
  const Desk s;
  const auto policy = hhr::endowment_guarantee(0.02, 100.0);
  auto o = small();
  o.richardson_budget = 0.0;
  const auto r = hhr::reserve_quadrature(policy, s.model, s.dist, s.sel, o);
  EXPECT_EQ(r.simpson_panels, 32);
  const auto grid = hhr::reserve_grid(s.model, policy, o);
  const auto lib = hhr::build_price_library(policy, s.model, s.dist, s.sel, grid, 16, o.theta);
  try {
    lib.layer(hhr::Payoff::linear(), 0, 16);
    FAIL();
  } catch (const hhr::Error& e) {
    EXPECT_EQ(e.kind(), hhr::ErrorKind::MissingPrice);
  }
  EXPECT_THROW(lib.layer(policy.terminal[0], 1, 32), hhr::Error);
}

TEST(Reserve, EquivalencePremium) {
  const Desk s;
  const auto pr = hhr::equivalence_premium(hhr::pure_endowment(0.02), s.model, s.dist, s.sel, small());
  EXPECT_NEAR(pr.benefit_value, 100.0 * std::exp(-0.02), 1e-6);
  EXPECT_NEAR(pr.annuity_value, (1.0 - std::exp(-0.05)) / 0.05, 1e-6);
  EXPECT_NEAR(pr.premium, pr.benefit_value / pr.annuity_value, 1e-12);
}

}  // namespace
