#include <gtest/gtest.h>

#include <fstream>

#include <nlohmann/json.hpp>

#include "hhr/config.hpp"

namespace {

hhr::ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const hhr::Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error raised";
  return hhr::ErrorKind::Range;
}

TEST(RunConfig, DefaultsRoundTrip) {
  const hhr::RunConfig c;
  const auto j = c.to_json();
  const auto back = hhr::RunConfig::from_json(j);
  EXPECT_EQ(back.to_json(), j);
  EXPECT_EQ(back.run.seed, 20240601u);
  EXPECT_EQ(back.run.steps, 252);
  EXPECT_DOUBLE_EQ(back.model.kappa, 2.0);
  EXPECT_DOUBLE_EQ(back.measure.fraction, 0.8);
  EXPECT_EQ(back.measure.level, hhr::MeasureLevel::EmQS);
}

TEST(RunConfig, UnknownKeysAreRejected) {
  EXPECT_EQ(kind_of([] { hhr::RunConfig::from_json({{"kapa", 2.0}}); }), hhr::ErrorKind::Config);
  EXPECT_EQ(kind_of([] { hhr::RunConfig::from_json({{"run", {{"path", 10}}}}); }), hhr::ErrorKind::Config);
  EXPECT_EQ(kind_of([] { hhr::RunConfig::from_json({{"run", {{"steps", 10}}}}); }), hhr::ErrorKind::Config);
  EXPECT_EQ(kind_of([] { hhr::RunConfig::from_json({{"measure", {{"fraction", 1.0}}}}); }), hhr::ErrorKind::Config);
}

TEST(RunConfig, ModelFieldsAndBreakpoints) {
  const auto c = hhr::RunConfig::from_json(
      {{"alpha", 0.25}, {"model", {{"mu_breakpoints", {{0.0, 0.05}, {0.5, 0.08}}}}}, {"jump", {{"kind", "constant"}, {"value", 0.5}}}});
  EXPECT_DOUBLE_EQ(c.model.alpha, 0.25);
  EXPECT_DOUBLE_EQ(c.model.mu(0.25), 0.05);
  EXPECT_DOUBLE_EQ(c.model.mu(0.75), 0.08);
  EXPECT_DOUBLE_EQ(hhr::jump_moment(c.jump, 1), 0.5);
  EXPECT_EQ(kind_of([] { hhr::RunConfig::from_json({{"mu", 0.05}, {"mu_breakpoints", {{0.0, 0.05}}}}); }),
            hhr::ErrorKind::Config);
  const auto back = hhr::RunConfig::from_json(c.to_json());
  EXPECT_DOUBLE_EQ(back.model.mu(0.75), 0.08);
}

TEST(RunConfig, PolicyTemplateAndDefaults) {
  const hhr::RunConfig plain;
  EXPECT_EQ(plain.policies().size(), hhr::template_names().size());
  const auto c = hhr::RunConfig::from_json({{"policy", {{"template", "term_insurance"}, {"mortality", 0.03}}}});
  const auto ps = c.policies();
  ASSERT_EQ(ps.size(), 1u);
  EXPECT_EQ(ps[0].name, "term_insurance");
  EXPECT_DOUBLE_EQ(ps[0].transitions[0].rate(0.1), 0.03);
  EXPECT_EQ(kind_of([] { hhr::RunConfig::from_json({{"policy", {{"template", "tontine"}}}}); }), hhr::ErrorKind::Config);
}

TEST(RunConfig, MeasureSelectionGate) {
  hhr::RunConfig c;
  const auto report = hhr::a_bounds(c.validated(), c.jump, c.admissibility_options());
  const auto sel = c.select(report);
  EXPECT_NEAR(sel.a, 0.8 * report.bound_EmQS.value(), 1e-15);
  c.measure.a = 2.0 * report.bound_EmQS.value();
  EXPECT_EQ(kind_of([&] { c.select(report); }), hhr::ErrorKind::Admissibility);
  c.model.alpha = 1.5;
  EXPECT_EQ(kind_of([&] { c.validated(); }), hhr::ErrorKind::StabilityViolated);
}

TEST(RunConfig, LoadsShippedConfigs) {
  for (const char* name : {"desk.json", "poisson.json"}) {
    const auto c = hhr::RunConfig::load(std::string(HHR_SOURCE_DIR) + "/configs/" + name);
    EXPECT_NO_THROW(c.validated()) << name;
  }
  std::ifstream in(std::string(HHR_SOURCE_DIR) + "/configs/disability_policy.json");
  const auto policy = hhr::PolicySpec::from_json(nlohmann::json::parse(in), hhr::ModelParams{});
  EXPECT_EQ(policy.n_states(), 3u);
  EXPECT_DOUBLE_EQ(policy.transitions[0].rate(0.75), 0.015);
  EXPECT_EQ(policy.terminal[0](80.0), 100.0);
  EXPECT_EQ(kind_of([] { hhr::RunConfig::load("/nonexistent/config.json"); }), hhr::ErrorKind::Config);
}

}  // namespace
