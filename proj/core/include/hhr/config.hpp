#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hhr/core_model.hpp"
#include "hhr/grid.hpp"
#include "hhr/life_markov.hpp"
#include "hhr/measure_change.hpp"

namespace hhr {

struct Tolerances {
  double k_se = 3.0;
  double pide_linear = 1e-3;
  double pide_constant = 1e-6;
  double oracle_rel = 0.02;
  double hyp1f1_rel = 1e-9;
  double pide_mc_rel = 0.01;
  double thiele_rel = 0.01;
  double thiele_classical_abs = 1e-4;
  double moment_drift = 0.05;
  double c_l_agreement = 1e-10;
};

struct RunSettings {
  std::uint64_t seed = 20240601;
  std::size_t paths = 100000;
  int steps = 252;
  std::size_t price_paths = 200000;
  std::size_t girsanov_paths = 50000;
  std::size_t oracle_samples = 1000000;
  std::size_t oracle_paths = 100000;
  int oracle_steps = 400;
  GridSize grid{};
  GridSize reserve_grid{64, 40, 20, 10};
  std::string output_dir = "out";
  int threads = 0;
  Tolerances tolerances{};
};

struct MeasureConfig {
  std::optional<double> a;  // explicit Girsanov coefficient; otherwise fraction * bound
  double fraction = 0.8;
  MeasureLevel level = MeasureLevel::EmQS;
  double epsilon1 = 0.1;
  double epsilon2 = 0.1;
};

struct RunConfig {
  ModelParams model{};
  JumpDistribution jump = JumpDistribution::exponential(1.0);
  MeasureConfig measure{};
  std::optional<nlohmann::json> policy;
  RunSettings run{};

  // Unknown keys and malformed values raise ErrorKind::Config.
  static RunConfig from_json(const nlohmann::json& j);
  static RunConfig load(const std::string& path);
  nlohmann::json to_json() const;

  ValidatedModel validated() const;
  AdmissibilityOptions admissibility_options() const;
  // The configured a (explicit, or fraction of the level bound), certified.
  MeasureSelection select(const AdmissibilityReport& report) const;
  // The configured policy, or every built-in template when none is given.
  std::vector<PolicySpec> policies() const;
};

JumpDistribution jump_from_json(const nlohmann::json& j);
nlohmann::json jump_to_json(const JumpDistribution& dist);

}  // namespace hhr
