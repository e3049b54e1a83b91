#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hhr/config.hpp"

namespace hhr {

// closed_form, exact_identity or independent_oracle.
struct CheckResult {
  std::string name;
  int group = 0;                 // 1..7 in suite order, 8 for the admissibility ledger
  std::optional<int> criterion;  // acceptance criterion this check decides
  std::string claim;
  nlohmann::json values = nlohmann::json::object();
  nlohmann::json reference = nlohmann::json::object();
  std::string reference_kind;
  nlohmann::json tolerance = nlohmann::json::object();
  bool pass = false;
  bool hard = true;
  bool skipped = false;
  bool statistical = false;
  int attempts = 1;
  std::uint64_t seed = 0;
  std::string note;
  double seconds = 0.0;

  std::string status() const { return skipped ? "skipped" : (pass ? "pass" : "fail"); }
};

struct VerificationReport {
  nlohmann::json config;
  nlohmann::json admissibility;
  double a = 0.0;
  std::vector<CheckResult> checks;

  bool all_hard_pass() const;
  // Deterministic for a fixed config: wall times live in timing_json().
  nlohmann::json to_json() const;
  nlohmann::json timing_json() const;
  std::string table() const;
};

struct VerificationOptions {
  // Run only checks whose name is listed (all when empty).
  std::vector<std::string> only;
  std::function<void(const CheckResult&)> on_check;
};

// Names of the checks in suite order.
std::vector<std::string> check_names();

// Throws the admissibility gate's error (AdmissibilityError, RhoTooLarge,
// Assumption3Violated) before any check runs; check failures never throw.
VerificationReport run_verification(const RunConfig& config, const VerificationOptions& options = {});

}  // namespace hhr
