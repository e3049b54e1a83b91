#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hhr {

enum class ErrorKind {
  Range,
  StabilityViolated,
  FellerViolated,
  Domain,
  EventOverflow,
  NonMonotoneLambda,
  RhoTooLarge,
  Assumption3Violated,
  Admissibility,
  DegenerateReversion,
  HypothesisViolated,
  NonConvergence,
  CFLViolation,
  TimeOrder,
  MissingPrice,
  Config,
};

std::string_view to_string(ErrorKind kind);

// Every failure raised by the library carries a machine-readable kind so
// the CLI and the verification harness can report it without parsing text.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] void raise(ErrorKind kind, const std::string& what);

}  // namespace hhr
