#include "hhr/error.hpp"

namespace hhr {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Range: return "RangeError";
    case ErrorKind::StabilityViolated: return "StabilityViolated";
    case ErrorKind::FellerViolated: return "FellerViolated";
    case ErrorKind::Domain: return "DomainError";
    case ErrorKind::EventOverflow: return "EventOverflow";
    case ErrorKind::NonMonotoneLambda: return "NonMonotoneLambda";
    case ErrorKind::RhoTooLarge: return "RhoTooLarge";
    case ErrorKind::Assumption3Violated: return "Assumption3Violated";
    case ErrorKind::Admissibility: return "AdmissibilityError";
    case ErrorKind::DegenerateReversion: return "DegenerateReversion";
    case ErrorKind::HypothesisViolated: return "HypothesisViolated";
    case ErrorKind::NonConvergence: return "NonConvergence";
    case ErrorKind::CFLViolation: return "CFLViolation";
    case ErrorKind::TimeOrder: return "TimeOrderError";
    case ErrorKind::MissingPrice: return "MissingPrice";
    case ErrorKind::Config: return "ConfigError";
  }
  return "UnknownError";
}

void raise(ErrorKind kind, const std::string& what) {
  throw Error(kind, std::string(to_string(kind)) + ": " + what);
}

}  // namespace hhr
