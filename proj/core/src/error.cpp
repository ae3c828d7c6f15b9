#include "choose4/error.hpp"

namespace choose4 {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::InvalidPattern: return "InvalidPattern";
    case ErrorCode::Arity: return "Arity";
    case ErrorCode::Infeasible: return "Infeasible";
    case ErrorCode::PatternMismatch: return "PatternMismatch";
    case ErrorCode::NonmonotoneDeaths: return "NonmonotoneDeaths";
    case ErrorCode::CholeskyFailure: return "CholeskyFailure";
    case ErrorCode::InvalidSettings: return "InvalidSettings";
    case ErrorCode::InvalidScenario: return "InvalidScenario";
    case ErrorCode::MonotoneLikelihood: return "MonotoneLikelihood";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::LimitExceeded: return "LimitExceeded";
  }
  return "Unknown";
}

}  // namespace choose4
