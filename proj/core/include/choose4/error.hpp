#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace choose4 {

enum class ErrorCode {
  DomainError,
  InvalidPattern,
  Arity,
  Infeasible,
  PatternMismatch,
  NonmonotoneDeaths,
  CholeskyFailure,
  InvalidSettings,
  InvalidScenario,
  MonotoneLikelihood,
  ConfigError,
  LimitExceeded,
};

std::string_view to_string(ErrorCode code) noexcept;

// Every failure raised by the library carries a machine-readable code so the
// CLI and the HTTP facade can map it to exit statuses / problem documents.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace choose4
