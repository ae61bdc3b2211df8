#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace specquant {

enum class ErrorCode {
  kConfiguration,
  kDimension,
  kParse,
  kDomain,
  kDegenerateGas,
  kDegenerateLibrary,
  kSchema,
  kBound,
  kUnderdetermined,
  kConditioning,
  kConvergence,
  kVersion,
  kTruncated,
  kFingerprint,
  kIo,
};

/// Short machine-readable token, used in CLI diagnostics (`ERROR[<token>]: ...`).
std::string_view error_token(ErrorCode code);

/// True for failures of the numerics (conditioning, convergence, singular
/// systems) as opposed to bad input or configuration.
bool is_numerical(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Numerical failures that carry a condition-number estimate.
class ConditioningError : public Error {
 public:
  ConditioningError(const std::string& message, double condition_number)
      : Error(ErrorCode::kConditioning, message), condition_number_(condition_number) {}

  double condition_number() const noexcept { return condition_number_; }

 private:
  double condition_number_;
};

}  // namespace specquant
