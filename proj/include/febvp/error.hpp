#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace febvp {

enum class ErrorCode {
  InvalidArgument,
  StepSizeUnderflow,
  MaxStepsExceeded,
  NonFiniteRhs,
  OutOfSpan,
  ConjugatePoint,
  NoConvergence,
  DegenerateBasis,
  EvaluationFailure,
  MidpointViolation,
  ParseError,
  UnboundReference,
  EvaluationError,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Base of every error raised by the library. `context` carries a short
/// machine-readable description of where the failure happened.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::string context = {})
      : std::runtime_error(message), code_(code), context_(std::move(context)) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& context() const noexcept { return context_; }

  /// True for failures of the numerical method itself (as opposed to bad input).
  bool is_numeric() const noexcept;

 private:
  ErrorCode code_;
  std::string context_;
};

}  // namespace febvp
