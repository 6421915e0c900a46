#include "febvp/error.hpp"

namespace febvp {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::StepSizeUnderflow: return "StepSizeUnderflow";
    case ErrorCode::MaxStepsExceeded: return "MaxStepsExceeded";
    case ErrorCode::NonFiniteRhs: return "NonFiniteRhs";
    case ErrorCode::OutOfSpan: return "OutOfSpan";
    case ErrorCode::ConjugatePoint: return "ConjugatePoint";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::DegenerateBasis: return "DegenerateBasis";
    case ErrorCode::EvaluationFailure: return "EvaluationFailure";
    case ErrorCode::MidpointViolation: return "MidpointViolation";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::UnboundReference: return "UnboundReference";
    case ErrorCode::EvaluationError: return "EvaluationError";
  }
  return "Unknown";
}

bool Error::is_numeric() const noexcept {
  switch (code_) {
    case ErrorCode::InvalidArgument:
    case ErrorCode::ParseError:
    case ErrorCode::UnboundReference:
      return false;
    default:
      return true;
  }
}

}  // namespace febvp
