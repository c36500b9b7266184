#include "panelcf/error.hpp"

namespace panelcf {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Io: return "Io";
    case ErrorCode::Parse: return "Parse";
    case ErrorCode::MissingCell: return "MissingCell";
    case ErrorCode::DuplicateCell: return "DuplicateCell";
    case ErrorCode::UnknownTreatedUnit: return "UnknownTreatedUnit";
    case ErrorCode::T0OutOfRange: return "T0OutOfRange";
    case ErrorCode::NonFiniteInput: return "NonFiniteInput";
    case ErrorCode::PeriodBeforeTreatment: return "PeriodBeforeTreatment";
    case ErrorCode::KOutOfRange: return "KOutOfRange";
    case ErrorCode::NonPositiveLambda: return "NonPositiveLambda";
    case ErrorCode::UnsupportedMethod: return "UnsupportedMethod";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NotConverged: return "NotConverged";
    case ErrorCode::DegenerateSide: return "DegenerateSide";
    case ErrorCode::HrkUndefined: return "HrkUndefined";
    case ErrorCode::NegativeVariance: return "NegativeVariance";
    case ErrorCode::EmptyAverage: return "EmptyAverage";
    case ErrorCode::DegenerateDgp: return "DegenerateDgp";
  }
  return "Unknown";
}

std::string_view to_string(Side side) { return side == Side::Hz ? "HZ" : "VT"; }

ErrorCategory category_of(ErrorCode code) {
  switch (code) {
    case ErrorCode::Io:
    case ErrorCode::Parse:
    case ErrorCode::MissingCell:
    case ErrorCode::DuplicateCell:
    case ErrorCode::UnknownTreatedUnit:
    case ErrorCode::T0OutOfRange:
    case ErrorCode::NonFiniteInput:
      return ErrorCategory::Data;
    case ErrorCode::NotConverged:
    case ErrorCode::DegenerateSide:
    case ErrorCode::HrkUndefined:
    case ErrorCode::NegativeVariance:
    case ErrorCode::EmptyAverage:
    case ErrorCode::DegenerateDgp:
      return ErrorCategory::Numerical;
    default:
      return ErrorCategory::Config;
  }
}

void fail(ErrorCode code, const std::string& message) {
  throw Error(code, std::string(to_string(code)) + ": " + message);
}

}  // namespace panelcf
