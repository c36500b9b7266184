#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace panelcf {

enum class ErrorCode {
  InvalidArgument,
  Io,
  Parse,
  MissingCell,
  DuplicateCell,
  UnknownTreatedUnit,
  T0OutOfRange,
  NonFiniteInput,
  PeriodBeforeTreatment,
  KOutOfRange,
  NonPositiveLambda,
  UnsupportedMethod,
  DimensionMismatch,
  NotConverged,
  DegenerateSide,
  HrkUndefined,
  NegativeVariance,
  EmptyAverage,
  DegenerateDgp,
};

// Coarse grouping used for process exit codes: config = 2, data = 3,
// numerical = 4.
enum class ErrorCategory { Config, Data, Numerical };

enum class Side { Hz, Vt };

std::string_view to_string(ErrorCode code);
std::string_view to_string(Side side);
ErrorCategory category_of(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }
  ErrorCategory category() const noexcept { return category_of(code_); }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

}  // namespace panelcf
