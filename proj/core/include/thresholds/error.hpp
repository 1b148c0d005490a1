#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace thresholds {

enum class ErrorCode {
  // data ingestion
  UnknownItem,
  ValueOutOfSupport,
  EmptyItem,
  EmptyPerson,
  MalformedCsv,
  DegenerateRange,
  // math kernels
  NotANumber,
  ProbabilityOutOfRange,
  OutOfSupport,
  NotDifferentiable,
  OutOfRange,
  NonMonotoneInput,
  // likelihood / estimation
  ZeroDerivative,
  NonFiniteLikelihood,
  WrongMode,
  SingularInformation,
  NotNested,
  NotConverged,
  NoObservedItems,
  // configuration and I/O
  InvalidConfig,
  Io,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library carries a code so callers (the CLI in
/// particular) can map it to an exit status without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace thresholds
