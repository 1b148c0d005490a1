#include "thresholds/error.hpp"

namespace thresholds {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::UnknownItem: return "UnknownItem";
    case ErrorCode::ValueOutOfSupport: return "ValueOutOfSupport";
    case ErrorCode::EmptyItem: return "EmptyItem";
    case ErrorCode::EmptyPerson: return "EmptyPerson";
    case ErrorCode::MalformedCsv: return "MalformedCsv";
    case ErrorCode::DegenerateRange: return "DegenerateRange";
    case ErrorCode::NotANumber: return "NotANumber";
    case ErrorCode::ProbabilityOutOfRange: return "ProbabilityOutOfRange";
    case ErrorCode::OutOfSupport: return "OutOfSupport";
    case ErrorCode::NotDifferentiable: return "NotDifferentiable";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::NonMonotoneInput: return "NonMonotoneInput";
    case ErrorCode::ZeroDerivative: return "ZeroDerivative";
    case ErrorCode::NonFiniteLikelihood: return "NonFiniteLikelihood";
    case ErrorCode::WrongMode: return "WrongMode";
    case ErrorCode::SingularInformation: return "SingularInformation";
    case ErrorCode::NotNested: return "NotNested";
    case ErrorCode::NotConverged: return "NotConverged";
    case ErrorCode::NoObservedItems: return "NoObservedItems";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace thresholds
