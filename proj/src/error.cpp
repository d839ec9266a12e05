#include "stochmap/error.hpp"

namespace stochmap {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidValue: return "InvalidValue";
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::ConventionMismatch: return "ConventionMismatch";
    case ErrorKind::SingularOrientation: return "SingularOrientation";
    case ErrorKind::NumericalFailure: return "NumericalFailure";
    case ErrorKind::NonPositiveDefinite: return "NonPositiveDefinite";
    case ErrorKind::ZeroVariance: return "ZeroVariance";
    case ErrorKind::CorrelationOutOfRange: return "CorrelationOutOfRange";
    case ErrorKind::UnknownEntity: return "UnknownEntity";
    case ErrorKind::KindMismatch: return "KindMismatch";
    case ErrorKind::InnovationNotPD: return "InnovationNotPD";
    case ErrorKind::DuplicateEntity: return "DuplicateEntity";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

}  // namespace stochmap
