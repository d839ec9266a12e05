#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace stochmap {

enum class ErrorKind {
  InvalidValue,
  ShapeMismatch,
  ConventionMismatch,
  SingularOrientation,
  NumericalFailure,
  NonPositiveDefinite,
  ZeroVariance,
  CorrelationOutOfRange,
  UnknownEntity,
  KindMismatch,
  InnovationNotPD,
  DuplicateEntity,
};

std::string_view to_string(ErrorKind kind);

/// Every failure raised by the library carries one of the kinds above so
/// callers (the CLI in particular) can report it without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace stochmap
