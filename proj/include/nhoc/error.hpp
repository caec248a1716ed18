#pragma once

#include <stdexcept>
#include <string>

namespace nhoc {

enum class ErrorKind {
  RankDeficient,
  SingularMetric,
  DimensionMismatch,
  NonFiniteState,
  ConstraintViolated,
  SingularHessian,
  NewtonDivergence,
  FixedPointDivergence,
  SingularJacobian,
  NotPositiveDefinite,
  ParseError,
  ValidationError,
  InvalidArgument,
};

const char* to_string(ErrorKind kind);

/// Every failure raised by the library carries one of the kinds above; the
/// message starts with the kind name so it can be matched in CLI output.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& message);

}  // namespace nhoc
