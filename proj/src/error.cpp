#include "nhoc/error.hpp"

namespace nhoc {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::RankDeficient: return "RankDeficient";
    case ErrorKind::SingularMetric: return "SingularMetric";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::NonFiniteState: return "NonFiniteState";
    case ErrorKind::ConstraintViolated: return "ConstraintViolated";
    case ErrorKind::SingularHessian: return "SingularHessian";
    case ErrorKind::NewtonDivergence: return "NewtonDivergence";
    case ErrorKind::FixedPointDivergence: return "FixedPointDivergence";
    case ErrorKind::SingularJacobian: return "SingularJacobian";
    case ErrorKind::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::ValidationError: return "ValidationError";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

void fail(ErrorKind kind, const std::string& message) { throw Error(kind, message); }

}  // namespace nhoc
