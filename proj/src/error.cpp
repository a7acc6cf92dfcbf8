#include "soullab/error.hpp"

namespace soullab {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::PointTooCloseToBoundary: return "PointTooCloseToBoundary";
    case ErrorKind::SingularMetric: return "SingularMetric";
    case ErrorKind::DegeneratePlane: return "DegeneratePlane";
    case ErrorKind::LeftChartDomain: return "LeftChartDomain";
    case ErrorKind::NonFiniteFieldValue: return "NonFiniteFieldValue";
    case ErrorKind::EmptySample: return "EmptySample";
    case ErrorKind::InvalidProfile: return "InvalidProfile";
    case ErrorKind::NonSmoothVertex: return "NonSmoothVertex";
    case ErrorKind::OutOfDomain: return "OutOfDomain";
    case ErrorKind::NonPositiveScale: return "NonPositiveScale";
    case ErrorKind::NegativeSquaredNorm: return "NegativeSquaredNorm";
    case ErrorKind::FrameDegeneracy: return "FrameDegeneracy";
    case ErrorKind::RescaleNotInvertible: return "RescaleNotInvertible";
    case ErrorKind::DegenerateFiber: return "DegenerateFiber";
    case ErrorKind::OutOfRange: return "OutOfRange";
    case ErrorKind::NotMeanZero: return "NotMeanZero";
    case ErrorKind::ZeroZ: return "ZeroZ";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::ConfigError: return "ConfigError";
    case ErrorKind::IOError: return "IOError";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

void raise(ErrorKind kind, const std::string& message) { throw Error(kind, message); }

}  // namespace soullab
