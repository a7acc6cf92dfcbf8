#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace soullab {

enum class ErrorKind {
  PointTooCloseToBoundary,
  SingularMetric,
  DegeneratePlane,
  LeftChartDomain,
  NonFiniteFieldValue,
  EmptySample,
  InvalidProfile,
  NonSmoothVertex,
  OutOfDomain,
  NonPositiveScale,
  NegativeSquaredNorm,
  FrameDegeneracy,
  RescaleNotInvertible,
  DegenerateFiber,
  OutOfRange,
  NotMeanZero,
  ZeroZ,
  InvalidArgument,
  ConfigError,
  IOError,
};

std::string_view to_string(ErrorKind kind);

/// Every failure raised by the library carries one of the kinds above so
/// callers (tests, the CLI exit-code mapping) can dispatch on it.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] void raise(ErrorKind kind, const std::string& message);

}  // namespace soullab
