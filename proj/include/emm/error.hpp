#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace emm {

enum class ErrorCode {
  NonUniformSpacing,
  BadShape,
  DimensionMismatch,
  AllNeighborsMasked,
  EmptyRegion,
  SupportOutsideDomain,
  BallOutsideDomain,
  ConstantField,
  NearZeroVector,
  InvalidBoundary,
  InvalidParameters,
  StepCollapse,
  RadiusBelowResolution,
  DegenerateAnnulus,
  RescaleOutOfDomain,
  NoSeparation,
  EmptyCloud,
  EmptySingularSet,
  UnknownSuite,
  Unsupported,
  ParseError,
  ConfigError,
  IoError,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library carries one of the codes above so the
/// CLI can map it to an exit status and a diagnostic.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace emm
