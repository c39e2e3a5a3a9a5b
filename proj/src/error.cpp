#include "emm/error.hpp"

namespace emm {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonUniformSpacing: return "NonUniformSpacing";
    case ErrorCode::BadShape: return "BadShape";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::AllNeighborsMasked: return "AllNeighborsMasked";
    case ErrorCode::EmptyRegion: return "EmptyRegion";
    case ErrorCode::SupportOutsideDomain: return "SupportOutsideDomain";
    case ErrorCode::BallOutsideDomain: return "BallOutsideDomain";
    case ErrorCode::ConstantField: return "ConstantField";
    case ErrorCode::NearZeroVector: return "NearZeroVector";
    case ErrorCode::InvalidBoundary: return "InvalidBoundary";
    case ErrorCode::InvalidParameters: return "InvalidParameters";
    case ErrorCode::StepCollapse: return "StepCollapse";
    case ErrorCode::RadiusBelowResolution: return "RadiusBelowResolution";
    case ErrorCode::DegenerateAnnulus: return "DegenerateAnnulus";
    case ErrorCode::RescaleOutOfDomain: return "RescaleOutOfDomain";
    case ErrorCode::NoSeparation: return "NoSeparation";
    case ErrorCode::EmptyCloud: return "EmptyCloud";
    case ErrorCode::EmptySingularSet: return "EmptySingularSet";
    case ErrorCode::UnknownSuite: return "UnknownSuite";
    case ErrorCode::Unsupported: return "Unsupported";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

}  // namespace emm
