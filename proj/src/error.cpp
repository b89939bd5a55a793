#include "artgnss/error.hpp"

namespace artgnss {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::DegenerateGeometry: return "DegenerateGeometry";
    case ErrorCode::InvalidPath: return "InvalidPath";
    case ErrorCode::InsufficientSatellites: return "InsufficientSatellites";
    case ErrorCode::SingularGeometry: return "SingularGeometry";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::SearchOverflow: return "SearchOverflow";
    case ErrorCode::MissingEpoch: return "MissingEpoch";
    case ErrorCode::GaugeDeficient: return "GaugeDeficient";
    case ErrorCode::NumericalFailure: return "NumericalFailure";
    case ErrorCode::EmptyOverlap: return "EmptyOverlap";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

}  // namespace artgnss
