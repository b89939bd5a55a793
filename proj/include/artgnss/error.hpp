#pragma once

#include <stdexcept>
#include <string>

namespace artgnss {

enum class ErrorCode {
  InvalidArgument,
  DegenerateGeometry,
  InvalidPath,
  InsufficientSatellites,
  SingularGeometry,
  NoConvergence,
  SearchOverflow,
  MissingEpoch,
  GaugeDeficient,
  NumericalFailure,
  EmptyOverlap,
  ConfigError,
  IoError,
};

const char* to_string(ErrorCode code) noexcept;

/// Library-wide exception. Every failure mode named in the public API maps to
/// one ErrorCode so callers can branch without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace artgnss
