#pragma once

#include <stdexcept>
#include <string>

namespace curvctmc {

enum class ErrorCode {
  DimensionMismatch,
  InvalidArgument,
  Reducible,
  NotNormalized,
  SeriesCapExceeded,
  NegativeKernelEntry,
  TruncationTail,
  InvalidCertificate,
  IncompatibleBound,
  BracketFailure,
  Config,
};

const char* to_string(ErrorCode code) noexcept;

/// Error raised by every library operation. The code lets the CLI map
/// failures onto exit statuses without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace curvctmc
