#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ami {

enum class ErrorCode {
  InvalidArgument,
  InvalidInertia,
  NoIntersection,
  Unreachable,
  OutOfLimits,
  Singular,
  NonFinite,
  DegenerateCloud,
  UnknownLabel,
  CatalogError,
  PoleOnAxis,
  NoCrossover,
  NeverConverged,
  MismatchedRuns,
  ConfigError,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Single exception type for the library. The code identifies the failure
/// class so callers can branch without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace ami
