#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace vbquant {

enum class ErrorKind {
  InvalidArgument,
  PoleNotInOverlap,
  AccuracyFailure,
  ChartError,
  ConfigurationError,
  UnsupportedPolarization,
  ParseError,
  ValidationError,
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "invalid-argument";
    case ErrorKind::PoleNotInOverlap: return "pole-not-in-overlap";
    case ErrorKind::AccuracyFailure: return "accuracy-failure";
    case ErrorKind::ChartError: return "chart-error";
    case ErrorKind::ConfigurationError: return "configuration-error";
    case ErrorKind::UnsupportedPolarization: return "unsupported-polarization";
    case ErrorKind::ParseError: return "parse-error";
    case ErrorKind::ValidationError: return "validation-error";
  }
  return "unknown";
}

/// All library failures are reported through this exception; callers branch
/// on kind() rather than on the message text.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace vbquant
