#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cdrag {

enum class ErrorCode {
  InvalidArgument,
  NotFound,
  BackendUnavailable,
  FixtureSchemaInvalid,
  DegenerateContact,
  InvalidChain,
  InvalidDrag,
  ParseError,
  UndefinedMetric,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "invalid-argument";
    case ErrorCode::NotFound: return "not-found";
    case ErrorCode::BackendUnavailable: return "backend-unavailable";
    case ErrorCode::FixtureSchemaInvalid: return "fixture-schema-invalid";
    case ErrorCode::DegenerateContact: return "degenerate-contact";
    case ErrorCode::InvalidChain: return "invalid-chain";
    case ErrorCode::InvalidDrag: return "invalid-drag";
    case ErrorCode::ParseError: return "parse-error";
    case ErrorCode::UndefinedMetric: return "undefined-metric";
  }
  return "unknown";
}

/// Every failure raised by the library carries one of the codes above so the
/// CLI and HTTP layers can map it to an exit code or status class.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  [[nodiscard]] ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace cdrag
