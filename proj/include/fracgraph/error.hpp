#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fracgraph {

enum class ErrorCategory {
  validation,
  io,
  numerical,
  precondition,
  convergence,
  unsupported,
};

inline std::string_view category_name(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::validation: return "validation";
    case ErrorCategory::io: return "io";
    case ErrorCategory::numerical: return "numerical";
    case ErrorCategory::precondition: return "precondition";
    case ErrorCategory::convergence: return "convergence";
    case ErrorCategory::unsupported: return "unsupported";
  }
  return "unknown";
}

/// Every failure raised by the library carries a category so that the CLI can
/// emit a machine-parsable first token.
class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& message)
      : std::runtime_error(message), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

[[noreturn]] inline void fail(ErrorCategory c, const std::string& message) {
  throw Error(c, message);
}

}  // namespace fracgraph
