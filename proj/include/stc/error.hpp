#pragma once

#include <stdexcept>
#include <string>

namespace stc {

enum class ErrorKind {
  DuplicateThreadId,
  UnknownFunction,
  ConflictingVertex,
  UnknownThreadId,
  PathMismatch,
  TypeError,
  RepeatedLetter,
  FlagMismatch,
  ChannelClosed,
  ParseError,
  SchemaError,
  ValidationError,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::DuplicateThreadId: return "DuplicateThreadId";
    case ErrorKind::UnknownFunction: return "UnknownFunction";
    case ErrorKind::ConflictingVertex: return "ConflictingVertex";
    case ErrorKind::UnknownThreadId: return "UnknownThreadId";
    case ErrorKind::PathMismatch: return "PathMismatch";
    case ErrorKind::TypeError: return "TypeError";
    case ErrorKind::RepeatedLetter: return "RepeatedLetter";
    case ErrorKind::FlagMismatch: return "FlagMismatch";
    case ErrorKind::ChannelClosed: return "ChannelClosed";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::SchemaError: return "SchemaError";
    case ErrorKind::ValidationError: return "ValidationError";
  }
  return "Unknown";
}

/// Every failure raised by the library. `kind()` is stable and meant for
/// dispatch; `what()` is a human-readable diagnostic prefixed with the kind.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& detail)
      : std::runtime_error(std::string(to_string(kind)) + ": " + detail), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

  /// Validation-class errors are reported by the CLI with exit code 2, the
  /// rest are runtime failures (exit code 3).
  bool is_validation() const noexcept {
    switch (kind_) {
      case ErrorKind::TypeError:
      case ErrorKind::FlagMismatch:
      case ErrorKind::ChannelClosed:
        return false;
      default:
        return true;
    }
  }

 private:
  ErrorKind kind_;
};

}  // namespace stc
