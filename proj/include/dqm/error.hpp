#pragma once

#include <stdexcept>
#include <string>

namespace dqm {

enum class ErrorKind {
  invalid_argument,
  unknown_id,
  applicability,
  prerequisite,
  insufficient_data,
  not_implemented,
  unanswered,
  parse,
  io,
};

const char* to_string(ErrorKind kind);

/// Every failure raised by the library. The kind lets callers (the CLI, the
/// report assembler) map failures to exit codes or per-metric error notes.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_argument: return "invalid_argument";
    case ErrorKind::unknown_id: return "unknown_id";
    case ErrorKind::applicability: return "applicability";
    case ErrorKind::prerequisite: return "prerequisite";
    case ErrorKind::insufficient_data: return "insufficient_data";
    case ErrorKind::not_implemented: return "not_implemented";
    case ErrorKind::unanswered: return "unanswered";
    case ErrorKind::parse: return "parse";
    case ErrorKind::io: return "io";
  }
  return "unknown";
}

}  // namespace dqm
