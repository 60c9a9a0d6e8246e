#pragma once

#include <stdexcept>
#include <string>

namespace dcsc {

enum class ErrorKind {
  invalid_spec,
  malformed_corpus,
  malformed_sample,
  invalid_label,
  invalid_temperature,
  invalid_assignment,
  shape_mismatch,
  numeric_overflow,
  insufficient_data,
  degenerate_vector,
  usage,
  divergence,
  io,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_spec: return "invalid-spec";
    case ErrorKind::malformed_corpus: return "malformed-corpus";
    case ErrorKind::malformed_sample: return "malformed-sample";
    case ErrorKind::invalid_label: return "invalid-label";
    case ErrorKind::invalid_temperature: return "invalid-temperature";
    case ErrorKind::invalid_assignment: return "invalid-assignment";
    case ErrorKind::shape_mismatch: return "shape-mismatch";
    case ErrorKind::numeric_overflow: return "numeric-overflow";
    case ErrorKind::insufficient_data: return "insufficient-data";
    case ErrorKind::degenerate_vector: return "degenerate-vector";
    case ErrorKind::usage: return "usage";
    case ErrorKind::divergence: return "divergence";
    case ErrorKind::io: return "io";
  }
  return "unknown";
}

// All library failures are reported through this one exception type; the
// kind is stable and meant for programmatic dispatch (CLI exit payloads).
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

inline void require(bool condition, ErrorKind kind, const std::string& what) {
  if (!condition) fail(kind, what);
}

}  // namespace dcsc
