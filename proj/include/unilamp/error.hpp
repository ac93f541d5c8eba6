#pragma once

#include <stdexcept>
#include <string>

namespace unilamp {

/// Failure categories. The CLI maps these onto exit codes.
enum class ErrorKind {
  invalid_dimension,
  invalid_input,
  out_of_range,
  size_limit,
  calibration_failure,
  numeric_failure,
  io_error,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool condition, ErrorKind kind, const std::string& what) {
  if (!condition) fail(kind, what);
}

}  // namespace unilamp
