#pragma once

#include <stdexcept>
#include <string>

namespace pvarmix {

enum class ErrorKind {
  invalid_parameter,
  domain_error,
  dimension_mismatch,
  numeric_failure,
  degenerate_input,
  rejection_overflow,
  insufficient_draws,
  non_stationary_dgp,
  io_error,
  config_error,
};

const char* to_string(ErrorKind kind);

// Every failure raised by the library carries a kind so callers (and the CLI
// exit code) can tell numerical trouble apart from bad input.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool ok, ErrorKind kind, const std::string& what) {
  if (!ok) fail(kind, what);
}

}  // namespace pvarmix
