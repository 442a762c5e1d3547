#pragma once

#include <stdexcept>
#include <string>

namespace gexp {

// Stable numeric codes; the C API returns these verbatim.
enum class ErrorCode : int {
  ok = 0,
  parse = 1,
  invalid_argument = 2,
  degenerate_set = 3,
  degenerate_domain = 4,
  not_unital = 5,
  not_symmetric = 6,
  invalid_range = 7,
  missing_level = 8,
  outside_family = 9,
  numerical_failure = 10,
  not_normalized = 11,
  has_zero_set = 12,
  insufficient_instruments = 13,
  window_exceeded = 14,
  invalid_path = 15,
  invariant_violation = 16,
  io = 17,
  internal = 18,
};

const char* error_code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace gexp
