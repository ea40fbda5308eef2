#pragma once

#include <stdexcept>
#include <string>

namespace htpkit {

enum class ErrorCode {
  invalid_argument,
  degenerate_column,
  infeasible_sparsity,
  singular_submatrix,
  zero_deflation_column,
  empty_inner_estimate,
  degenerate_deflation,
  enumeration_too_large,
  assumption_violation,
  zero_column_detected,
  degenerate_sample,
  threshold_undefined,
  zero_signal,
  singular_leading_block,
  io,
};

const char* to_string(ErrorCode code);

// Every failure raised by the library carries a code so callers (the phase
// harness in particular) can tag failures without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace htpkit
