#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace plmtest {

enum class ErrorCode {
  dimension_mismatch,
  non_finite_entry,
  constant_column,
  too_few_rows,
  rho_out_of_range,
  sparsity_exceeds_dimension,
  dimension_too_small,
  non_convergence,
  unknown_method,
  nonpositive_variance_estimate,
  domain_error,
  config_error,
  parse_error,
  index_out_of_range,
  io_error,
};

std::string_view to_string(ErrorCode code) noexcept;

// Every library failure is reported through this type; `code()` lets callers
// branch (the CLI maps codes to exit statuses, the harness retries numerical
// failures).
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

  // True for failures caused by an unlucky random draw rather than bad input.
  bool is_numerical() const noexcept {
    return code_ == ErrorCode::nonpositive_variance_estimate ||
           code_ == ErrorCode::non_convergence;
  }

 private:
  ErrorCode code_;
};

}  // namespace plmtest
