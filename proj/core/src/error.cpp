#include "plmtest/error.hpp"

namespace plmtest {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::dimension_mismatch: return "dimension-mismatch";
    case ErrorCode::non_finite_entry: return "non-finite-entry";
    case ErrorCode::constant_column: return "constant-column";
    case ErrorCode::too_few_rows: return "too-few-rows";
    case ErrorCode::rho_out_of_range: return "rho-out-of-range";
    case ErrorCode::sparsity_exceeds_dimension: return "sparsity-exceeds-dimension";
    case ErrorCode::dimension_too_small: return "dimension-too-small";
    case ErrorCode::non_convergence: return "non-convergence";
    case ErrorCode::unknown_method: return "unknown-method";
    case ErrorCode::nonpositive_variance_estimate: return "nonpositive-variance-estimate";
    case ErrorCode::domain_error: return "domain-error";
    case ErrorCode::config_error: return "config-error";
    case ErrorCode::parse_error: return "parse-error";
    case ErrorCode::index_out_of_range: return "index-out-of-range";
    case ErrorCode::io_error: return "io-error";
  }
  return "unknown-error";
}

}  // namespace plmtest
