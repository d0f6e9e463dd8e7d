#pragma once

namespace plmtest::normal {

// Standard normal CDF.
double cdf(double x) noexcept;

// 1 - cdf(x), computed through erfc so the upper tail keeps full relative
// precision for large x.
double upper_tail(double x) noexcept;

// Inverse CDF for p in (0, 1). Returns +-inf at the endpoints.
double quantile(double p) noexcept;

// Upper-alpha critical value z_alpha, i.e. upper_tail(z_alpha) == alpha.
inline double critical_value(double alpha) noexcept { return -quantile(alpha); }

}  // namespace plmtest::normal
