#pragma once

// Reference implementations written straight from the defining sums. They are
// slow on purpose and share no code with the library beyond the matrix types.

#include <functional>
#include <vector>

#include "plmtest/dataset.hpp"

namespace plmtest::oracle {

// (1/n) sum_{i != j} r_i r_j x_i'x_j
double quad_stat(const Vector& r, const Matrix& x);

// Per column: sum_{i != j} r_i r_j x_il x_jl / (n(n-1))
Vector marginal_stats(const Vector& r, const Matrix& x);

// sum over i1<i2<i3<i4 of (x1-x2)'(x3-x4) (x2-x3)'(x4-x1), divided by 2 C(n,4)
double trace_sigma2(const Matrix& x);

// Ordinary least squares with intercept via column-pivoted QR.
struct LsFit {
  double intercept = 0.0;
  Vector coefficients;
};
LsFit least_squares(const Matrix& z, const Vector& y);

// Lasso optimality gap on columns centred and scaled by their (1/n) root mean
// square: max_j of |g_j + lambda sign(b_j)|-type violations with
// g = zs'(yc - zs b)/n, computed from original-scale coefficients.
double lasso_kkt(const Matrix& z, const Vector& y, const Vector& coefficients, double lambda);

// Kolmogorov-Smirnov distance sup |F_n - F| and its asymptotic p-value.
double ks_statistic(std::vector<double> values, const std::function<double(double)>& cdf);
double ks_pvalue(double d, std::size_t n);

double normal_cdf(double x);

}  // namespace plmtest::oracle
