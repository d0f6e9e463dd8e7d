#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "plmtest/dataset.hpp"
#include "plmtest/nuisance.hpp"

namespace plmtest {

enum class TestKind { tilde, pe_hard, pe_soft };

std::string_view to_string(TestKind k) noexcept;
TestKind parse_test_kind(std::string_view s);

// Scalars computed on one evaluation half.
struct FoldStatistics {
  double t_nk = 0.0;        // (1/n) sum_{i != j} r_i r_j x_i'x_j
  double sigma2_hat = 0.0;  // mean squared residual
  double tr_hat = 0.0;      // tr(Sigma_X^2) estimate; may be slightly negative
  double lambda_hat = 0.0;  // 2 sigma2_hat^2 tr_hat
  double t_tilde = 0.0;     // t_nk / sqrt(lambda_hat)
};

// Power-enhancement audit values for one fold and one threshold kind.
struct Enhancement {
  double delta = 0.0;  // resolved threshold
  double t0 = 0.0;     // screening component (>= 0)
  double t_pe = 0.0;   // t_tilde + t0
};

struct FoldRecord {
  FoldStatistics stats;
  std::optional<Enhancement> hard;
  std::optional<Enhancement> soft;
};

struct MethodResult {
  TestKind kind = TestKind::tilde;
  double statistic = 0.0;
  double p_value = 1.0;
  bool reject = false;
};

struct TestOutcome {
  double stat_tilde_n = 0.0;
  std::optional<double> stat_pe_hard;
  std::optional<double> stat_pe_soft;
  std::array<FoldRecord, 2> per_fold{};
  double p_value = 1.0;  // of stat_tilde_n
  double alpha = 0.05;
  std::vector<MethodResult> methods;  // one entry per requested test
  std::optional<Index> dropped_row;

  const MethodResult* find(TestKind kind) const noexcept;
};

namespace qtest {

// One-sided p-value 1 - Phi(stat).
double p_value(double stat) noexcept;

// r_i = y_i - g_hat(z_i) on the evaluation half.
Vector residuals(const nuisance::NuisanceModel& model, const Matrix& z_eval, const Vector& y_eval);

// (1/n) sum_{i != j} r_i r_j x_i'x_j via (1/n)(||x'r||^2 - sum_i r_i^2 ||x_i||^2).
double quad_stat(const Vector& r, const Matrix& x);

double sigma2_hat(const Vector& r);

// Fourth-order U-statistic for tr(Sigma_X^2):
//   1/(2 C(n,4)) sum_{a<b<c<d} (x_a - x_b)'(x_c - x_d) (x_b - x_c)'(x_d - x_a).
// The kernel is not symmetric in its indices, so the sum runs over rows in the
// order given. Evaluated from the Gram matrix in O(n^3 + n^2 p). Throws
// Error{too_few_rows} for n < 4.
double trace_sigma2_hat(const Matrix& x);
double trace_sigma2_hat_from_gram(const Matrix& gram);

// 2 sigma2^2 tr_hat. Throws Error{nonpositive_variance_estimate} when negative
// (a negative trace estimate); a zero result is left for normalize() to reject.
double lambda_hat(double sigma2, double tr_hat);

// t / sqrt(lambda). Throws Error{nonpositive_variance_estimate} unless lambda > 0.
double normalize(double t, double lambda);

FoldStatistics fold_statistics(const Vector& r, const Matrix& x_eval);
FoldStatistics fold_statistic(const nuisance::NuisanceModel& model, const Dataset& d_eval);

// (t1 + t2) / sqrt(2).
double cross_fit(double t1, double t2) noexcept;
inline double cross_fit(const FoldStatistics& a, const FoldStatistics& b) noexcept {
  return cross_fit(a.t_tilde, b.t_tilde);
}

// Fold k fits g-hat on half k and evaluates on the other half.
struct CrossFitState {
  SplitPlan plan;
  std::array<nuisance::NuisanceModel, 2> models;
  std::array<Vector, 2> residuals;
  std::array<Matrix, 2> x_eval;
  std::array<FoldStatistics, 2> folds;
};

// Split, fit both nuisance models, compute both folds' statistics. Split and
// fit randomness are separate streams derived from `seed`.
CrossFitState cross_fit_split(const Dataset& d, const nuisance::NuisanceParams& params,
                              std::uint64_t seed);

// Split, fit, normalize, cross-fit; p = 1 - Phi(T_n), reject iff p <= alpha.
TestOutcome single_split_test(const Dataset& d, const nuisance::NuisanceParams& params,
                              double alpha, std::uint64_t seed);

enum class Aggregation { quantile, twice_median };

std::string_view to_string(Aggregation a) noexcept;
Aggregation parse_aggregation(std::string_view s);

// Combines per-split p-values. quantile: min(1, (1 - log g_min) inf_{g in
// [g_min, 1]} q_g(p)/g) with q_g the empirical g-quantile; twice_median:
// min(1, 2 median). A single p-value is returned unchanged.
double aggregate_pvalues(std::span<const double> p_values, Aggregation rule,
                         double gamma_min = 0.05);

struct MultiSplitOutcome {
  std::vector<TestOutcome> splits;
  std::vector<MethodResult> aggregated;  // statistic = median over splits
  Aggregation rule = Aggregation::quantile;
  int retries = 0;

  const MethodResult* find(TestKind kind) const noexcept;
};

using SplitProcedure = std::function<TestOutcome(const Dataset&, std::uint64_t seed)>;

// Runs `procedure` on m independent splits (seed stream derived from `seed`)
// and aggregates each method's p-values. A split failing with a numerical
// error is redrawn up to 3 times.
MultiSplitOutcome multi_split(const Dataset& d, int m_splits, std::uint64_t seed, double alpha,
                              Aggregation rule, const SplitProcedure& procedure);

MultiSplitOutcome multi_split_test(const Dataset& d, const nuisance::NuisanceParams& params,
                                   double alpha, int m_splits, std::uint64_t seed,
                                   Aggregation rule = Aggregation::quantile);

}  // namespace qtest
}  // namespace plmtest
