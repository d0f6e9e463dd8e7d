#pragma once

#include <cstdint>
#include <vector>

#include "plmtest/qtest.hpp"

namespace plmtest::penhance {

enum class ThresholdKind { hard, soft };

// Resolved screening threshold for one fold, kept for audit.
struct ThresholdSpec {
  ThresholdKind kind = ThresholdKind::hard;
  double lambda_k = 0.9;  // hard only, in (0, 1]
  double a_np = 5.0;
  int r_boot = 30;  // soft only
  double value = 0.0;
};

struct EnhancementParams {
  double lambda_k = 0.9;
  double a_np = 5.0;
  int r_boot = 30;
  // Use delta = (log p1)^2 / n in place of the finite-sample hard threshold.
  bool theory_threshold = false;
};

// Per-column T_l = [(sum_i r_i x_il)^2 - sum_i r_i^2 x_il^2] / (n(n-1)).
Vector marginal_stats(const Vector& r, const Matrix& x);

// lambda_k * log(log n) * (log p1)^2 / n. Throws Error{domain_error} for n <= e
// (n < 3), p1 < 2, or lambda_k outside (0, 1].
double hard_threshold(Index n, Index p1, double lambda_k);

// (log p1)^2 / n.
double theory_threshold(Index n, Index p1);

// Marginal statistics of the multiplier-weighted residuals r_i e_i.
Vector bootstrap_marginal(const Vector& r, const Matrix& x, const Vector& e_star);

// max over r_boot replicates of max_l |T*_l|. Replicate b draws its
// multipliers from a stream derived from (seed, b), so a larger r_boot with the
// same seed maximizes over a superset.
double soft_threshold(const Vector& r, const Matrix& x, int r_boot, std::uint64_t seed);

// a_np * sum_l |T_l| 1(|T_l| > delta). Always >= 0.
double enhancement_component(const Vector& t_l, double delta, double a_np);

inline double pe_statistic(double t_tilde, double t0) noexcept { return t_tilde + t0; }
inline double pe_statistic(const FoldStatistics& fold, double t0) noexcept {
  return pe_statistic(fold.t_tilde, t0);
}

// (pe1 + pe2) / sqrt(2).
double pe_cross_fit(double pe1, double pe2) noexcept;

// Logs (once) when a_np * delta / sqrt(p1) < 1, the regime in which the
// enhancement has no asymptotic power guarantee. Never blocks.
void check_growth_condition(double a_np, double delta, Index p1);

struct TestOptions {
  nuisance::NuisanceParams nuisance;
  double alpha = 0.05;
  std::vector<TestKind> tests{TestKind::tilde};
  EnhancementParams pe;
};

// One split: the quadratic-form test plus any requested enhanced variants, all
// computed from the same split, nuisance fits and residuals. Every method
// rejects iff its p-value 1 - Phi(stat) <= alpha.
TestOutcome power_enhanced_test(const Dataset& d, const TestOptions& opts, std::uint64_t seed);

qtest::MultiSplitOutcome power_enhanced_multi_split(const Dataset& d, const TestOptions& opts,
                                                    int m_splits, std::uint64_t seed,
                                                    qtest::Aggregation rule);

}  // namespace plmtest::penhance
