#include "plmtest/penhance.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <string>

#include "plmtest/error.hpp"
#include "plmtest/log.hpp"

namespace plmtest::penhance {

Vector marginal_stats(const Vector& r, const Matrix& x) {
  const Index n = x.rows();
  if (r.size() != n) throw Error(ErrorCode::dimension_mismatch, "marginal_stats: r length != x rows");
  if (n < 2) throw Error(ErrorCode::too_few_rows, "marginal_stats needs n >= 2");
  const Vector weighted = x.transpose() * r;
  const Vector diagonal = x.cwiseAbs2().transpose() * r.cwiseAbs2();
  const double scale = 1.0 / (static_cast<double>(n) * static_cast<double>(n - 1));
  return (weighted.array().square() - diagonal.array()) * scale;
}

double hard_threshold(Index n, Index p1, double lambda_k) {
  if (n < 3) throw Error(ErrorCode::domain_error, "hard threshold needs n >= 3 (log log n > 0)");
  if (p1 < 2) throw Error(ErrorCode::domain_error, "hard threshold needs p1 >= 2");
  if (!(lambda_k > 0.0 && lambda_k <= 1.0)) {
    throw Error(ErrorCode::domain_error, "lambda_k must be in (0, 1]");
  }
  const double log_p = std::log(static_cast<double>(p1));
  return lambda_k * std::log(std::log(static_cast<double>(n))) * log_p * log_p /
         static_cast<double>(n);
}

double theory_threshold(Index n, Index p1) {
  if (n < 1) throw Error(ErrorCode::domain_error, "theory threshold needs n >= 1");
  if (p1 < 2) throw Error(ErrorCode::domain_error, "theory threshold needs p1 >= 2");
  const double log_p = std::log(static_cast<double>(p1));
  return log_p * log_p / static_cast<double>(n);
}

Vector bootstrap_marginal(const Vector& r, const Matrix& x, const Vector& e_star) {
  if (e_star.size() != r.size()) {
    throw Error(ErrorCode::dimension_mismatch, "bootstrap multipliers: wrong length");
  }
  return marginal_stats(r.cwiseProduct(e_star), x);
}

double soft_threshold(const Vector& r, const Matrix& x, int r_boot, std::uint64_t seed) {
  if (r_boot < 1) throw Error(ErrorCode::domain_error, "r_boot must be >= 1");
  double delta = 0.0;
  Vector e(r.size());
  for (int b = 0; b < r_boot; ++b) {
    Rng rng(derive_seed(seed, Purpose::bootstrap, static_cast<std::uint64_t>(b)));
    std::normal_distribution<double> std_normal;
    for (Index i = 0; i < e.size(); ++i) e(i) = std_normal(rng);
    delta = std::max(delta, bootstrap_marginal(r, x, e).cwiseAbs().maxCoeff());
  }
  return delta;
}

double enhancement_component(const Vector& t_l, double delta, double a_np) {
  if (!(delta >= 0.0)) throw Error(ErrorCode::domain_error, "delta must be >= 0");
  if (!(a_np > 0.0)) throw Error(ErrorCode::domain_error, "a_np must be > 0");
  double sum = 0.0;
  for (Index l = 0; l < t_l.size(); ++l) {
    const double v = std::abs(t_l(l));
    if (v > delta) sum += v;
  }
  return a_np * sum;
}

double pe_cross_fit(double pe1, double pe2) noexcept { return (pe1 + pe2) / std::numbers::sqrt2; }

void check_growth_condition(double a_np, double delta, Index p1) {
  const double ratio = a_np * delta / std::sqrt(static_cast<double>(p1));
  if (ratio < 1.0) {
    std::ostringstream msg;
    msg << "power enhancement: a_np * delta / sqrt(p1) = " << ratio
        << " < 1; enhancement may not reach full power for sparse alternatives";
    log::warning_once("pe-growth-condition", msg.str());
  }
}

namespace {

bool wants(const TestOptions& opts, TestKind kind) {
  return std::find(opts.tests.begin(), opts.tests.end(), kind) != opts.tests.end();
}

}  // namespace

TestOutcome power_enhanced_test(const Dataset& d, const TestOptions& opts, std::uint64_t seed) {
  if (!(opts.alpha > 0.0 && opts.alpha < 1.0)) {
    throw Error(ErrorCode::domain_error, "alpha must be in (0,1)");
  }
  if (opts.tests.empty()) throw Error(ErrorCode::config_error, "no tests requested");

  const auto st = qtest::cross_fit_split(d, opts.nuisance, seed);
  const bool hard = wants(opts, TestKind::pe_hard);
  const bool soft = wants(opts, TestKind::pe_soft);

  TestOutcome out;
  out.alpha = opts.alpha;
  out.dropped_row = st.plan.dropped;
  for (int k = 0; k < 2; ++k) {
    const auto ku = static_cast<std::size_t>(k);
    auto& rec = out.per_fold[ku];
    rec.stats = st.folds[ku];
    if (!hard && !soft) continue;

    const Vector& r = st.residuals[ku];
    const Matrix& x = st.x_eval[ku];
    const Vector t_l = marginal_stats(r, x);
    const Index n = x.rows();
    if (hard) {
      Enhancement e;
      e.delta = opts.pe.theory_threshold ? theory_threshold(n, x.cols())
                                         : hard_threshold(n, x.cols(), opts.pe.lambda_k);
      check_growth_condition(opts.pe.a_np, e.delta, x.cols());
      e.t0 = enhancement_component(t_l, e.delta, opts.pe.a_np);
      e.t_pe = pe_statistic(rec.stats, e.t0);
      rec.hard = e;
    }
    if (soft) {
      Enhancement e;
      e.delta = soft_threshold(r, x, opts.pe.r_boot,
                               derive_seed(seed, Purpose::bootstrap, static_cast<std::uint64_t>(k)));
      e.t0 = enhancement_component(t_l, e.delta, opts.pe.a_np);
      e.t_pe = pe_statistic(rec.stats, e.t0);
      rec.soft = e;
    }
  }

  out.stat_tilde_n = qtest::cross_fit(st.folds[0], st.folds[1]);
  out.p_value = qtest::p_value(out.stat_tilde_n);
  if (hard) out.stat_pe_hard = pe_cross_fit(out.per_fold[0].hard->t_pe, out.per_fold[1].hard->t_pe);
  if (soft) out.stat_pe_soft = pe_cross_fit(out.per_fold[0].soft->t_pe, out.per_fold[1].soft->t_pe);

  for (TestKind kind : opts.tests) {
    double stat = out.stat_tilde_n;
    if (kind == TestKind::pe_hard) stat = *out.stat_pe_hard;
    if (kind == TestKind::pe_soft) stat = *out.stat_pe_soft;
    const double p = qtest::p_value(stat);
    out.methods.push_back({kind, stat, p, p <= opts.alpha});
  }
  return out;
}

qtest::MultiSplitOutcome power_enhanced_multi_split(const Dataset& d, const TestOptions& opts,
                                                    int m_splits, std::uint64_t seed,
                                                    qtest::Aggregation rule) {
  return qtest::multi_split(d, m_splits, seed, opts.alpha, rule,
                            [&](const Dataset& data, std::uint64_t s) {
                              return power_enhanced_test(data, opts, s);
                            });
}

}  // namespace plmtest::penhance
