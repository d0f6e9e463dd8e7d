#include "plmtest/qtest.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "plmtest/error.hpp"
#include "plmtest/normal.hpp"

namespace plmtest {

std::string_view to_string(TestKind k) noexcept {
  switch (k) {
    case TestKind::tilde: return "tilde";
    case TestKind::pe_hard: return "pe_hard";
    case TestKind::pe_soft: return "pe_soft";
  }
  return "?";
}

TestKind parse_test_kind(std::string_view s) {
  if (s == "tilde") return TestKind::tilde;
  if (s == "pe_hard") return TestKind::pe_hard;
  if (s == "pe_soft") return TestKind::pe_soft;
  throw Error(ErrorCode::config_error, "unknown test '" + std::string(s) + "'");
}

const MethodResult* TestOutcome::find(TestKind kind) const noexcept {
  for (const auto& m : methods) {
    if (m.kind == kind) return &m;
  }
  return nullptr;
}

namespace qtest {

double p_value(double stat) noexcept { return normal::upper_tail(stat); }

Vector residuals(const nuisance::NuisanceModel& model, const Matrix& z_eval, const Vector& y_eval) {
  if (z_eval.rows() != y_eval.size()) {
    throw Error(ErrorCode::dimension_mismatch, "residuals: z rows != y length");
  }
  return y_eval - model.predict(z_eval);
}

double quad_stat(const Vector& r, const Matrix& x) {
  const Index n = x.rows();
  if (r.size() != n) throw Error(ErrorCode::dimension_mismatch, "quad_stat: r length != x rows");
  if (n < 2) throw Error(ErrorCode::too_few_rows, "quad_stat needs n >= 2");
  const Vector weighted = x.transpose() * r;
  const double diagonal = (r.array().square() * x.rowwise().squaredNorm().array()).sum();
  return (weighted.squaredNorm() - diagonal) / static_cast<double>(n);
}

double sigma2_hat(const Vector& r) {
  if (r.size() < 1) throw Error(ErrorCode::too_few_rows, "sigma2_hat needs n >= 1");
  return r.squaredNorm() / static_cast<double>(r.size());
}

double trace_sigma2_hat_from_gram(const Matrix& g) {
  const Index n = g.rows();
  if (n < 4) throw Error(ErrorCode::too_few_rows, "trace estimator needs n >= 4");

  // Sweep c from the last row down. With D(c) = {d : d > c} kept as running
  //   s1(u)   = sum_{d in D} G(u,d)
  //   m(u,v)  = sum_{d in D} G(u,d) G(v,d)
  // the d-sum of the kernel for fixed a < b < c is, with A = G_ac - G_bc and
  // B = G_ac - G_ab,
  //   |D| A B + A (s1_b - s1_c) + B (s1_b - s1_a) + m_bb - m_bc - m_ab + m_ac.
  Vector s1 = Vector::Zero(n);
  Matrix m = Matrix::Zero(n, n);
  double total = 0.0;
  for (Index c = n - 1; c >= 2; --c) {
    const auto count = static_cast<double>(n - 1 - c);
    if (count > 0) {
      for (Index b = 1; b < c; ++b) {
        const double g_bc = g(b, c);
        const double s1_b = s1(b);
        const double m_bb = m(b, b);
        const double m_bc = m(b, c);
        const double s1_bc = s1_b - s1(c);
        double row = 0.0;
        for (Index a = 0; a < b; ++a) {
          const double g_ac = g(a, c);
          const double big_a = g_ac - g_bc;
          const double big_b = g_ac - g(a, b);
          row += count * big_a * big_b + big_a * s1_bc + big_b * (s1_b - s1(a)) + m_bb - m_bc -
                 m(a, b) + m(a, c);
        }
        total += row;
      }
    }
    // Move row c into D for the next (smaller) c; only the leading c x c block
    // is read again.
    const auto col = g.col(c).head(c);
    s1.head(c) += col;
    m.topLeftCorner(c, c).noalias() += col * col.transpose();
  }

  const double nd = static_cast<double>(n);
  const double choose4 = nd * (nd - 1.0) * (nd - 2.0) * (nd - 3.0) / 24.0;
  return total / (2.0 * choose4);
}

double trace_sigma2_hat(const Matrix& x) {
  if (x.rows() < 4) throw Error(ErrorCode::too_few_rows, "trace estimator needs n >= 4");
  const Matrix gram = x * x.transpose();
  return trace_sigma2_hat_from_gram(gram);
}

double lambda_hat(double sigma2, double tr_hat) {
  const double value = 2.0 * sigma2 * sigma2 * tr_hat;
  if (value < 0.0 || std::isnan(value)) {
    throw Error(ErrorCode::nonpositive_variance_estimate,
                "Lambda-hat = " + std::to_string(value) + " (tr-hat = " + std::to_string(tr_hat) +
                    ")");
  }
  return value;
}

double normalize(double t, double lambda) {
  if (!(lambda > 0.0)) {
    throw Error(ErrorCode::nonpositive_variance_estimate,
                "cannot normalize by Lambda-hat = " + std::to_string(lambda));
  }
  return t / std::sqrt(lambda);
}

FoldStatistics fold_statistics(const Vector& r, const Matrix& x_eval) {
  FoldStatistics s;
  s.t_nk = quad_stat(r, x_eval);
  s.sigma2_hat = sigma2_hat(r);
  s.tr_hat = trace_sigma2_hat(x_eval);
  s.lambda_hat = lambda_hat(s.sigma2_hat, s.tr_hat);
  s.t_tilde = normalize(s.t_nk, s.lambda_hat);
  return s;
}

FoldStatistics fold_statistic(const nuisance::NuisanceModel& model, const Dataset& d_eval) {
  return fold_statistics(residuals(model, d_eval.z, d_eval.y), d_eval.x);
}

double cross_fit(double t1, double t2) noexcept { return (t1 + t2) / std::numbers::sqrt2; }

CrossFitState cross_fit_split(const Dataset& d, const nuisance::NuisanceParams& params,
                              std::uint64_t seed) {
  validate(d);
  Rng split_rng(derive_seed(seed, Purpose::split));
  CrossFitState st;
  st.plan = random_split(d.rows(), split_rng);

  for (int k = 0; k < 2; ++k) {
    const Dataset train = d.subset(st.plan.fold(k));
    const Dataset eval = d.subset(st.plan.fold(1 - k));
    Rng fit_rng(derive_seed(seed, Purpose::fit, static_cast<std::uint64_t>(k)));
    auto model = nuisance::fit_nuisance(train, params, fit_rng);
    model.set_training_fold(k);
    auto r = residuals(model, eval.z, eval.y);
    const auto ku = static_cast<std::size_t>(k);
    st.folds[ku] = fold_statistics(r, eval.x);
    st.models[ku] = std::move(model);
    st.residuals[ku] = std::move(r);
    st.x_eval[ku] = eval.x;
  }
  return st;
}

TestOutcome single_split_test(const Dataset& d, const nuisance::NuisanceParams& params,
                              double alpha, std::uint64_t seed) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorCode::domain_error, "alpha must be in (0,1)");
  const auto st = cross_fit_split(d, params, seed);
  TestOutcome out;
  out.alpha = alpha;
  out.dropped_row = st.plan.dropped;
  out.per_fold[0].stats = st.folds[0];
  out.per_fold[1].stats = st.folds[1];
  out.stat_tilde_n = cross_fit(st.folds[0], st.folds[1]);
  out.p_value = p_value(out.stat_tilde_n);
  out.methods.push_back({TestKind::tilde, out.stat_tilde_n, out.p_value, out.p_value <= alpha});
  return out;
}

std::string_view to_string(Aggregation a) noexcept {
  return a == Aggregation::quantile ? "quantile" : "twice_median";
}

Aggregation parse_aggregation(std::string_view s) {
  if (s == "quantile") return Aggregation::quantile;
  if (s == "twice_median" || s == "median") return Aggregation::twice_median;
  throw Error(ErrorCode::config_error, "unknown aggregation rule '" + std::string(s) + "'");
}

namespace {

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const auto m = v.size();
  return m % 2 == 1 ? v[m / 2] : 0.5 * (v[m / 2 - 1] + v[m / 2]);
}

}  // namespace

double aggregate_pvalues(std::span<const double> p_values, Aggregation rule, double gamma_min) {
  if (p_values.empty()) throw Error(ErrorCode::domain_error, "no p-values to aggregate");
  if (p_values.size() == 1) return p_values.front();

  std::vector<double> p(p_values.begin(), p_values.end());
  if (rule == Aggregation::twice_median) return std::min(1.0, 2.0 * median(std::move(p)));

  if (!(gamma_min > 0.0 && gamma_min <= 1.0)) {
    throw Error(ErrorCode::domain_error, "gamma_min must be in (0, 1]");
  }
  std::sort(p.begin(), p.end());
  // The empirical gamma-quantile is p_(k) on ((k-1)/M, k/M], so q_gamma/gamma
  // is smallest at gamma = k/M; only k with k/M >= gamma_min qualify.
  const auto m = static_cast<double>(p.size());
  const auto k_min = static_cast<std::size_t>(std::max(1.0, std::ceil(gamma_min * m - 1e-12)));
  double best = 1.0;
  for (std::size_t k = k_min; k <= p.size(); ++k) {
    best = std::min(best, p[k - 1] * m / static_cast<double>(k));
  }
  return std::min(1.0, (1.0 - std::log(gamma_min)) * best);
}

const MethodResult* MultiSplitOutcome::find(TestKind kind) const noexcept {
  for (const auto& m : aggregated) {
    if (m.kind == kind) return &m;
  }
  return nullptr;
}

MultiSplitOutcome multi_split(const Dataset& d, int m_splits, std::uint64_t seed, double alpha,
                              Aggregation rule, const SplitProcedure& procedure) {
  if (m_splits < 1) throw Error(ErrorCode::domain_error, "m_splits must be >= 1");
  constexpr int kMaxRetries = 3;

  MultiSplitOutcome out;
  out.rule = rule;
  for (int s = 0; s < m_splits; ++s) {
    const std::uint64_t split_seed =
        m_splits == 1 ? seed : derive_seed(seed, Purpose::multi_split, static_cast<std::uint64_t>(s));
    for (int attempt = 0;; ++attempt) {
      const std::uint64_t attempt_seed =
          attempt == 0 ? split_seed
                       : derive_seed(split_seed, Purpose::retry, static_cast<std::uint64_t>(attempt));
      try {
        out.splits.push_back(procedure(d, attempt_seed));
        break;
      } catch (const Error& e) {
        if (!e.is_numerical() || attempt >= kMaxRetries) throw;
        ++out.retries;
      }
    }
  }

  for (const auto& first : out.splits.front().methods) {
    std::vector<double> ps, stats;
    for (const auto& split : out.splits) {
      const auto* m = split.find(first.kind);
      ps.push_back(m->p_value);
      stats.push_back(m->statistic);
    }
    MethodResult agg;
    agg.kind = first.kind;
    agg.statistic = median(stats);
    agg.p_value = aggregate_pvalues(ps, rule);
    agg.reject = agg.p_value <= alpha;
    out.aggregated.push_back(agg);
  }
  return out;
}

MultiSplitOutcome multi_split_test(const Dataset& d, const nuisance::NuisanceParams& params,
                                   double alpha, int m_splits, std::uint64_t seed,
                                   Aggregation rule) {
  return multi_split(d, m_splits, seed, alpha, rule, [&](const Dataset& data, std::uint64_t s) {
    return single_split_test(data, params, alpha, s);
  });
}

}  // namespace qtest
}  // namespace plmtest
