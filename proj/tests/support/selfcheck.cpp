#include "selfcheck.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "plmtest/lasso.hpp"
#include "plmtest/normal.hpp"
#include "plmtest/penhance.hpp"
#include "plmtest/qtest.hpp"
#include "plmtest/simgen.hpp"

namespace plmtest::oracle {

namespace {

Matrix random_matrix(Index rows, Index cols, Rng& rng) {
  std::normal_distribution<double> normal;
  Matrix m(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) m(i, j) = normal(rng);
  }
  return m;
}

Vector random_vector(Index n, Rng& rng) { return random_matrix(n, 1, rng).col(0); }

Index uniform_index(Index lo, Index hi, Rng& rng) {
  return std::uniform_int_distribution<Index>(lo, hi)(rng);
}

std::string format(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

Check max_error_check(std::string name, double worst, double tol) {
  return {std::move(name), worst <= tol, "max error " + format(worst) + " (tol " + format(tol) + ")"};
}

}  // namespace

double relative_error(double a, double b, double floor) {
  const double diff = std::abs(a - b);
  return std::abs(b) < floor ? diff : diff / std::abs(b);
}

std::vector<Check> run_selfchecks() {
  std::vector<Check> out;
  Rng rng(7);

  {
    double worst = 0.0;
    for (int t = 0; t < 50; ++t) {
      const Index n = uniform_index(2, 50, rng);
      const Index p = uniform_index(1, 30, rng);
      const Matrix x = random_matrix(n, p, rng);
      const Vector r = random_vector(n, rng);
      worst = std::max(worst, relative_error(qtest::quad_stat(r, x), quad_stat(r, x)));
    }
    out.push_back(max_error_check("quad_stat matches the literal double sum", worst, 1e-10));
  }
  {
    double worst = 0.0;
    for (int t = 0; t < 50; ++t) {
      const Index n = uniform_index(2, 50, rng);
      const Index p = uniform_index(1, 30, rng);
      const Matrix x = random_matrix(n, p, rng);
      const Vector r = random_vector(n, rng);
      const Vector fast = penhance::marginal_stats(r, x);
      const Vector slow = marginal_stats(r, x);
      for (Index l = 0; l < p; ++l) worst = std::max(worst, relative_error(fast(l), slow(l)));
    }
    out.push_back(max_error_check("marginal_stats matches the literal double sum", worst, 1e-10));
  }
  {
    double worst = 0.0;
    for (int t = 0; t < 100; ++t) {
      const Index n = uniform_index(4, 12, rng);
      const Index p = uniform_index(1, 20, rng);
      const Matrix x = random_matrix(n, p, rng);
      worst = std::max(worst, relative_error(qtest::trace_sigma2_hat(x), trace_sigma2(x)));
    }
    out.push_back(max_error_check("trace estimator matches the quadruple sum", worst, 1e-10));
  }
  {
    const Matrix x = random_matrix(30, 8, rng);
    const Matrix reversed = x.colwise().reverse();
    out.push_back(max_error_check("trace estimator is invariant under row reversal",
                                  relative_error(qtest::trace_sigma2_hat(reversed),
                                                 qtest::trace_sigma2_hat(x)),
                                  1e-12));
  }
  {
    const Matrix x = random_matrix(40, 25, rng);
    const Vector r = random_vector(40, rng);
    const Vector a = penhance::bootstrap_marginal(r, x, Vector::Ones(40));
    const Vector b = penhance::marginal_stats(r, x);
    const bool same = std::memcmp(a.data(), b.data(), sizeof(double) * 25) == 0;
    out.push_back({"unit multipliers reproduce the marginal statistics", same,
                   same ? "bitwise equal" : "differs"});
  }
  {
    double worst = 0.0;
    for (int t = 0; t < 20; ++t) {
      const Index n = uniform_index(20, 80, rng);
      const Index p = uniform_index(5, 120, rng);
      const Matrix z = random_matrix(n, p, rng);
      Vector y = z.leftCols(3).rowwise().sum() + random_vector(n, rng);
      const auto design = lasso::make_design(z, y);
      const double lambda = lasso::lambda_max(design) * std::uniform_real_distribution<>(0.02, 0.9)(rng);
      const auto fit = lasso::lasso_fit(z, y, lambda);
      worst = std::max(worst, lasso_kkt(z, y, fit.coefficients, lambda));
    }
    out.push_back(max_error_check("lasso solutions satisfy the KKT conditions", worst, 1e-4));
  }
  {
    const Matrix z = random_matrix(60, 5, rng);
    const Vector y = z * Vector::LinSpaced(5, -1.0, 1.0) + random_vector(60, rng);
    const auto fit = lasso::lasso_fit(z, y, 0.0);
    const auto ls = least_squares(z, y);
    double worst = std::abs(fit.intercept - ls.intercept);
    for (Index j = 0; j < 5; ++j) {
      worst = std::max(worst, std::abs(fit.coefficients(j) - ls.coefficients(j)));
    }
    out.push_back(max_error_check("lasso at lambda 0 matches least squares", worst, 1e-6));
  }
  {
    double worst = 0.0;
    for (double p = 1e-10; p < 1.0; p *= 3.7) {
      worst = std::max(worst, relative_error(normal::cdf(normal::quantile(p)), p));
    }
    out.push_back(max_error_check("normal quantile inverts the cdf", worst, 1e-12));
  }
  {
    auto cfg = simgen::GenConfig{};
    cfg.n_total = 120;
    cfg.p1 = 40;
    cfg.p2 = 40;
    cfg.s1 = 2;
    cfg.c1 = simgen::scenario_signal(simgen::Scenario::s2_sparse, 2);
    cfg.seed = 11;
    const Dataset d = simgen::generate(cfg);
    penhance::TestOptions opts;
    opts.tests = {TestKind::tilde, TestKind::pe_hard, TestKind::pe_soft};
    opts.pe.r_boot = 10;
    const auto outc = penhance::power_enhanced_test(d, opts, 5);
    const bool ok = outc.methods.size() == 3 && outc.methods[1].statistic >= outc.methods[0].statistic &&
                    outc.methods[2].statistic >= outc.methods[0].statistic;
    out.push_back({"enhanced statistics dominate the plain statistic", ok,
                   "T=" + format(outc.methods[0].statistic)});
  }
  return out;
}

}  // namespace plmtest::oracle
