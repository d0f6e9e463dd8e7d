#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "plmtest/error.hpp"
#include "plmtest/nuisance.hpp"
#include "plmtest/simgen.hpp"

using namespace plmtest;

namespace {

Matrix gaussian(Index rows, Index cols, Rng& rng) {
  std::normal_distribution<double> normal;
  Matrix m(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) m(i, j) = normal(rng);
  }
  return m;
}

double sample_variance(const Vector& v) {
  return (v.array() - v.mean()).square().sum() / static_cast<double>(v.size() - 1);
}

}  // namespace

TEST(Lasso, ZeroAboveLambdaMax) {
  Rng rng(1);
  const Matrix z = gaussian(40, 10, rng);
  const Vector y = gaussian(40, 1, rng).col(0) + z.col(0);
  const double lmax = lasso::lambda_max(lasso::make_design(z, y));
  const auto fit = lasso::lasso_fit(z, y, lmax);
  EXPECT_EQ(fit.coefficients, Vector::Zero(10));
  EXPECT_NEAR(fit.intercept, y.mean(), 1e-14);
  EXPECT_FALSE(lasso::lasso_fit(z, y, 0.95 * lmax).coefficients.isZero());
}

TEST(Lasso, SingleFeatureIsSoftThresholding) {
  Rng rng(2);
  Vector z = gaussian(30, 1, rng).col(0);
  z.array() -= z.mean();
  z /= std::sqrt(z.squaredNorm() / 30.0);
  const Vector y = 0.7 * z + gaussian(30, 1, rng).col(0);
  const double zy = z.dot(y) / 30.0;
  for (double lambda : {0.0, 0.1, 0.3, 2.0}) {
    const double expected = zy > lambda ? zy - lambda : (zy < -lambda ? zy + lambda : 0.0);
    const auto fit = lasso::lasso_fit(z, y, lambda);
    EXPECT_NEAR(fit.coefficients(0), expected, 1e-10) << "lambda " << lambda;
  }
}

TEST(Lasso, LambdaZeroMatchesLeastSquares) {
  Rng rng(3);
  const Matrix z = gaussian(80, 6, rng);
  const Vector y = z * Vector::LinSpaced(6, 2.0, -1.0) + gaussian(80, 1, rng).col(0);
  const auto fit = lasso::lasso_fit(z, y, 0.0);
  const auto ls = oracle::least_squares(z, y);
  EXPECT_NEAR(fit.intercept, ls.intercept, 1e-6);
  EXPECT_LE((fit.coefficients - ls.coefficients).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Lasso, KktHoldsOnRandomProblems) {
  Rng rng(4);
  for (int t = 0; t < 50; ++t) {
    const Index n = std::uniform_int_distribution<Index>(20, 100)(rng);
    const Index p = std::uniform_int_distribution<Index>(3, 200)(rng);
    const Matrix z = gaussian(n, p, rng);
    const Vector y = z.leftCols(std::min<Index>(p, 4)).rowwise().sum() + gaussian(n, 1, rng).col(0);
    const double lmax = lasso::lambda_max(lasso::make_design(z, y));
    const double lambda = lmax * std::uniform_real_distribution<double>(0.01, 1.0)(rng);
    const auto fit = lasso::lasso_fit(z, y, lambda);
    EXPECT_LE(oracle::lasso_kkt(z, y, fit.coefficients, lambda), 1e-4) << "problem " << t;
    EXPECT_LE(fit.kkt_residual, 1e-4);
  }
}

TEST(Lasso, ObjectiveNeverIncreasesAcrossSweeps) {
  Rng rng(5);
  const Matrix z = gaussian(50, 120, rng);
  const Vector y = z.leftCols(5).rowwise().sum() + gaussian(50, 1, rng).col(0);
  lasso::SolverOptions opts;
  opts.record_objective = true;
  const double lambda = 0.05 * lasso::lambda_max(lasso::make_design(z, y));
  const auto fit = lasso::lasso_fit(z, y, lambda, opts);
  ASSERT_GT(fit.objective_trace.size(), 2u);
  for (std::size_t i = 1; i < fit.objective_trace.size(); ++i) {
    EXPECT_LE(fit.objective_trace[i], fit.objective_trace[i - 1] + 1e-15);
  }
}

TEST(Lasso, WarmStartedPathSatisfiesKkt) {
  Rng rng(6);
  const Matrix z = gaussian(90, 500, rng);
  const Vector y = z.leftCols(20).rowwise().sum() / 6.0 + gaussian(90, 1, rng).col(0);
  const auto design = lasso::make_design(z, y);
  const auto lambdas = lasso::lambda_grid(lasso::lambda_max(design), 100, 1e-3);
  const auto path = lasso::lasso_path(design, lambdas);
  ASSERT_FALSE(path.empty());
  for (const auto& fit : path) {
    EXPECT_LE(oracle::lasso_kkt(z, y, fit.coefficients, fit.lambda), 1e-4);
  }
}

TEST(Lasso, NonConvergenceIsReported) {
  Rng rng(7);
  const Matrix z = gaussian(30, 60, rng);
  const Vector y = gaussian(30, 1, rng).col(0);
  lasso::SolverOptions opts;
  opts.max_sweeps = 1;
  try {
    lasso::lasso_fit(z, y, 1e-4, opts);
    FAIL() << "expected non-convergence";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::non_convergence);
    EXPECT_NE(std::string(e.what()).find("KKT"), std::string::npos);
  }
}

TEST(LassoCv, PureNoiseSelectsNearNullModel) {
  Rng rng(8);
  const Matrix z = gaussian(200, 500, rng);
  const Vector y = gaussian(200, 1, rng).col(0);
  Rng cv_rng(1);
  const auto cv = lasso::lasso_cv(z, y, {}, cv_rng);
  const double err = cv.cv_error[static_cast<std::size_t>(cv.selected)];
  EXPECT_NEAR(err / sample_variance(y), 1.0, 0.15);
}

TEST(LassoCv, RecoversExactSignal) {
  Rng rng(9);
  const Matrix z = gaussian(200, 50, rng);
  const Vector y = z.col(0);
  Rng cv_rng(2);
  const auto cv = lasso::lasso_cv(z, y, {}, cv_rng);
  Rng test_rng(10);
  const Matrix z_new = gaussian(500, 50, test_rng);
  const Vector y_new = z_new.col(0);
  const Vector pred = cv.fit.predict(z_new);
  const double r2 = 1.0 - (y_new - pred).squaredNorm() /
                              (y_new.array() - y_new.mean()).square().sum();
  EXPECT_GE(r2, 0.99);
}

TEST(LassoCv, DeterministicInSeed) {
  Rng rng(11);
  const Matrix z = gaussian(60, 40, rng);
  const Vector y = z.col(3) + gaussian(60, 1, rng).col(0);
  Rng a(5), b(5);
  const auto fa = lasso::lasso_cv(z, y, {}, a);
  const auto fb = lasso::lasso_cv(z, y, {}, b);
  EXPECT_EQ(fa.selected, fb.selected);
  EXPECT_EQ(fa.fit.coefficients, fb.fit.coefficients);
}

TEST(Forest, ConstantResponse) {
  Rng rng(12);
  const Matrix z = gaussian(40, 5, rng);
  const Vector y = Vector::Constant(40, 7.0);
  const auto rf = forest::forest_fit(z, y, {}, rng);
  Rng probe(13);
  const Matrix z_new = gaussian(10, 5, probe);
  for (Index i = 0; i < 10; ++i) EXPECT_DOUBLE_EQ(rf.predict(z_new).coeff(i), 7.0);
}

TEST(Forest, LearnsSignOfFirstFeature) {
  Rng rng(14);
  const Matrix z = gaussian(500, 5, rng);
  const Vector y = z.col(0).array().sign();
  forest::ForestParams params;
  params.trees = 100;
  const auto rf = forest::forest_fit(z, y, params, rng);
  const Vector pred = rf.predict(z);
  int correct = 0;
  for (Index i = 0; i < 500; ++i) correct += (pred(i) > 0) == (y(i) > 0);
  EXPECT_GE(correct / 500.0, 0.9);
}

TEST(Forest, DeterministicInSeed) {
  Rng rng(15);
  const Matrix z = gaussian(60, 8, rng);
  const Vector y = z.col(1) + z.col(2).cwiseAbs();
  Rng a(3), b(3);
  forest::ForestParams params;
  params.trees = 20;
  EXPECT_EQ(forest::forest_fit(z, y, params, a).predict(z),
            forest::forest_fit(z, y, params, b).predict(z));
}

TEST(Forest, NeedsTenRows) {
  Rng rng(16);
  EXPECT_THROW(forest::forest_fit(gaussian(9, 3, rng), Vector::Ones(9), {}, rng), Error);
}

TEST(FitNuisance, LassoRecoversNuisanceSupport) {
  simgen::GenConfig cfg;
  cfg.n_total = 300;
  cfg.p1 = 500;
  cfg.p2 = 500;
  cfg.seed = 21;
  const auto d = simgen::generate(cfg);
  nuisance::NuisanceParams params;
  Rng rng(22);
  const auto model = nuisance::fit_nuisance(d, params, rng);
  EXPECT_EQ(model.name(), "lasso");
  // A linear model's coefficient j is predict(e_j) - predict(0).
  const double base = model.predict(Eigen::Ref<const Vector>(Vector::Zero(500)));
  int found = 0;
  for (Index j = 0; j < cfg.s2; ++j) {
    Vector e = Vector::Zero(500);
    e(j) = 1.0;
    if (model.predict(Eigen::Ref<const Vector>(e)) != base) ++found;
  }
  EXPECT_GE(found / static_cast<double>(cfg.s2), 0.8);
}

TEST(FitNuisance, ForestBeatsMeanOnModel3) {
  simgen::GenConfig cfg;
  cfg.n_total = 400;
  cfg.p1 = 10;
  cfg.p2 = 10;
  cfg.s2 = 10;
  cfg.model = simgen::Model::m3;
  cfg.seed = 23;
  const auto d = simgen::generate(cfg);
  std::vector<Index> train, test;
  for (Index i = 0; i < 400; ++i) (i < 300 ? train : test).push_back(i);
  const auto fit_part = d.subset(train);
  const auto test_part = d.subset(test);
  nuisance::NuisanceParams params;
  params.method = "forest";
  Rng rng(24);
  const auto model = nuisance::fit_nuisance(fit_part, params, rng);
  const double mse = (test_part.y - model.predict(test_part.z)).squaredNorm() / 100.0;
  const double mean_mse = (test_part.y.array() - fit_part.y.mean()).square().mean();
  EXPECT_LT(mse, mean_mse);
}

TEST(FitNuisance, UnknownMethod) {
  nuisance::NuisanceParams params;
  params.method = "boosting";
  Rng rng(1);
  try {
    nuisance::fit_nuisance(Matrix::Ones(20, 2), Vector::Ones(20), params, rng);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::unknown_method);
  }
}

TEST(FitNuisance, RegisteredEstimatorIsDispatched) {
  nuisance::register_estimator(
      "mean_only", [](const Matrix&, const Vector& y, const nuisance::NuisanceParams&, Rng&) {
        const double m = y.mean();
        return nuisance::NuisanceModel("mean_only",
                                       [m](const Eigen::Ref<const Vector>&) { return m; });
      });
  EXPECT_TRUE(nuisance::has_estimator("mean_only"));
  nuisance::NuisanceParams params;
  params.method = "mean_only";
  Rng rng(1);
  const auto model = nuisance::fit_nuisance(Matrix::Zero(4, 2), Vector::LinSpaced(4, 1, 4), params, rng);
  const Matrix probe = Matrix::Zero(1, 2);
  EXPECT_DOUBLE_EQ(model.predict(probe)(0), 2.5);
}
