#pragma once

#include <vector>

#include "plmtest/dataset.hpp"

namespace plmtest::lasso {

struct SolverOptions {
  double tolerance = 1e-7;  // max standardized coefficient change per sweep
  int max_sweeps = 1000;
  bool record_objective = false;
};

// Columns centred and scaled to unit (1/n) second moment; the penalty acts on
// this scale, as in glmnet's default.
struct Design {
  Matrix zs;
  Vector center;
  Vector scale;  // 0 marks a constant column, which never enters the model
  Vector yc;
  double y_mean = 0.0;

  Index rows() const noexcept { return zs.rows(); }
  Index cols() const noexcept { return zs.cols(); }
};

Design make_design(const Matrix& z, const Vector& y);

// (1/n) max_j |zs_j' yc|: the smallest penalty with an all-zero solution.
double lambda_max(const Design& design);

struct LassoFit {
  double intercept = 0.0;
  Vector coefficients;      // original scale
  Vector std_coefficients;  // standardized scale
  double lambda = 0.0;
  Vector center;
  Vector scale;
  int sweeps = 0;
  double kkt_residual = 0.0;
  std::vector<double> objective_trace;  // filled when record_objective is set

  double predict(const Eigen::Ref<const Vector>& z_row) const {
    return intercept + z_row.dot(coefficients);
  }
  Vector predict(const Matrix& z) const;
};

// Minimizes (1/2n)||yc - zs b||^2 + lambda ||b||_1 by cyclic coordinate descent
// and maps b back to the original scale. Throws Error{non_convergence} (with the
// KKT residual) when the sweep budget runs out.
LassoFit lasso_fit(const Matrix& z, const Vector& y, double lambda,
                   const SolverOptions& opts = {});

// Largest KKT violation on the standardized problem: |g_j - lambda sign(b_j)|
// for active j, max(0, |g_j| - lambda) otherwise, with g = zs'(yc - zs b)/n.
double kkt_residual(const Design& design, const Vector& std_coefficients, double lambda);

// Descending log-spaced grid from lambda_max to ratio * lambda_max.
std::vector<double> lambda_grid(double lambda_max, int count, double ratio);

struct PathOptions {
  SolverOptions solver;
  // glmnet's early exit: stop once the fraction of deviance explained reaches
  // this value (the remaining fits interpolate the training data).
  double max_dev_ratio = 0.999;
};

// Warm-started fits along `lambdas`. The result can be shorter than `lambdas`
// when the path stops early (deviance saturation or a fit that runs out of
// sweeps); it is never empty unless `lambdas` is.
std::vector<LassoFit> lasso_path(const Design& design, const std::vector<double>& lambdas,
                                 const PathOptions& opts = {});

struct CvOptions {
  int folds = 10;
  int path_length = 100;
  double lambda_ratio = 1e-3;
  PathOptions path;
};

struct CvResult {
  LassoFit fit;  // refit on all rows at the selected lambda
  std::vector<double> lambdas;
  std::vector<double> cv_error;  // mean out-of-fold squared error per lambda
  Index selected = 0;
};

// K-fold cross-validation over the path; picks the lambda with minimum mean
// out-of-fold squared error. Folds come from a permutation drawn from `rng`.
CvResult lasso_cv(const Matrix& z, const Vector& y, const CvOptions& opts, Rng& rng);

}  // namespace plmtest::lasso
