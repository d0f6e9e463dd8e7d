#pragma once

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "plmtest/dataset.hpp"
#include "plmtest/forest.hpp"
#include "plmtest/lasso.hpp"

namespace plmtest::nuisance {

struct NuisanceParams {
  std::string method = "lasso";
  int folds = 10;
  int path_length = 100;
  double lambda_ratio = 1e-3;
  forest::ForestParams forest;
};

// A fitted g-hat: maps a nuisance-covariate row to a scalar. Immutable and
// cheap to copy (the fitted state is shared).
class NuisanceModel {
 public:
  using RowPredictor = std::function<double(const Eigen::Ref<const Vector>&)>;

  NuisanceModel() = default;
  NuisanceModel(std::string name, RowPredictor predictor,
                std::map<std::string, double> hyperparameters = {})
      : name_(std::move(name)),
        predictor_(std::make_shared<const RowPredictor>(std::move(predictor))),
        hyperparameters_(std::move(hyperparameters)) {}

  double predict(const Eigen::Ref<const Vector>& z_row) const { return (*predictor_)(z_row); }
  Vector predict(const Matrix& z) const;

  const std::string& name() const noexcept { return name_; }
  const std::map<std::string, double>& hyperparameters() const noexcept { return hyperparameters_; }
  int training_fold() const noexcept { return training_fold_; }
  void set_training_fold(int k) noexcept { training_fold_ = k; }

 private:
  std::string name_;
  std::shared_ptr<const RowPredictor> predictor_;
  std::map<std::string, double> hyperparameters_;
  int training_fold_ = -1;
};

// Every estimator sees only (z, y); the interest covariates never reach it.
using Estimator =
    std::function<NuisanceModel(const Matrix& z, const Vector& y, const NuisanceParams&, Rng&)>;

// Lasso with K-fold CV-selected penalty, refit on all rows.
NuisanceModel lasso_cv(const Matrix& z, const Vector& y, const NuisanceParams& params, Rng& rng);

NuisanceModel forest_fit(const Matrix& z, const Vector& y, const NuisanceParams& params, Rng& rng);

// Adds or replaces an estimator under `name`. "lasso" and "forest" are built in.
void register_estimator(const std::string& name, Estimator estimator);
std::vector<std::string> registered_estimators();
bool has_estimator(const std::string& name);

// Dispatches on params.method. Throws Error{unknown_method}.
NuisanceModel fit_nuisance(const Matrix& z, const Vector& y, const NuisanceParams& params,
                           Rng& rng);

inline NuisanceModel fit_nuisance(const Dataset& d_fit, const NuisanceParams& params, Rng& rng) {
  return fit_nuisance(d_fit.z, d_fit.y, params, rng);
}

}  // namespace plmtest::nuisance
