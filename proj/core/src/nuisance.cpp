#include "plmtest/nuisance.hpp"

#include <mutex>

#include "plmtest/error.hpp"

namespace plmtest::nuisance {

Vector NuisanceModel::predict(const Matrix& z) const {
  Vector out(z.rows());
  Vector row(z.cols());
  for (Index i = 0; i < z.rows(); ++i) {
    row = z.row(i).transpose();
    out(i) = predict(Eigen::Ref<const Vector>(row));
  }
  return out;
}

NuisanceModel lasso_cv(const Matrix& z, const Vector& y, const NuisanceParams& params, Rng& rng) {
  lasso::CvOptions opts;
  opts.folds = params.folds;
  opts.path_length = params.path_length;
  opts.lambda_ratio = params.lambda_ratio;
  auto cv = lasso::lasso_cv(z, y, opts, rng);

  auto fit = std::make_shared<const lasso::LassoFit>(std::move(cv.fit));
  const auto active = (fit->coefficients.array() != 0.0).count();
  std::map<std::string, double> hyper{
      {"lambda", fit->lambda},
      {"lambda_index", static_cast<double>(cv.selected)},
      {"active", static_cast<double>(active)},
      {"cv_error", cv.cv_error[static_cast<std::size_t>(cv.selected)]},
  };
  return NuisanceModel(
      "lasso", [fit](const Eigen::Ref<const Vector>& row) { return fit->predict(row); },
      std::move(hyper));
}

NuisanceModel forest_fit(const Matrix& z, const Vector& y, const NuisanceParams& params, Rng& rng) {
  auto rf = std::make_shared<const forest::RandomForest>(
      forest::forest_fit(z, y, params.forest, rng));
  std::map<std::string, double> hyper{
      {"trees", static_cast<double>(params.forest.trees)},
      {"mtry", static_cast<double>(params.forest.mtry > 0
                                       ? params.forest.mtry
                                       : std::max<Index>(1, z.cols() / 3))},
      {"min_leaf", static_cast<double>(params.forest.min_leaf)},
  };
  return NuisanceModel(
      "forest", [rf](const Eigen::Ref<const Vector>& row) { return rf->predict(row); },
      std::move(hyper));
}

namespace {

struct Registry {
  std::mutex mutex;
  std::map<std::string, Estimator> estimators{
      {"lasso", &lasso_cv},
      {"forest", &forest_fit},
  };
};

Registry& registry() {
  static Registry r;
  return r;
}

}  // namespace

void register_estimator(const std::string& name, Estimator estimator) {
  auto& r = registry();
  std::lock_guard lock(r.mutex);
  r.estimators[name] = std::move(estimator);
}

std::vector<std::string> registered_estimators() {
  auto& r = registry();
  std::lock_guard lock(r.mutex);
  std::vector<std::string> names;
  for (const auto& [name, _] : r.estimators) names.push_back(name);
  return names;
}

bool has_estimator(const std::string& name) {
  auto& r = registry();
  std::lock_guard lock(r.mutex);
  return r.estimators.contains(name);
}

NuisanceModel fit_nuisance(const Matrix& z, const Vector& y, const NuisanceParams& params,
                           Rng& rng) {
  Estimator estimator;
  {
    auto& r = registry();
    std::lock_guard lock(r.mutex);
    const auto it = r.estimators.find(params.method);
    if (it == r.estimators.end()) {
      throw Error(ErrorCode::unknown_method, "no nuisance estimator named '" + params.method + "'");
    }
    estimator = it->second;
  }
  if (z.rows() == 0) throw Error(ErrorCode::too_few_rows, "empty training half");
  return estimator(z, y, params, rng);
}

}  // namespace plmtest::nuisance
