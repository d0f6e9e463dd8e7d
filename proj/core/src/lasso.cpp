#include "plmtest/lasso.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "plmtest/error.hpp"

namespace plmtest::lasso {

Design make_design(const Matrix& z, const Vector& y) {
  const Index n = z.rows();
  if (y.size() != n) throw Error(ErrorCode::dimension_mismatch, "lasso: z rows != y length");
  if (n < 2) throw Error(ErrorCode::too_few_rows, "lasso needs at least 2 rows");

  Design d;
  d.zs = z;
  d.center.resize(z.cols());
  d.scale.resize(z.cols());
  const double inv_n = 1.0 / static_cast<double>(n);
  for (Index j = 0; j < z.cols(); ++j) {
    auto col = d.zs.col(j);
    const double mean = col.mean();
    col.array() -= mean;
    const double sd = std::sqrt(col.squaredNorm() * inv_n);
    d.center(j) = mean;
    // Columns that are constant up to rounding carry no information.
    if (sd > 1e-12 * std::max(1.0, std::abs(mean))) {
      d.scale(j) = sd;
      col /= sd;
    } else {
      d.scale(j) = 0.0;
      col.setZero();
    }
  }
  d.y_mean = y.mean();
  d.yc = y.array() - d.y_mean;
  return d;
}

double lambda_max(const Design& design) {
  if (design.cols() == 0) return 0.0;
  return (design.zs.transpose() * design.yc).cwiseAbs().maxCoeff() /
         static_cast<double>(design.rows());
}

Vector LassoFit::predict(const Matrix& z) const {
  return (z * coefficients).array() + intercept;
}

namespace {

double soft_threshold(double v, double t) noexcept {
  if (v > t) return v - t;
  if (v < -t) return v + t;
  return 0.0;
}

// Mutable solver state for one design; warm starts carry it along a path.
class CoordinateDescent {
 public:
  CoordinateDescent(const Design& design, const SolverOptions& opts)
      : design_(design),
        opts_(opts),
        inv_n_(1.0 / static_cast<double>(design.rows())),
        lambda_max_(lambda_max(design)),
        beta_(Vector::Zero(design.cols())),
        resid_(design.yc),
        in_working_set_(static_cast<std::size_t>(design.cols()), 0) {
    refresh_gradient();
  }

  const Vector& beta() const noexcept { return beta_; }
  const Vector& resid() const noexcept { return resid_; }
  const Vector& gradient() const noexcept { return grad_; }
  int sweeps() const noexcept { return sweeps_; }
  std::vector<double>& objective_trace() noexcept { return trace_; }

  double objective(double lambda) const {
    return 0.5 * inv_n_ * resid_.squaredNorm() + lambda * beta_.lpNorm<1>();
  }

  // Solves at `lambda`, screening with the sequential strong rule relative to
  // the previous penalty on the path. Returns false if the sweep budget ran out.
  bool solve(double lambda, double previous_lambda) {
    budget_end_ = sweeps_ + opts_.max_sweeps;
    // The all-zero start is already optimal; skip sweeps that could only add
    // rounding noise.
    if (lambda >= lambda_max_ && beta_.isZero(0.0)) return true;
    working_set_.clear();
    std::fill(in_working_set_.begin(), in_working_set_.end(), 0);
    const double strong = 2.0 * lambda - previous_lambda;
    for (Index j = 0; j < design_.cols(); ++j) {
      if (design_.scale(j) == 0.0) continue;
      if (beta_(j) != 0.0 || std::abs(grad_(j)) >= strong) add_to_working_set(j);
    }

    while (true) {
      if (!solve_working_set(lambda)) return false;
      refresh_gradient();
      bool violated = false;
      for (Index j = 0; j < design_.cols(); ++j) {
        if (in_working_set_[static_cast<std::size_t>(j)] || design_.scale(j) == 0.0) continue;
        if (std::abs(grad_(j)) > lambda) {
          add_to_working_set(j);
          violated = true;
        }
      }
      if (!violated) return true;
    }
  }

 private:
  void add_to_working_set(Index j) {
    in_working_set_[static_cast<std::size_t>(j)] = 1;
    working_set_.push_back(j);
  }

  void refresh_gradient() { grad_ = design_.zs.transpose() * resid_ * inv_n_; }

  // One cyclic pass over `coords`; returns the largest coefficient change.
  double sweep(const std::vector<Index>& coords, double lambda) {
    double max_change = 0.0;
    for (Index j : coords) {
      const auto col = design_.zs.col(j);
      const double old = beta_(j);
      const double g = col.dot(resid_) * inv_n_;
      const double updated = soft_threshold(old + g, lambda);
      const double delta = updated - old;
      if (delta != 0.0) {
        resid_.noalias() -= delta * col;
        beta_(j) = updated;
        max_change = std::max(max_change, std::abs(delta));
      }
    }
    ++sweeps_;
    if (opts_.record_objective) trace_.push_back(objective(lambda));
    return max_change;
  }

  bool solve_working_set(double lambda) {
    while (true) {
      if (sweeps_ >= budget_end_) return false;
      if (sweep(working_set_, lambda) < opts_.tolerance) return true;

      // Iterate on the nonzero coefficients until they settle, then re-check
      // the whole working set.
      active_.clear();
      for (Index j : working_set_) {
        if (beta_(j) != 0.0) active_.push_back(j);
      }
      while (true) {
        if (sweeps_ >= budget_end_) return false;
        if (sweep(active_, lambda) < opts_.tolerance) break;
      }
    }
  }

  const Design& design_;
  SolverOptions opts_;
  double inv_n_;
  double lambda_max_;
  Vector beta_;
  Vector resid_;
  Vector grad_;
  std::vector<char> in_working_set_;
  std::vector<Index> working_set_;
  std::vector<Index> active_;
  std::vector<double> trace_;
  int sweeps_ = 0;
  int budget_end_ = 0;
};

double kkt_from_gradient(const Design& design, const Vector& beta, const Vector& grad,
                         double lambda) {
  double worst = 0.0;
  for (Index j = 0; j < design.cols(); ++j) {
    if (design.scale(j) == 0.0) continue;
    const double v = beta(j) != 0.0 ? std::abs(grad(j) - lambda * (beta(j) > 0 ? 1.0 : -1.0))
                                    : std::max(0.0, std::abs(grad(j)) - lambda);
    worst = std::max(worst, v);
  }
  return worst;
}

LassoFit to_original_scale(const Design& design, const Vector& beta, double lambda) {
  LassoFit fit;
  fit.lambda = lambda;
  fit.std_coefficients = beta;
  fit.center = design.center;
  fit.scale = design.scale;
  fit.coefficients = Vector::Zero(beta.size());
  for (Index j = 0; j < beta.size(); ++j) {
    if (design.scale(j) > 0.0) fit.coefficients(j) = beta(j) / design.scale(j);
  }
  fit.intercept = design.y_mean - design.center.dot(fit.coefficients);
  return fit;
}

}  // namespace

double kkt_residual(const Design& design, const Vector& std_coefficients, double lambda) {
  const Vector resid = design.yc - design.zs * std_coefficients;
  const Vector grad = design.zs.transpose() * resid / static_cast<double>(design.rows());
  return kkt_from_gradient(design, std_coefficients, grad, lambda);
}

LassoFit lasso_fit(const Matrix& z, const Vector& y, double lambda, const SolverOptions& opts) {
  if (!(lambda >= 0.0)) throw Error(ErrorCode::domain_error, "lambda must be >= 0");
  const Design design = make_design(z, y);
  CoordinateDescent cd(design, opts);
  const double lmax = lambda_max(design);
  const bool ok = cd.solve(lambda, std::max(lmax, lambda));
  const double kkt = kkt_from_gradient(design, cd.beta(), cd.gradient(), lambda);
  if (!ok) {
    throw Error(ErrorCode::non_convergence,
                "lasso did not converge in " + std::to_string(opts.max_sweeps) +
                    " sweeps (KKT residual " + std::to_string(kkt) + ")");
  }
  LassoFit fit = to_original_scale(design, cd.beta(), lambda);
  fit.sweeps = cd.sweeps();
  fit.kkt_residual = kkt;
  fit.objective_trace = std::move(cd.objective_trace());
  return fit;
}

std::vector<double> lambda_grid(double lmax, int count, double ratio) {
  std::vector<double> out;
  if (count <= 0) return out;
  if (!(lmax > 0.0)) return {0.0};
  out.reserve(static_cast<std::size_t>(count));
  if (count == 1) return {lmax};
  const double log_hi = std::log(lmax);
  const double log_lo = std::log(lmax * ratio);
  for (int i = 0; i < count; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(count - 1);
    out.push_back(std::exp(log_hi + t * (log_lo - log_hi)));
  }
  out.front() = lmax;
  return out;
}

std::vector<LassoFit> lasso_path(const Design& design, const std::vector<double>& lambdas,
                                 const PathOptions& opts) {
  std::vector<LassoFit> fits;
  if (lambdas.empty()) return fits;
  fits.reserve(lambdas.size());

  CoordinateDescent cd(design, opts.solver);
  const double tss = design.yc.squaredNorm();
  double previous = std::max(lambdas.front(), lambda_max(design));
  for (double lambda : lambdas) {
    const int before = cd.sweeps();
    if (!cd.solve(lambda, previous)) break;
    LassoFit fit = to_original_scale(design, cd.beta(), lambda);
    fit.sweeps = cd.sweeps() - before;
    fit.kkt_residual = kkt_from_gradient(design, cd.beta(), cd.gradient(), lambda);
    fits.push_back(std::move(fit));
    previous = lambda;
    if (tss > 0.0 && 1.0 - cd.resid().squaredNorm() / tss >= opts.max_dev_ratio) break;
  }
  return fits;
}

CvResult lasso_cv(const Matrix& z, const Vector& y, const CvOptions& opts, Rng& rng) {
  const Index n = z.rows();
  if (y.size() != n) throw Error(ErrorCode::dimension_mismatch, "lasso_cv: z rows != y length");
  if (opts.folds < 2 || n < opts.folds) {
    throw Error(ErrorCode::too_few_rows, "lasso_cv needs n >= folds >= 2 (n = " +
                                             std::to_string(n) + ", folds = " +
                                             std::to_string(opts.folds) + ")");
  }

  const Design full = make_design(z, y);
  CvResult result;
  result.lambdas = lambda_grid(lambda_max(full), opts.path_length, opts.lambda_ratio);

  std::vector<Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), Index{0});
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<int> fold_of(static_cast<std::size_t>(n));
  for (std::size_t i = 0; i < perm.size(); ++i) {
    fold_of[static_cast<std::size_t>(perm[i])] = static_cast<int>(i % static_cast<std::size_t>(opts.folds));
  }

  std::vector<double> sse(result.lambdas.size(), 0.0);
  std::size_t usable = result.lambdas.size();
  for (int k = 0; k < opts.folds; ++k) {
    std::vector<Index> train, held;
    for (Index i = 0; i < n; ++i) {
      (fold_of[static_cast<std::size_t>(i)] == k ? held : train).push_back(i);
    }
    Matrix z_train(static_cast<Index>(train.size()), z.cols());
    Vector y_train(static_cast<Index>(train.size()));
    for (std::size_t i = 0; i < train.size(); ++i) {
      z_train.row(static_cast<Index>(i)) = z.row(train[i]);
      y_train(static_cast<Index>(i)) = y(train[i]);
    }
    Matrix z_held(static_cast<Index>(held.size()), z.cols());
    Vector y_held(static_cast<Index>(held.size()));
    for (std::size_t i = 0; i < held.size(); ++i) {
      z_held.row(static_cast<Index>(i)) = z.row(held[i]);
      y_held(static_cast<Index>(i)) = y(held[i]);
    }

    const auto path = lasso_path(make_design(z_train, y_train), result.lambdas, opts.path);
    usable = std::min(usable, path.size());
    for (std::size_t l = 0; l < path.size(); ++l) {
      sse[l] += (y_held - path[l].predict(z_held)).squaredNorm();
    }
  }
  if (usable == 0) {
    throw Error(ErrorCode::non_convergence, "lasso_cv: no lambda converged in every fold");
  }

  result.cv_error.resize(usable);
  for (std::size_t l = 0; l < usable; ++l) result.cv_error[l] = sse[l] / static_cast<double>(n);
  result.selected = static_cast<Index>(
      std::min_element(result.cv_error.begin(), result.cv_error.end()) - result.cv_error.begin());

  const std::vector<double> head(result.lambdas.begin(),
                                 result.lambdas.begin() + result.selected + 1);
  auto refit = lasso_path(full, head, opts.path);
  if (refit.empty()) {
    throw Error(ErrorCode::non_convergence, "lasso_cv: refit on all rows failed");
  }
  // An early-stopped refit already interpolates; its last fit stands in.
  result.fit = std::move(refit.back());
  return result;
}

}  // namespace plmtest::lasso
