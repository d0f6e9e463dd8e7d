#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "plmtest/seeds.hpp"

namespace plmtest {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

// Minimum rows for running a test: each half needs four rows for the trace
// estimator.
inline constexpr Index kMinTestRows = 8;

// Response y, interest covariates x (n x p1) and nuisance covariates z (n x p2).
struct Dataset {
  Matrix x;
  Matrix z;
  Vector y;

  Index rows() const noexcept { return y.size(); }
  Index p1() const noexcept { return x.cols(); }
  Index p2() const noexcept { return z.cols(); }

  // Rows in the given order.
  Dataset subset(std::span<const Index> rows) const;

  // Interest and nuisance covariates exchanged (for testing beta_Z = 0).
  Dataset swapped_roles() const { return Dataset{z, x, y}; }
};

// Throws Error{dimension_mismatch | non_finite_entry} naming the field/row.
void validate(const Dataset& d);

// Every column of x and z and the response centred to mean 0 and scaled to
// sample variance 1 (divisor n - 1). Throws Error{constant_column}.
Dataset standardize(const Dataset& d);

// Equal halves d1, d2 of {0..n_total-1}; with odd n_total one uniformly chosen
// row is left out and recorded in `dropped`.
struct SplitPlan {
  std::vector<Index> d1;
  std::vector<Index> d2;
  std::optional<Index> dropped;

  Index half_size() const noexcept { return static_cast<Index>(d1.size()); }
  const std::vector<Index>& fold(int k) const { return k == 0 ? d1 : d2; }
};

// Throws Error{too_few_rows} when n_total < 8.
SplitPlan random_split(Index n_total, Rng& rng);

}  // namespace plmtest
