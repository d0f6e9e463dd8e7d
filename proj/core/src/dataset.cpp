#include "plmtest/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "plmtest/error.hpp"

namespace plmtest {

Dataset Dataset::subset(std::span<const Index> rows) const {
  Dataset out;
  out.x.resize(static_cast<Index>(rows.size()), x.cols());
  out.z.resize(static_cast<Index>(rows.size()), z.cols());
  out.y.resize(static_cast<Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto r = rows[i];
    const auto k = static_cast<Index>(i);
    out.x.row(k) = x.row(r);
    out.z.row(k) = z.row(r);
    out.y(k) = y(r);
  }
  return out;
}

namespace {

void check_finite(const Matrix& m, const char* name) {
  for (Index j = 0; j < m.cols(); ++j) {
    for (Index i = 0; i < m.rows(); ++i) {
      if (!std::isfinite(m(i, j))) {
        throw Error(ErrorCode::non_finite_entry,
                    std::string(name) + " row " + std::to_string(i) + " column " +
                        std::to_string(j));
      }
    }
  }
}

void standardize_columns(Matrix& m, const char* name) {
  const Index n = m.rows();
  for (Index j = 0; j < m.cols(); ++j) {
    auto col = m.col(j);
    const double mean = col.mean();
    col.array() -= mean;
    const double sd = std::sqrt(col.squaredNorm() / static_cast<double>(n - 1));
    if (!(sd > 0.0)) {
      throw Error(ErrorCode::constant_column, std::string(name) + " column " + std::to_string(j));
    }
    col /= sd;
  }
}

}  // namespace

void validate(const Dataset& d) {
  const Index n = d.y.size();
  if (d.x.rows() != n) {
    throw Error(ErrorCode::dimension_mismatch, "x has " + std::to_string(d.x.rows()) +
                                                   " rows but y has length " + std::to_string(n));
  }
  if (d.z.rows() != n) {
    throw Error(ErrorCode::dimension_mismatch, "z has " + std::to_string(d.z.rows()) +
                                                   " rows but y has length " + std::to_string(n));
  }
  if (d.x.cols() < 1) throw Error(ErrorCode::dimension_mismatch, "x has no columns");
  if (d.z.cols() < 1) throw Error(ErrorCode::dimension_mismatch, "z has no columns");
  check_finite(d.x, "x");
  check_finite(d.z, "z");
  for (Index i = 0; i < n; ++i) {
    if (!std::isfinite(d.y(i))) {
      throw Error(ErrorCode::non_finite_entry, "y row " + std::to_string(i));
    }
  }
}

Dataset standardize(const Dataset& d) {
  if (d.rows() < 2) throw Error(ErrorCode::too_few_rows, "standardize needs at least 2 rows");
  Dataset out = d;
  standardize_columns(out.x, "x");
  standardize_columns(out.z, "z");
  Matrix ym = out.y;
  standardize_columns(ym, "y");
  out.y = ym.col(0);
  return out;
}

SplitPlan random_split(Index n_total, Rng& rng) {
  if (n_total < kMinTestRows) {
    throw Error(ErrorCode::too_few_rows,
                "need at least " + std::to_string(kMinTestRows) + " rows, got " +
                    std::to_string(n_total));
  }
  std::vector<Index> perm(static_cast<std::size_t>(n_total));
  std::iota(perm.begin(), perm.end(), Index{0});
  std::shuffle(perm.begin(), perm.end(), rng);

  SplitPlan plan;
  if (n_total % 2 == 1) {
    plan.dropped = perm.back();
    perm.pop_back();
  }
  const auto half = perm.size() / 2;
  plan.d1.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(half));
  plan.d2.assign(perm.begin() + static_cast<std::ptrdiff_t>(half), perm.end());
  // Ascending order inside each half: the trace estimator sums over ordered
  // index quadruples of the original data.
  std::sort(plan.d1.begin(), plan.d1.end());
  std::sort(plan.d2.begin(), plan.d2.end());
  return plan;
}

}  // namespace plmtest
