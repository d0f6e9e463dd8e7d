#include "plmtest/forest.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "plmtest/error.hpp"

namespace plmtest::forest {

double RegressionTree::predict(const Eigen::Ref<const Vector>& row) const {
  int k = 0;
  while (nodes_[static_cast<std::size_t>(k)].feature >= 0) {
    const auto& node = nodes_[static_cast<std::size_t>(k)];
    k = row(node.feature) <= node.threshold ? node.left : node.right;
  }
  return nodes_[static_cast<std::size_t>(k)].value;
}

double RandomForest::predict(const Eigen::Ref<const Vector>& row) const {
  double sum = 0.0;
  for (const auto& t : trees_) sum += t.predict(row);
  return sum / static_cast<double>(trees_.size());
}

Vector RandomForest::predict(const Matrix& z) const {
  Vector out(z.rows());
  Vector row(z.cols());
  for (Index i = 0; i < z.rows(); ++i) {
    row = z.row(i).transpose();
    out(i) = predict(Eigen::Ref<const Vector>(row));
  }
  return out;
}

namespace {

class TreeBuilder {
 public:
  TreeBuilder(const Matrix& z, const Vector& y, int mtry, int min_leaf, Rng& rng)
      : z_(z), y_(y), mtry_(mtry), min_leaf_(min_leaf), rng_(rng),
        features_(static_cast<std::size_t>(z.cols())) {
    std::iota(features_.begin(), features_.end(), Index{0});
  }

  RegressionTree build(std::vector<Index> rows) {
    nodes_.clear();
    grow(rows);
    return RegressionTree(std::move(nodes_));
  }

 private:
  struct Split {
    Index feature = -1;
    double threshold = 0.0;
    double score = 0.0;
  };

  double mean_of(const std::vector<Index>& rows) const {
    double s = 0.0;
    for (Index i : rows) s += y_(i);
    return s / static_cast<double>(rows.size());
  }

  int grow(std::vector<Index>& rows) {
    const int id = static_cast<int>(nodes_.size());
    nodes_.push_back({});
    nodes_.back().value = mean_of(rows);

    const auto m = static_cast<Index>(rows.size());
    if (m < 2 * min_leaf_) return id;

    const Split best = find_split(rows);
    if (best.feature < 0) return id;

    std::vector<Index> left, right;
    for (Index i : rows) (z_(i, best.feature) <= best.threshold ? left : right).push_back(i);
    rows.clear();
    rows.shrink_to_fit();

    nodes_[static_cast<std::size_t>(id)].feature = best.feature;
    nodes_[static_cast<std::size_t>(id)].threshold = best.threshold;
    const int l = grow(left);
    nodes_[static_cast<std::size_t>(id)].left = l;
    const int r = grow(right);
    nodes_[static_cast<std::size_t>(id)].right = r;
    return id;
  }

  // Maximizes S_L^2/n_L + S_R^2/n_R, which is equivalent to minimizing the
  // children's total SSE; a split must beat the parent's S^2/n.
  Split find_split(const std::vector<Index>& rows) {
    const auto m = rows.size();
    double total = 0.0;
    for (Index i : rows) total += y_(i);
    const double parent = total * total / static_cast<double>(m);

    Split best;
    best.score = parent + 1e-12 * std::max(1.0, std::abs(parent));

    // Partial Fisher-Yates draw of mtry features without replacement.
    const auto p = features_.size();
    const auto tries = std::min<std::size_t>(static_cast<std::size_t>(mtry_), p);
    for (std::size_t t = 0; t < tries; ++t) {
      std::uniform_int_distribution<std::size_t> pick(t, p - 1);
      std::swap(features_[t], features_[pick(rng_)]);
    }

    pairs_.resize(m);
    for (std::size_t t = 0; t < tries; ++t) {
      const Index f = features_[t];
      for (std::size_t k = 0; k < m; ++k) pairs_[k] = {z_(rows[k], f), y_(rows[k])};
      std::sort(pairs_.begin(), pairs_.end(),
                [](const auto& a, const auto& b) { return a.first < b.first; });

      double left_sum = 0.0;
      const auto min_leaf = static_cast<std::size_t>(min_leaf_);
      for (std::size_t k = 0; k + 1 < m; ++k) {
        left_sum += pairs_[k].second;
        const std::size_t n_left = k + 1;
        if (n_left < min_leaf) continue;
        if (m - n_left < min_leaf) break;
        if (pairs_[k].first == pairs_[k + 1].first) continue;
        const double right_sum = total - left_sum;
        const double score = left_sum * left_sum / static_cast<double>(n_left) +
                             right_sum * right_sum / static_cast<double>(m - n_left);
        if (score > best.score) {
          best.score = score;
          best.feature = f;
          best.threshold = 0.5 * (pairs_[k].first + pairs_[k + 1].first);
        }
      }
    }
    return best;
  }

  const Matrix& z_;
  const Vector& y_;
  int mtry_;
  int min_leaf_;
  Rng& rng_;
  std::vector<Index> features_;
  std::vector<std::pair<double, double>> pairs_;
  std::vector<RegressionTree::Node> nodes_;
};

}  // namespace

RandomForest forest_fit(const Matrix& z, const Vector& y, const ForestParams& params, Rng& rng) {
  const Index n = z.rows();
  if (y.size() != n) throw Error(ErrorCode::dimension_mismatch, "forest: z rows != y length");
  if (n < 10) throw Error(ErrorCode::too_few_rows, "forest needs at least 10 rows");
  if (params.trees < 1 || params.min_leaf < 1) {
    throw Error(ErrorCode::config_error, "forest needs trees >= 1 and min_leaf >= 1");
  }
  const int mtry = params.mtry > 0
                       ? params.mtry
                       : std::max(1, static_cast<int>(z.cols() / 3));

  TreeBuilder builder(z, y, mtry, params.min_leaf, rng);
  std::vector<RegressionTree> trees;
  trees.reserve(static_cast<std::size_t>(params.trees));
  std::uniform_int_distribution<Index> draw(0, n - 1);
  for (int t = 0; t < params.trees; ++t) {
    std::vector<Index> rows(static_cast<std::size_t>(n));
    if (params.bootstrap) {
      for (auto& r : rows) r = draw(rng);
    } else {
      std::iota(rows.begin(), rows.end(), Index{0});
    }
    trees.push_back(builder.build(std::move(rows)));
  }
  return RandomForest(std::move(trees));
}

}  // namespace plmtest::forest
