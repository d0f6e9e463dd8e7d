#pragma once

#include <vector>

#include "plmtest/dataset.hpp"

namespace plmtest::forest {

struct ForestParams {
  int trees = 100;
  int mtry = 0;  // features tried per split; 0 means max(1, floor(p / 3))
  int min_leaf = 5;
  bool bootstrap = true;
};

// CART regression tree stored as a flat node array; node 0 is the root.
class RegressionTree {
 public:
  struct Node {
    Index feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;
  };

  RegressionTree() = default;
  explicit RegressionTree(std::vector<Node> nodes) : nodes_(std::move(nodes)) {}

  double predict(const Eigen::Ref<const Vector>& row) const;
  const std::vector<Node>& nodes() const noexcept { return nodes_; }

 private:
  std::vector<Node> nodes_;
};

class RandomForest {
 public:
  RandomForest() = default;
  explicit RandomForest(std::vector<RegressionTree> trees) : trees_(std::move(trees)) {}

  // Average of the tree predictions.
  double predict(const Eigen::Ref<const Vector>& row) const;
  Vector predict(const Matrix& z) const;
  std::size_t size() const noexcept { return trees_.size(); }

 private:
  std::vector<RegressionTree> trees_;
};

// Bagged CART trees; each split minimizes the children's summed squared error
// over a fresh random subset of `mtry` features. Throws Error{too_few_rows} for
// n < 10.
RandomForest forest_fit(const Matrix& z, const Vector& y, const ForestParams& params, Rng& rng);

}  // namespace plmtest::forest
