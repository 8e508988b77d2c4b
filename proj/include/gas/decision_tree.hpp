#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "gas/linalg.hpp"

namespace gas {

/// One node of a binary CART tree. feature == -1 marks a leaf; interior nodes
/// route x[feature] <= threshold to `left`, otherwise to `right`. Every node
/// carries the majority label of its training subset so truncated trees stay
/// total functions.
struct TreeNode {
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  int label = 0;
};

/// Depth-limited binary decision tree with Gini splits. Training is fully
/// deterministic: features are scanned in order, candidate thresholds
/// ascending, and only strict impurity improvements replace the incumbent.
class DecisionTree {
 public:
  /// x holds one sample per row; y holds label indices in [0, n_labels).
  static DecisionTree fit(const Matrix& x, const std::vector<int>& y, int n_labels,
                          int max_depth = 8, int min_leaf = 1);

  static DecisionTree from_nodes(std::vector<TreeNode> nodes, int n_features);

  int predict(std::span<const double> features) const;

  const std::vector<TreeNode>& nodes() const { return nodes_; }
  int n_features() const { return n_features_; }
  bool is_single_leaf() const { return nodes_.size() == 1; }

 private:
  std::vector<TreeNode> nodes_;
  int n_features_ = 0;
};

/// Categorical one-step predictor: a tree over continuous features whose
/// labels index into `categories`, plus a summary of the grid it was trained
/// on.
struct AncillaryClassifier {
  DecisionTree tree;
  std::vector<std::string> categories;
  std::vector<int> grid_shape;
  std::size_t training_samples = 0;
  double training_accuracy = 0.0;

  int predict_index(std::span<const double> features) const { return tree.predict(features); }
  const std::string& predict(std::span<const double> features) const {
    return categories[static_cast<std::size_t>(predict_index(features))];
  }
};

}  // namespace gas
