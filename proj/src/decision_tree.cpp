#include "gas/decision_tree.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gas/common.hpp"

namespace gas {

namespace {

double gini(const std::vector<std::size_t>& counts, std::size_t total) {
  double sum_sq = 0.0;
  for (std::size_t c : counts) {
    const double p = static_cast<double>(c) / static_cast<double>(total);
    sum_sq += p * p;
  }
  return 1.0 - sum_sq;
}

int majority_label(const std::vector<std::size_t>& counts) {
  std::size_t best = 0;
  int label = 0;
  for (std::size_t k = 0; k < counts.size(); ++k) {
    if (counts[k] > best) {  // ties keep the smallest label
      best = counts[k];
      label = static_cast<int>(k);
    }
  }
  return label;
}

struct Builder {
  const Matrix& x;
  const std::vector<int>& y;
  int n_labels;
  int max_depth;
  int min_leaf;
  std::vector<TreeNode> nodes;

  int build(std::vector<std::size_t>& idx, std::size_t begin, std::size_t end, int depth) {
    const std::size_t n = end - begin;
    std::vector<std::size_t> counts(static_cast<std::size_t>(n_labels), 0);
    for (std::size_t p = begin; p < end; ++p) counts[static_cast<std::size_t>(y[idx[p]])]++;
    const int label = majority_label(counts);
    const double impurity = gini(counts, n);

    const int node_id = static_cast<int>(nodes.size());
    nodes.push_back(TreeNode{-1, 0.0, -1, -1, label});
    if (impurity == 0.0 || depth >= max_depth || n < 2 * static_cast<std::size_t>(min_leaf)) {
      return node_id;
    }

    // Exhaustive threshold scan per feature; strictly better weighted Gini
    // wins, first encountered on ties.
    int best_feature = -1;
    double best_threshold = 0.0;
    double best_score = impurity - 1e-12;
    std::vector<std::size_t> order(idx.begin() + static_cast<std::ptrdiff_t>(begin),
                                   idx.begin() + static_cast<std::ptrdiff_t>(end));
    std::vector<std::size_t> left_counts(static_cast<std::size_t>(n_labels));
    for (std::size_t feature = 0; feature < x.cols; ++feature) {
      std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const double va = x(a, feature), vb = x(b, feature);
        return va != vb ? va < vb : a < b;
      });
      std::fill(left_counts.begin(), left_counts.end(), 0);
      std::vector<std::size_t> right_counts = counts;
      for (std::size_t p = 0; p + 1 < n; ++p) {
        const std::size_t label_p = static_cast<std::size_t>(y[order[p]]);
        left_counts[label_p]++;
        right_counts[label_p]--;
        const double v = x(order[p], feature);
        const double v_next = x(order[p + 1], feature);
        if (v == v_next) continue;  // can only cut between distinct values
        const std::size_t n_left = p + 1, n_right = n - n_left;
        if (n_left < static_cast<std::size_t>(min_leaf) ||
            n_right < static_cast<std::size_t>(min_leaf)) {
          continue;
        }
        const double score = (static_cast<double>(n_left) * gini(left_counts, n_left) +
                              static_cast<double>(n_right) * gini(right_counts, n_right)) /
                             static_cast<double>(n);
        if (score < best_score) {
          best_score = score;
          best_feature = static_cast<int>(feature);
          best_threshold = 0.5 * (v + v_next);
        }
      }
    }
    if (best_feature < 0) return node_id;  // no strict improvement, stay a leaf

    const auto mid = std::stable_partition(
        idx.begin() + static_cast<std::ptrdiff_t>(begin),
        idx.begin() + static_cast<std::ptrdiff_t>(end),
        [&](std::size_t i) { return x(i, static_cast<std::size_t>(best_feature)) <= best_threshold; });
    const std::size_t split = static_cast<std::size_t>(mid - idx.begin());

    nodes[static_cast<std::size_t>(node_id)].feature = best_feature;
    nodes[static_cast<std::size_t>(node_id)].threshold = best_threshold;
    const int left = build(idx, begin, split, depth + 1);
    nodes[static_cast<std::size_t>(node_id)].left = left;
    const int right = build(idx, split, end, depth + 1);
    nodes[static_cast<std::size_t>(node_id)].right = right;
    return node_id;
  }
};

}  // namespace

DecisionTree DecisionTree::fit(const Matrix& x, const std::vector<int>& y, int n_labels,
                               int max_depth, int min_leaf) {
  if (x.rows == 0) throw ConfigError("DecisionTree: empty training set");
  if (x.rows != y.size()) throw ConfigError("DecisionTree: feature/label count mismatch");
  if (n_labels < 1) throw ConfigError("DecisionTree: need at least one label");
  if (max_depth < 0 || min_leaf < 1) throw ConfigError("DecisionTree: invalid depth/leaf bounds");
  for (int label : y) {
    if (label < 0 || label >= n_labels) throw ConfigError("DecisionTree: label out of range");
  }

  Builder builder{x, y, n_labels, max_depth, min_leaf, {}};
  std::vector<std::size_t> idx(x.rows);
  std::iota(idx.begin(), idx.end(), 0);
  builder.build(idx, 0, x.rows, 0);

  DecisionTree tree;
  tree.nodes_ = std::move(builder.nodes);
  tree.n_features_ = static_cast<int>(x.cols);
  return tree;
}

DecisionTree DecisionTree::from_nodes(std::vector<TreeNode> nodes, int n_features) {
  if (nodes.empty()) throw ConfigError("DecisionTree: node list is empty");
  DecisionTree tree;
  tree.nodes_ = std::move(nodes);
  tree.n_features_ = n_features;
  return tree;
}

int DecisionTree::predict(std::span<const double> features) const {
  if (nodes_.empty()) throw ConfigError("DecisionTree: predict on an untrained tree");
  if (static_cast<int>(features.size()) != n_features_) {
    throw ConfigError("DecisionTree: feature count mismatch");
  }
  std::size_t at = 0;
  while (nodes_[at].feature >= 0) {
    const TreeNode& node = nodes_[at];
    at = static_cast<std::size_t>(features[static_cast<std::size_t>(node.feature)] <= node.threshold
                                      ? node.left
                                      : node.right);
  }
  return nodes_[at].label;
}

}  // namespace gas
