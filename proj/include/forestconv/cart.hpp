/*
 * Copyright 2026 The forestconv Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "forestconv/data.hpp"

namespace forestconv {

struct TreeParams {
  std::size_t mtry = 1;       // candidate columns per split
  std::size_t min_leaf = 5;   // minimum bag weight per child
  std::optional<std::size_t> max_depth;  // nullopt = unbounded

  /// ceil(p/3) candidates, min_leaf 5, unbounded depth.
  static TreeParams defaults_for(std::size_t p);

  void validate(std::size_t p) const;

  bool operator==(const TreeParams&) const = default;
};

/// A leaf has split_var == -1. `weight` is the bag weight that reached the
/// node during fitting; `value` is the weighted label mean there.
struct TreeNode {
  std::int32_t split_var = -1;
  double threshold = 0.0;
  std::int32_t left = -1;
  std::int32_t right = -1;
  double value = 0.0;
  std::uint32_t weight = 0;

  bool is_leaf() const { return split_var < 0; }
  bool operator==(const TreeNode&) const = default;
};

/// Immutable binary regression tree rooted at node 0.
class RegressionTree {
 public:
  RegressionTree() : nodes_(1) {}
  /// Validates that the nodes form a proper binary tree rooted at 0.
  explicit RegressionTree(std::vector<TreeNode> nodes);

  /// Routes left when x[split_var] <= threshold.
  double predict(std::span<const double> x) const {
    std::size_t k = 0;
    while (!nodes_[k].is_leaf()) {
      const TreeNode& node = nodes_[k];
      k = static_cast<std::size_t>(
          x[static_cast<std::size_t>(node.split_var)] <= node.threshold
              ? node.left
              : node.right);
    }
    return nodes_[k].value;
  }

  const std::vector<TreeNode>& nodes() const { return nodes_; }
  std::size_t num_leaves() const;
  std::size_t depth() const;

  bool operator==(const RegressionTree&) const = default;

 private:
  std::vector<TreeNode> nodes_;
};

inline double predict_tree(const RegressionTree& tree,
                           std::span<const double> x) {
  return tree.predict(x);
}

/// Greedy CART growth on the rows with positive weight. Each node draws
/// `mtry` distinct columns from its own stream keyed by (seed, node index)
/// and takes the SSE-minimizing (column, midpoint threshold); exact ties go
/// to the smaller column, then the smaller threshold.
RegressionTree fit_tree(const Dataset& data,
                        std::span<const std::uint32_t> row_weights,
                        const TreeParams& params, std::uint64_t seed);

/// Per-column sum of weighted SSE decreases over the tree's splits,
/// recomputed by routing the fitting rows with their weights.
std::vector<double> impurity_importance(
    const RegressionTree& tree, const Dataset& data,
    std::span<const std::uint32_t> row_weights);

}  // namespace forestconv
