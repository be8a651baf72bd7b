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

#include "forestconv/cart.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "forestconv/random.hpp"

namespace forestconv {

TreeParams TreeParams::defaults_for(std::size_t p) {
  TreeParams params;
  params.mtry = std::max<std::size_t>(1, (p + 2) / 3);
  return params;
}

void TreeParams::validate(std::size_t p) const {
  if (mtry < 1 || mtry > p) {
    throw Error("mtry must lie in [1, " + std::to_string(p) + "], got " +
                std::to_string(mtry));
  }
  if (min_leaf < 1) throw Error("min_leaf must be at least 1");
  if (max_depth && *max_depth < 1) throw Error("max_depth must be at least 1");
}

RegressionTree::RegressionTree(std::vector<TreeNode> nodes)
    : nodes_(std::move(nodes)) {
  if (nodes_.empty()) throw Error("tree has no nodes");
  const auto count = static_cast<std::int64_t>(nodes_.size());
  std::vector<int> seen(nodes_.size(), 0);
  std::vector<std::int32_t> stack{0};
  while (!stack.empty()) {
    const std::int32_t k = stack.back();
    stack.pop_back();
    if (seen[static_cast<std::size_t>(k)]++) {
      throw Error("tree node " + std::to_string(k) + " is reachable twice");
    }
    const TreeNode& node = nodes_[static_cast<std::size_t>(k)];
    if (node.is_leaf()) continue;
    if (node.left < 0 || node.left >= count || node.right < 0 ||
        node.right >= count || node.left == node.right) {
      throw Error("tree node " + std::to_string(k) + " has invalid children");
    }
    if (!std::isfinite(node.threshold)) {
      throw Error("tree node " + std::to_string(k) + " has a non-finite threshold");
    }
    stack.push_back(node.right);
    stack.push_back(node.left);
  }
  for (std::size_t k = 0; k < nodes_.size(); ++k) {
    if (!seen[k]) throw Error("tree node " + std::to_string(k) + " is unreachable");
  }
}

std::size_t RegressionTree::num_leaves() const {
  return static_cast<std::size_t>(std::count_if(
      nodes_.begin(), nodes_.end(), [](const TreeNode& n) { return n.is_leaf(); }));
}

std::size_t RegressionTree::depth() const {
  std::size_t deepest = 0;
  std::vector<std::pair<std::int32_t, std::size_t>> stack{{0, 0}};
  while (!stack.empty()) {
    const auto [k, d] = stack.back();
    stack.pop_back();
    deepest = std::max(deepest, d);
    const TreeNode& node = nodes_[static_cast<std::size_t>(k)];
    if (!node.is_leaf()) {
      stack.emplace_back(node.left, d + 1);
      stack.emplace_back(node.right, d + 1);
    }
  }
  return deepest;
}

namespace {

struct Split {
  std::size_t column = 0;
  double threshold = 0.0;
  double gain = 0.0;
  bool found = false;
};

struct PendingNode {
  std::size_t node;
  std::size_t begin;
  std::size_t end;
  std::size_t depth;
};

class TreeGrower {
 public:
  TreeGrower(const Dataset& data, std::span<const std::uint32_t> weights,
             const TreeParams& params, std::uint64_t seed)
      : data_(data), weights_(weights), params_(params), seed_(seed) {
    for (std::size_t j = 0; j < data.n(); ++j) {
      if (weights[j] > 0) rows_.push_back(j);
    }
    columns_.resize(data.p());
  }

  RegressionTree grow() {
    nodes_.emplace_back();
    std::vector<PendingNode> stack{{0, 0, rows_.size(), 0}};
    while (!stack.empty()) {
      const PendingNode job = stack.back();
      stack.pop_back();
      grow_node(job, stack);
    }
    return RegressionTree(std::move(nodes_));
  }

 private:
  void grow_node(const PendingNode& job, std::vector<PendingNode>& stack) {
    double weight = 0.0;
    double weighted_sum = 0.0;
    double lo = data_.labels[rows_[job.begin]];
    double hi = lo;
    for (std::size_t k = job.begin; k < job.end; ++k) {
      const std::size_t j = rows_[k];
      const double y = data_.labels[j];
      weight += weights_[j];
      weighted_sum += weights_[j] * y;
      lo = std::min(lo, y);
      hi = std::max(hi, y);
    }
    const double mean = std::clamp(weighted_sum / weight, lo, hi);
    TreeNode& node = nodes_[job.node];
    node.value = mean;
    node.weight = static_cast<std::uint32_t>(weight);

    const bool too_small =
        weight < 2.0 * static_cast<double>(params_.min_leaf);
    const bool too_deep = params_.max_depth && job.depth >= *params_.max_depth;
    if (too_small || too_deep || lo == hi) return;

    const Split split = find_split(job, mean);
    if (!split.found) return;

    const auto middle = std::stable_partition(
        rows_.begin() + static_cast<std::ptrdiff_t>(job.begin),
        rows_.begin() + static_cast<std::ptrdiff_t>(job.end),
        [&](std::size_t j) {
          return data_.features(j, split.column) <= split.threshold;
        });
    const auto mid = static_cast<std::size_t>(middle - rows_.begin());

    const auto left = static_cast<std::int32_t>(nodes_.size());
    nodes_.emplace_back();
    nodes_.emplace_back();
    TreeNode& parent = nodes_[job.node];
    parent.split_var = static_cast<std::int32_t>(split.column);
    parent.threshold = split.threshold;
    parent.left = left;
    parent.right = left + 1;

    stack.push_back({static_cast<std::size_t>(left) + 1, mid, job.end, job.depth + 1});
    stack.push_back({static_cast<std::size_t>(left), job.begin, mid, job.depth + 1});
  }

  Split find_split(const PendingNode& job, double mean) {
    const std::size_t p = data_.p();
    Engine rng = make_engine(derive_seed(seed_, job.node));
    std::iota(columns_.begin(), columns_.end(), std::size_t{0});
    for (std::size_t k = 0; k < params_.mtry; ++k) {
      std::swap(columns_[k], columns_[k + uniform_index(rng, p - k)]);
    }
    std::vector<std::size_t> candidates(columns_.begin(),
                                        columns_.begin() + static_cast<std::ptrdiff_t>(params_.mtry));
    std::sort(candidates.begin(), candidates.end());

    // Labels are centered at the node mean; the gain of a split is then
    // S_L^2/W_L + S_R^2/W_R - S^2/W with S the centered sums.
    double total_w = 0.0;
    double total_s = 0.0;
    double parent_sse = 0.0;
    for (std::size_t k = job.begin; k < job.end; ++k) {
      const std::size_t j = rows_[k];
      const double r = data_.labels[j] - mean;
      total_w += weights_[j];
      total_s += weights_[j] * r;
      parent_sse += weights_[j] * r * r;
    }
    const double min_leaf = static_cast<double>(params_.min_leaf);

    Split best;
    for (std::size_t column : candidates) {
      sorted_.clear();
      for (std::size_t k = job.begin; k < job.end; ++k) {
        sorted_.emplace_back(data_.features(rows_[k], column), rows_[k]);
      }
      std::sort(sorted_.begin(), sorted_.end());

      double w_left = 0.0;
      double s_left = 0.0;
      for (std::size_t k = 0; k + 1 < sorted_.size(); ++k) {
        const auto [x, j] = sorted_[k];
        w_left += weights_[j];
        s_left += weights_[j] * (data_.labels[j] - mean);
        const double x_next = sorted_[k + 1].first;
        if (x == x_next) continue;
        const double w_right = total_w - w_left;
        if (w_left < min_leaf || w_right < min_leaf) continue;
        const double s_right = total_s - s_left;
        const double gain = s_left * s_left / w_left +
                            s_right * s_right / w_right -
                            total_s * total_s / total_w;
        if (!best.found || gain > best.gain) {
          double threshold = 0.5 * (x + x_next);
          if (!(threshold < x_next)) threshold = x;
          best = {column, threshold, gain, true};
        }
      }
    }
    if (best.found && !(best.gain > 1e-12 * parent_sse)) best.found = false;
    return best;
  }

  const Dataset& data_;
  std::span<const std::uint32_t> weights_;
  const TreeParams& params_;
  std::uint64_t seed_;
  std::vector<std::size_t> rows_;
  std::vector<std::size_t> columns_;
  std::vector<std::pair<double, std::size_t>> sorted_;
  std::vector<TreeNode> nodes_;
};

double weighted_sse(const Dataset& data, std::span<const std::uint32_t> w,
                    const std::vector<std::size_t>& rows) {
  double weight = 0.0;
  double sum = 0.0;
  for (std::size_t j : rows) {
    weight += w[j];
    sum += w[j] * data.labels[j];
  }
  if (weight == 0.0) return 0.0;
  const double mean = sum / weight;
  double sse = 0.0;
  for (std::size_t j : rows) {
    const double r = data.labels[j] - mean;
    sse += w[j] * r * r;
  }
  return sse;
}

}  // namespace

RegressionTree fit_tree(const Dataset& data,
                        std::span<const std::uint32_t> row_weights,
                        const TreeParams& params, std::uint64_t seed) {
  params.validate(data.p());
  if (row_weights.size() != data.n()) {
    throw Error("row weight count does not match the dataset");
  }
  if (std::all_of(row_weights.begin(), row_weights.end(),
                  [](std::uint32_t w) { return w == 0; })) {
    throw Error("all row weights are zero");
  }
  return TreeGrower(data, row_weights, params, seed).grow();
}

std::vector<double> impurity_importance(
    const RegressionTree& tree, const Dataset& data,
    std::span<const std::uint32_t> row_weights) {
  if (row_weights.size() != data.n()) {
    throw Error("row weight count does not match the dataset");
  }
  const auto& nodes = tree.nodes();
  for (const TreeNode& node : nodes) {
    if (!node.is_leaf() && static_cast<std::size_t>(node.split_var) >= data.p()) {
      throw Error("tree splits on a column the dataset does not have");
    }
  }

  std::vector<std::vector<std::size_t>> reach(nodes.size());
  for (std::size_t j = 0; j < data.n(); ++j) {
    if (row_weights[j] == 0) continue;
    std::size_t k = 0;
    reach[0].push_back(j);
    while (!nodes[k].is_leaf()) {
      const TreeNode& node = nodes[k];
      k = static_cast<std::size_t>(
          data.features(j, static_cast<std::size_t>(node.split_var)) <= node.threshold
              ? node.left
              : node.right);
      reach[k].push_back(j);
    }
  }

  std::vector<double> importance(data.p(), 0.0);
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    const TreeNode& node = nodes[k];
    if (node.is_leaf()) continue;
    const double decrease =
        weighted_sse(data, row_weights, reach[k]) -
        weighted_sse(data, row_weights, reach[static_cast<std::size_t>(node.left)]) -
        weighted_sse(data, row_weights, reach[static_cast<std::size_t>(node.right)]);
    importance[static_cast<std::size_t>(node.split_var)] += std::max(0.0, decrease);
  }
  return importance;
}

}  // namespace forestconv
