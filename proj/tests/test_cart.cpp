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

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "doctest.h"
#include "forestconv/cart.hpp"
#include "test_util.hpp"

using namespace forestconv;

namespace {

TreeParams params(std::size_t mtry, std::size_t min_leaf) {
  TreeParams p;
  p.mtry = mtry;
  p.min_leaf = min_leaf;
  return p;
}

std::vector<std::uint32_t> ones(std::size_t n) { return std::vector<std::uint32_t>(n, 1); }

double sse_of(const Dataset& d, const std::vector<std::uint32_t>& w,
              const std::vector<std::size_t>& rows) {
  double W = 0, S = 0;
  for (auto j : rows) { W += w[j]; S += w[j] * d.labels[j]; }
  if (W == 0) return 0;
  double out = 0;
  for (auto j : rows) out += w[j] * (d.labels[j] - S / W) * (d.labels[j] - S / W);
  return out;
}

// Exhaustive root split search: every column, every midpoint between
// distinct values, children weighted SSE recomputed from scratch.
struct BruteSplit {
  double children_sse = std::numeric_limits<double>::infinity();
  std::size_t column = 0;
  double threshold = 0;
};

BruteSplit brute_force_root(const Dataset& d, const std::vector<std::uint32_t>& w,
                            std::size_t min_leaf) {
  BruteSplit best;
  for (std::size_t c = 0; c < d.p(); ++c) {
    std::vector<double> xs;
    for (std::size_t j = 0; j < d.n(); ++j) if (w[j]) xs.push_back(d.features(j, c));
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    for (std::size_t k = 0; k + 1 < xs.size(); ++k) {
      const double thr = 0.5 * (xs[k] + xs[k + 1]);
      std::vector<std::size_t> left, right;
      double wl = 0, wr = 0;
      for (std::size_t j = 0; j < d.n(); ++j) {
        if (!w[j]) continue;
        if (d.features(j, c) <= thr) { left.push_back(j); wl += w[j]; }
        else { right.push_back(j); wr += w[j]; }
      }
      if (wl < min_leaf || wr < min_leaf) continue;
      const double s = sse_of(d, w, left) + sse_of(d, w, right);
      if (s < best.children_sse - 1e-9 * std::max(1.0, s)) best = {s, c, thr};
    }
  }
  return best;
}

}  // namespace

TEST_CASE("constant labels give a single leaf") {
  const Dataset d = testutil::dataset_1d({1, 2, 3}, {5, 5, 5});
  const RegressionTree tree = fit_tree(d, ones(3), params(1, 1), 0);
  CHECK(tree.nodes().size() == 1);
  CHECK(tree.nodes()[0].value == 5);
  CHECK(predict_tree(tree, std::vector<double>{123.0}) == 5);
}

TEST_CASE("1-D stump matches the brute-force threshold") {
  const Dataset d = testutil::dataset_1d({1, 2, 3, 4}, {0, 0, 10, 10});
  const auto w = ones(4);
  const BruteSplit oracle = brute_force_root(d, w, 1);
  REQUIRE(oracle.threshold == 2.5);
  REQUIRE(oracle.children_sse == 0.0);

  const RegressionTree tree = fit_tree(d, w, params(1, 1), 7);
  REQUIRE(tree.nodes().size() == 3);
  const TreeNode& root = tree.nodes()[0];
  CHECK(root.split_var == 0);
  CHECK(root.threshold == 2.5);
  CHECK(tree.nodes()[root.left].value == 0);
  CHECK(tree.nodes()[root.right].value == 10);

  CHECK(tree.predict(std::vector<double>{2}) == 0);
  CHECK(tree.predict(std::vector<double>{3}) == 10);
  CHECK(tree.predict(std::vector<double>{2.5}) == 0);  // ties route left

  const auto imp = impurity_importance(tree, d, w);
  REQUIRE(imp.size() == 1);
  CHECK(imp[0] == doctest::Approx(100.0));  // parent SSE 4*25, children 0
}

TEST_CASE("min_leaf = n gives the mean leaf") {
  const Dataset d = testutil::dataset_1d({1, 2, 3, 4}, {0, 1, 2, 9});
  const RegressionTree tree = fit_tree(d, ones(4), params(1, 4), 0);
  CHECK(tree.nodes().size() == 1);
  CHECK(tree.nodes()[0].value == doctest::Approx(3.0));
  CHECK(impurity_importance(tree, d, ones(4)) == std::vector<double>{0.0});
}

TEST_CASE("bag weights act as multiplicities") {
  // Row 3 counted twice shifts the leaf mean of the right child.
  const Dataset d = testutil::dataset_1d({1, 2, 3, 4}, {0, 0, 10, 20});
  const std::vector<std::uint32_t> w{1, 1, 0, 2};
  const RegressionTree tree = fit_tree(d, w, params(1, 1), 0);
  CHECK(tree.predict(std::vector<double>{4}) == 20);
  CHECK(tree.predict(std::vector<double>{1}) == 0);
  CHECK(tree.nodes()[0].weight == 4);
}

TEST_CASE("max_depth bounds the tree") {
  testutil::Rng rng(3);
  const Dataset d = testutil::random_dataset(rng, 60, 3);
  TreeParams p = params(3, 1);
  p.max_depth = 1;
  const RegressionTree tree = fit_tree(d, ones(60), p, 1);
  CHECK(tree.depth() <= 1);
  p.max_depth = 3;
  CHECK(fit_tree(d, ones(60), p, 1).depth() <= 3);
}

TEST_CASE("unused column has zero importance") {
  testutil::Rng rng(8);
  Dataset d = testutil::random_dataset(rng, 40, 3);
  for (std::size_t j = 0; j < d.n(); ++j) d.features(j, 2) = 1.0;  // cannot split
  const RegressionTree tree = fit_tree(d, ones(40), params(3, 2), 5);
  for (const auto& node : tree.nodes()) CHECK(node.split_var != 2);
  const auto imp = impurity_importance(tree, d, ones(40));
  CHECK(imp[2] == 0.0);
  CHECK(imp[0] > 0.0);
}

TEST_CASE("fit_tree errors") {
  const Dataset d = testutil::dataset_1d({1, 2}, {0, 1});
  CHECK_THROWS_AS(fit_tree(d, std::vector<std::uint32_t>{0, 0}, params(1, 1), 0), Error);
  CHECK_THROWS_AS(fit_tree(d, ones(2), params(2, 1), 0), Error);
  CHECK_THROWS_AS(fit_tree(d, ones(2), params(0, 1), 0), Error);
  CHECK_THROWS_AS(fit_tree(d, ones(2), params(1, 0), 0), Error);
  CHECK_THROWS_AS(fit_tree(d, ones(3), params(1, 1), 0), Error);
}

TEST_CASE("impurity_importance rejects a dimension mismatch") {
  const Dataset d = testutil::dataset_1d({1, 2, 3, 4}, {0, 0, 10, 10});
  const RegressionTree tree = fit_tree(d, ones(4), params(1, 1), 0);
  CHECK_THROWS_AS(impurity_importance(tree, d, ones(3)), Error);
}

TEST_CASE("RegressionTree validates node structure") {
  TreeNode leaf;
  TreeNode split;
  split.split_var = 0;
  split.left = 1;
  split.right = 2;
  CHECK_NOTHROW(RegressionTree({split, leaf, leaf}));
  TreeNode same = split;
  same.right = 1;
  CHECK_THROWS_AS(RegressionTree({same, leaf, leaf}), Error);  // children equal
  TreeNode cyc = split;
  cyc.left = 0;
  CHECK_THROWS_AS(RegressionTree({cyc, leaf, leaf}), Error);   // cycle
  CHECK_THROWS_AS(RegressionTree({split, leaf, leaf, leaf}), Error);  // unreachable
  TreeNode far = split;
  far.right = 9;
  CHECK_THROWS_AS(RegressionTree({far, leaf, leaf}), Error);
}

TEST_CASE("default params use ceil(p/3) candidates") {
  CHECK(TreeParams::defaults_for(1).mtry == 1);
  CHECK(TreeParams::defaults_for(3).mtry == 1);
  CHECK(TreeParams::defaults_for(4).mtry == 2);
  CHECK(TreeParams::defaults_for(10).mtry == 4);
  CHECK(TreeParams::defaults_for(10).min_leaf == 5);
  CHECK_FALSE(TreeParams::defaults_for(10).max_depth.has_value());
}

TEST_CASE("property: root split agrees with exhaustive search when mtry = p") {
  testutil::Rng rng(21);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t n = 4 + rng.index(30);
    const std::size_t p = 1 + rng.index(3);
    const Dataset d = testutil::random_dataset(rng, n, p, trial % 2 == 0);
    std::vector<std::uint32_t> w(n);
    for (auto& v : w) v = static_cast<std::uint32_t>(rng.index(3));
    w[0] = 1;
    const std::size_t min_leaf = 1 + rng.index(3);
    const RegressionTree tree = fit_tree(d, w, params(p, min_leaf), rng.next());
    const BruteSplit oracle = brute_force_root(d, w, min_leaf);
    const TreeNode& root = tree.nodes()[0];
    std::vector<std::size_t> rows;
    for (std::size_t j = 0; j < n; ++j) if (w[j]) rows.push_back(j);
    if (root.is_leaf()) {
      // No admissible split, a pure node, or too little weight.
      double W = 0;
      for (auto v : w) W += v;
      const bool pure = sse_of(d, w, rows) == 0.0;
      CHECK((pure || W < 2.0 * min_leaf || !std::isfinite(oracle.children_sse) ||
             oracle.children_sse >= sse_of(d, w, rows) * (1 - 1e-12)));
      continue;
    }
    REQUIRE(std::isfinite(oracle.children_sse));
    std::vector<std::size_t> left, right;
    for (auto j : rows) {
      (d.features(j, root.split_var) <= root.threshold ? left : right).push_back(j);
    }
    const double got = sse_of(d, w, left) + sse_of(d, w, right);
    CHECK(got == doctest::Approx(oracle.children_sse).epsilon(1e-9));
  }
}

TEST_CASE("property: structural invariants of fitted trees") {
  testutil::Rng rng(99);
  for (int trial = 0; trial < 80; ++trial) {
    const std::size_t n = 5 + rng.index(80);
    const std::size_t p = 1 + rng.index(5);
    const Dataset d = testutil::random_dataset(rng, n, p, trial % 3 == 0);
    std::vector<std::uint32_t> w(n);
    for (auto& v : w) v = static_cast<std::uint32_t>(rng.index(3));
    w[rng.index(n)] += 1;
    const TreeParams prm = params(1 + rng.index(p), 1 + rng.index(4));
    const std::uint64_t seed = rng.next();
    const RegressionTree tree = fit_tree(d, w, prm, seed);

    // Identical seed reproduces the tree node for node.
    CHECK(tree == fit_tree(d, w, prm, seed));

    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (std::size_t j = 0; j < n; ++j) {
      if (w[j]) { lo = std::min(lo, d.labels[j]); hi = std::max(hi, d.labels[j]); }
    }
    for (const auto& node : tree.nodes()) {
      if (node.is_leaf()) {
        CHECK(node.value >= lo);
        CHECK(node.value <= hi);
      } else {
        CHECK(tree.nodes()[node.left].weight >= prm.min_leaf);
        CHECK(tree.nodes()[node.right].weight >= prm.min_leaf);
        CHECK(tree.nodes()[node.left].weight + tree.nodes()[node.right].weight == node.weight);
      }
    }
    for (int probe = 0; probe < 20; ++probe) {
      std::vector<double> x(p);
      for (auto& v : x) v = rng.uniform(-1.0, 6.0);
      const double y = tree.predict(x);
      CHECK(y >= lo);
      CHECK(y <= hi);
    }

    // Importance telescopes: root SSE minus leaf SSE; each split decreases SSE.
    const auto imp = impurity_importance(tree, d, w);
    for (double v : imp) CHECK(v >= 0.0);
    std::vector<std::vector<std::size_t>> reach(tree.nodes().size());
    for (std::size_t j = 0; j < n; ++j) {
      if (!w[j]) continue;
      std::size_t k = 0;
      reach[0].push_back(j);
      while (!tree.nodes()[k].is_leaf()) {
        const auto& nd = tree.nodes()[k];
        k = d.features(j, nd.split_var) <= nd.threshold ? nd.left : nd.right;
        reach[k].push_back(j);
      }
    }
    double leaf_sse = 0;
    for (std::size_t k = 0; k < tree.nodes().size(); ++k) {
      const auto& nd = tree.nodes()[k];
      if (nd.is_leaf()) {
        leaf_sse += sse_of(d, w, reach[k]);
      } else {
        CHECK(sse_of(d, w, reach[nd.left]) + sse_of(d, w, reach[nd.right]) <
              sse_of(d, w, reach[k]));
      }
    }
    const double root_sse = sse_of(d, w, reach[0]);
    const double total = std::accumulate(imp.begin(), imp.end(), 0.0);
    CHECK(total == doctest::Approx(root_sse - leaf_sse).epsilon(1e-9).scale(root_sse + 1));
  }
}
