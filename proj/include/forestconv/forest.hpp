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
#include <span>
#include <string>
#include <vector>

#include "forestconv/cart.hpp"
#include "forestconv/data.hpp"

namespace forestconv {

/// A bagged ensemble. Row i of `bag_counts` holds the multiplicity of each
/// training row in tree i's bootstrap sample; every row sums to n.
struct Ensemble {
  std::vector<RegressionTree> trees;
  Matrix<std::uint32_t> bag_counts;
  std::uint64_t master_seed = 0;
  TreeParams params;

  std::size_t size() const { return trees.size(); }
  std::size_t num_train() const { return bag_counts.cols(); }

  bool operator==(const Ensemble&) const = default;
};

/// Tree i draws its bag and its split randomness from streams derived only
/// from (master_seed, i), so the result does not depend on `threads`.
Ensemble train_ensemble(const Dataset& data, std::size_t t,
                        const TreeParams& params, std::uint64_t master_seed,
                        int threads = 1);

/// Per-tree predictions: values(i, j) = T_i(point j).
struct PredictionMatrix {
  Matrix<double> values;
  std::vector<double> labels;

  std::size_t trees() const { return values.rows(); }
  std::size_t points() const { return values.cols(); }

  /// Average of the first `prefix` trees at every point.
  std::vector<double> column_means(std::size_t prefix) const;

  bool operator==(const PredictionMatrix&) const = default;
};

PredictionMatrix predict_matrix(const Ensemble& ensemble,
                                const Matrix<double>& points,
                                std::span<const double> labels,
                                int threads = 1);

inline PredictionMatrix predict_matrix(const Ensemble& ensemble,
                                       const Dataset& data, int threads = 1) {
  return predict_matrix(ensemble, data.features, data.labels, threads);
}

struct OobStructure {
  Matrix<std::uint8_t> mask;                    // t x n, 1 = out of bag
  std::vector<std::vector<std::size_t>> trees_for_point;  // sorted tree ids
};

OobStructure oob_structure(const Ensemble& ensemble);

/// (1 - 1/n)^n, the expected out-of-bag fraction of a bootstrap sample.
double expected_oob_fraction(std::size_t n);

enum class ViRule { impurity, permutation };

std::string to_string(ViRule rule);
ViRule parse_vi_rule(const std::string& name);

/// Per-tree importance vectors; row i belongs to tree i.
struct ViMatrix {
  Matrix<double> values;
  ViRule rule = ViRule::impurity;
  /// Trees whose OOB set was empty; their permutation rows are zero.
  std::vector<std::size_t> empty_oob_trees;

  std::size_t trees() const { return values.rows(); }
  std::size_t variables() const { return values.cols(); }

  bool operator==(const ViMatrix&) const = default;
};

ViMatrix impurity_vi_matrix(const Ensemble& ensemble, const Dataset& data,
                            int threads = 1);

/// OOB permutation importance. Column l of tree i is permuted among the
/// tree's OOB rows by a stream keyed on (seed, tree_index, l).
std::vector<double> tree_permutation_importance(
    const RegressionTree& tree, const Dataset& data,
    std::span<const std::size_t> oob_rows, std::uint64_t seed,
    std::size_t tree_index);

ViMatrix permutation_importance(const Ensemble& ensemble, const Dataset& data,
                                std::uint64_t seed, int threads = 1);

}  // namespace forestconv
