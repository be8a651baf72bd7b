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

#include "forestconv/common.hpp"

namespace forestconv {

/// Labeled regression data: n rows of p finite covariates plus a response.
struct Dataset {
  Matrix<double> features;
  std::vector<double> labels;
  std::vector<std::string> column_names;  // empty or length p
  std::string label_name;

  std::size_t n() const { return features.rows(); }
  std::size_t p() const { return features.cols(); }
  std::span<const double> row(std::size_t j) const { return features.row(j); }

  /// Throws if the shape or finiteness invariants are broken.
  void validate() const;

  /// Rows in the given order.
  Dataset subset(std::span<const std::size_t> rows) const;
};

Dataset make_dataset(Matrix<double> features, std::vector<double> labels,
                     std::vector<std::string> column_names = {},
                     std::string label_name = "y");

/// Reads a comma-separated file. `label_column` is a header name, or a
/// 1-based column index when no header column carries that name.
Dataset load_csv(const std::string& path, const std::string& label_column,
                 bool header = true);

/// Writes features followed by the label as the last column, with a header.
void write_csv(const Dataset& data, const std::string& path);

/// Disjoint train / hold-out / test index sets over rows 0..N-1. Each set
/// is sorted ascending.
struct Partition {
  std::uint64_t seed = 0;
  std::vector<std::size_t> train;
  std::vector<std::size_t> holdout;
  std::vector<std::size_t> test;

  bool operator==(const Partition&) const = default;
};

/// Shuffles 0..N-1 with a seeded Fisher-Yates pass. The first
/// floor(N * train_frac) indices form the training set; the hold-out takes
/// round(ratio * |train| / (1 - ratio)) of the rest, and the remainder is
/// the test set.
Partition split_dataset(std::size_t total, double train_frac,
                        double holdout_ratio, std::uint64_t seed);

inline Partition split_dataset(const Dataset& full, double train_frac,
                               double holdout_ratio, std::uint64_t seed) {
  return split_dataset(full.n(), train_frac, holdout_ratio, seed);
}

}  // namespace forestconv
