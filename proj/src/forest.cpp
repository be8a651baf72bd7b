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

#include "forestconv/forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "forestconv/random.hpp"

namespace forestconv {

namespace {
constexpr std::uint64_t kBagStream = 1;
constexpr std::uint64_t kTreeStream = 2;
}  // namespace

Ensemble train_ensemble(const Dataset& data, std::size_t t,
                        const TreeParams& params, std::uint64_t master_seed,
                        int threads) {
  if (t < 1) throw Error("ensemble size must be at least 1");
  data.validate();
  params.validate(data.p());

  const std::size_t n = data.n();
  Ensemble ensemble;
  ensemble.trees.resize(t);
  ensemble.bag_counts = Matrix<std::uint32_t>(t, n, 0);
  ensemble.master_seed = master_seed;
  ensemble.params = params;

  parallel_for(t, threads, [&](std::size_t i) {
    const std::uint64_t stream = derive_seed(master_seed, i);
    Engine rng = make_engine(derive_seed(stream, kBagStream));
    auto bag = ensemble.bag_counts.row(i);
    for (std::size_t draw = 0; draw < n; ++draw) ++bag[uniform_index(rng, n)];
    ensemble.trees[i] =
        fit_tree(data, bag, params, derive_seed(stream, kTreeStream));
  });
  return ensemble;
}

std::vector<double> PredictionMatrix::column_means(std::size_t prefix) const {
  if (prefix < 1 || prefix > trees()) throw Error("prefix outside [1, t]");
  std::vector<double> means(points(), 0.0);
  for (std::size_t i = 0; i < prefix; ++i) {
    const auto row = values.row(i);
    for (std::size_t j = 0; j < points(); ++j) means[j] += row[j];
  }
  for (double& m : means) m /= static_cast<double>(prefix);
  return means;
}

PredictionMatrix predict_matrix(const Ensemble& ensemble,
                                const Matrix<double>& points,
                                std::span<const double> labels, int threads) {
  if (labels.size() != points.rows()) {
    throw Error("evaluation label count does not match point count");
  }
  if (points.rows() > 0 && ensemble.size() > 0) {
    for (const auto& tree : ensemble.trees) {
      for (const auto& node : tree.nodes()) {
        if (!node.is_leaf() &&
            static_cast<std::size_t>(node.split_var) >= points.cols()) {
          throw Error("evaluation points have fewer columns than the ensemble uses");
        }
      }
    }
  }
  PredictionMatrix pred;
  pred.values = Matrix<double>(ensemble.size(), points.rows());
  pred.labels.assign(labels.begin(), labels.end());
  parallel_for(ensemble.size(), threads, [&](std::size_t i) {
    const RegressionTree& tree = ensemble.trees[i];
    auto out = pred.values.row(i);
    for (std::size_t j = 0; j < points.rows(); ++j) {
      out[j] = tree.predict(points.row(j));
    }
  });
  return pred;
}

OobStructure oob_structure(const Ensemble& ensemble) {
  const std::size_t t = ensemble.size();
  const std::size_t n = ensemble.num_train();
  OobStructure oob;
  oob.mask = Matrix<std::uint8_t>(t, n, 0);
  oob.trees_for_point.resize(n);
  for (std::size_t i = 0; i < t; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (ensemble.bag_counts(i, j) == 0) {
        oob.mask(i, j) = 1;
        oob.trees_for_point[j].push_back(i);
      }
    }
  }
  return oob;
}

double expected_oob_fraction(std::size_t n) {
  if (n == 0) throw Error("training set size must be positive");
  const double nd = static_cast<double>(n);
  return std::pow(1.0 - 1.0 / nd, nd);
}

std::string to_string(ViRule rule) {
  return rule == ViRule::impurity ? "impurity" : "permutation";
}

ViRule parse_vi_rule(const std::string& name) {
  if (name == "impurity") return ViRule::impurity;
  if (name == "permutation") return ViRule::permutation;
  throw Error("unknown variable-importance rule '" + name +
              "' (expected impurity or permutation)");
}

ViMatrix impurity_vi_matrix(const Ensemble& ensemble, const Dataset& data,
                            int threads) {
  if (ensemble.num_train() != data.n()) {
    throw Error("ensemble was not trained on a dataset of this size");
  }
  ViMatrix vi;
  vi.rule = ViRule::impurity;
  vi.values = Matrix<double>(ensemble.size(), data.p());
  parallel_for(ensemble.size(), threads, [&](std::size_t i) {
    const auto row = impurity_importance(ensemble.trees[i], data,
                                         ensemble.bag_counts.row(i));
    std::copy(row.begin(), row.end(), vi.values.row(i).begin());
  });
  return vi;
}

std::vector<double> tree_permutation_importance(
    const RegressionTree& tree, const Dataset& data,
    std::span<const std::size_t> oob_rows, std::uint64_t seed,
    std::size_t tree_index) {
  const std::size_t p = data.p();
  std::vector<double> importance(p, 0.0);
  const std::size_t m = oob_rows.size();
  if (m == 0) return importance;

  double baseline = 0.0;
  for (std::size_t j : oob_rows) {
    const double r = data.labels[j] - tree.predict(data.row(j));
    baseline += r * r;
  }
  baseline /= static_cast<double>(m);

  std::vector<std::size_t> donor(m);
  std::vector<double> x(p);
  for (std::size_t l = 0; l < p; ++l) {
    std::iota(donor.begin(), donor.end(), std::size_t{0});
    Engine rng = make_engine(derive_seed(seed, tree_index, l));
    for (std::size_t k = m; k > 1; --k) {
      std::swap(donor[k - 1], donor[uniform_index(rng, k)]);
    }
    double permuted = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
      const auto src = data.row(oob_rows[k]);
      std::copy(src.begin(), src.end(), x.begin());
      x[l] = data.features(oob_rows[donor[k]], l);
      const double r = data.labels[oob_rows[k]] - tree.predict(x);
      permuted += r * r;
    }
    importance[l] = permuted / static_cast<double>(m) - baseline;
  }
  return importance;
}

ViMatrix permutation_importance(const Ensemble& ensemble, const Dataset& data,
                                std::uint64_t seed, int threads) {
  if (ensemble.num_train() != data.n()) {
    throw Error("ensemble was not trained on a dataset of this size");
  }
  const OobStructure oob = oob_structure(ensemble);
  ViMatrix vi;
  vi.rule = ViRule::permutation;
  vi.values = Matrix<double>(ensemble.size(), data.p());
  parallel_for(ensemble.size(), threads, [&](std::size_t i) {
    std::vector<std::size_t> rows;
    for (std::size_t j = 0; j < data.n(); ++j) {
      if (oob.mask(i, j)) rows.push_back(j);
    }
    const auto row =
        tree_permutation_importance(ensemble.trees[i], data, rows, seed, i);
    std::copy(row.begin(), row.end(), vi.values.row(i).begin());
  });
  for (std::size_t i = 0; i < ensemble.size(); ++i) {
    const auto mask = oob.mask.row(i);
    if (std::none_of(mask.begin(), mask.end(), [](std::uint8_t b) { return b; })) {
      vi.empty_oob_trees.push_back(i);
    }
  }
  return vi;
}

}  // namespace forestconv
