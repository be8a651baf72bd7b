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

// Monte Carlo ground truth for convergence quantiles. The ensemble is
// retrained R times on one fixed training set; the infinite-ensemble limit
// is approximated by the cross-run mean at t_max, and the true quantile
// curve is the empirical quantile over runs of each run's gap.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "forestconv/convergence.hpp"
#include "forestconv/forest.hpp"

namespace forestconv {

enum class Generator { friedman1, linear, constant };

std::string to_string(Generator g);
Generator parse_generator(const std::string& name);

struct SyntheticSpec {
  Generator generator = Generator::friedman1;
  std::size_t n = 300;
  std::size_t p = 10;
  double noise_sd = 1.0;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Features uniform on [0,1]^p plus Gaussian noise with sd noise_sd.
///   friedman1: 10 sin(pi x1 x2) + 20 (x3 - 0.5)^2 + 10 x4 + 5 x5
///   linear:    sum of the features
///   constant:  0
Dataset generate_synthetic(const SyntheticSpec& spec);

enum class GapKind { mse_gap, vi_gap };

std::string to_string(GapKind kind);

struct QuantileCurve {
  std::vector<std::size_t> ts;
  std::vector<double> values;
  double alpha = 0.1;
  GapKind kind = GapKind::mse_gap;

  bool operator==(const QuantileCurve&) const = default;
};

struct OracleConfig {
  TreeParams params;
  std::size_t runs = 100;
  std::vector<std::size_t> t_grid;  // empty = geometric_grid(25, t_max)
  std::size_t t_max = 400;
  double alpha = 0.1;
  std::uint64_t seed = 0;
  bool keep_paths = false;
  int threads = 1;
};

struct OracleReport {
  std::size_t runs = 0;
  std::size_t t_max = 0;
  std::uint64_t seed = 0;
  TreeParams params;
  double mse_inf_hat = 0.0;         // mse_gap reports only
  std::vector<double> vi_inf_hat;   // vi_gap reports only
  QuantileCurve curve;
  Matrix<double> per_run_paths;     // runs x |ts| gaps, when kept
  std::string input_hash;           // content hash of the data it used

  bool operator==(const OracleReport&) const = default;
};

/// Seed of run r in oracle and run studies with master seed `seed`.
std::uint64_t oracle_run_seed(std::uint64_t seed, std::size_t r);

/// {start, 2 start, 4 start, ...} capped at t_max, with t_max appended.
std::vector<std::size_t> geometric_grid(std::size_t start, std::size_t t_max);

/// MSE of the prefix average of the first t trees, for each t in `ts`
/// (ascending), in one pass over the matrix.
std::vector<double> mse_path(const PredictionMatrix& pred,
                             std::span<const std::size_t> ts);

/// Prefix row means of an importance matrix; row k averages the first ts[k]
/// trees.
Matrix<double> vi_mean_path(const ViMatrix& vi, std::span<const std::size_t> ts);

/// Column-wise empirical (1 - alpha)-quantile of a runs x |ts| gap table.
QuantileCurve curve_from_gaps(const Matrix<double>& gaps,
                              std::vector<std::size_t> ts, double alpha,
                              GapKind kind);

OracleReport true_quantile_curve(const Dataset& train, const Dataset& eval,
                                 const OracleConfig& cfg);

OracleReport true_vi_quantile_curve(const Dataset& train, ViRule rule,
                                    const OracleConfig& cfg);

/// One independent ensemble per run: its evaluation-set MSE and its
/// bootstrap estimate at the same size.
struct RunEstimate {
  ConvergenceEstimate estimate;
  double mse = 0.0;
};

struct RunStudyConfig {
  TreeParams params;
  std::size_t runs = 100;
  std::size_t t = 200;
  EstimateMode mode = EstimateMode::oob;
  BootstrapConfig bootstrap;           // seed and threads are overridden per run
  const Dataset* holdout = nullptr;    // required for EstimateMode::holdout
  std::uint64_t seed = 0;
  int threads = 1;
};

std::vector<RunEstimate> estimate_runs(const Dataset& train,
                                       const Dataset& eval,
                                       const RunStudyConfig& cfg);

struct CoverageReport {
  double coverage = 0.0;
  std::size_t runs = 0;
  std::size_t t_check = 0;
  double alpha = 0.1;
  EstimateMode mode = EstimateMode::oob;
  double mse_inf_hat = 0.0;
  std::vector<double> gaps;
  std::vector<double> q_hats;
};

/// Fraction of runs whose true gap MSE_t - mse_inf_hat is <= their own
/// bootstrap q_hat. `oracle` must come from true_quantile_curve on the same
/// train/eval data.
CoverageReport coverage_check(const Dataset& train, const Dataset& eval,
                              const OracleReport& oracle,
                              const RunStudyConfig& cfg);

}  // namespace forestconv
