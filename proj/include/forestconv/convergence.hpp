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

// Bootstrap estimates of how far a size-t ensemble is from its infinite
// limit. Trees (or their importance vectors) are resampled with replacement;
// a resample is represented by its count vector w over tree indices, so the
// resampled average is sum_i w_i * T_i / t and is never materialized.
//
// Cost per replicate is O(t * m) for the hold-out and OOB statistics and
// O(t * p) for importance. Keeping B = O(p * depth) for the MSE variants, or
// B = O(n * depth) for importance, keeps the bootstrap no more expensive than
// growing the trees.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "forestconv/forest.hpp"

namespace forestconv {

enum class EstimateMode { holdout, oob, vi };

std::string to_string(EstimateMode mode);
EstimateMode parse_estimate_mode(const std::string& name);

struct BootstrapConfig {
  std::size_t B = 50;
  double alpha = 0.1;
  std::uint64_t seed = 0;
  int threads = 1;

  void validate() const;
};

struct ConvergenceEstimate {
  std::size_t t0 = 0;
  double alpha = 0.1;
  double q_hat = 0.0;
  EstimateMode mode = EstimateMode::holdout;
  /// t0 for hold-out and importance; (1 - 1/n)^n * t0 for OOB.
  double effective_t0 = 0.0;
  std::vector<double> replicates;

  /// Smallest ensemble size the extrapolation rule applies to.
  double domain_start() const {
    return mode == EstimateMode::oob ? effective_t0 : static_cast<double>(t0);
  }

  bool operator==(const ConvergenceEstimate&) const = default;
};

/// The ceil(B * level)-th smallest value (1-based). B * level within a
/// relative 1e-9 of an integer counts as that integer.
double empirical_quantile(std::span<const double> values, double level);

/// Multinomial resample counts over t trees for replicate b.
std::vector<std::uint32_t> resample_counts(std::size_t t, std::uint64_t seed,
                                           EstimateMode mode, std::size_t b);

/// Hold-out MSE of the count-weighted average sum_i w_i T_i / sum_i w_i.
double holdout_mse(const PredictionMatrix& pred,
                   std::span<const std::uint32_t> counts);

/// OOB MSE: point j averages only the trees flagged in column j of the mask,
/// weighted by their counts; a point with no weight contributes zero.
double oob_mse(const PredictionMatrix& pred, const Matrix<std::uint8_t>& mask,
               std::span<const std::uint32_t> counts);

/// Hold-out bootstrap: z_b = MSE(resampled) - MSE(original).
ConvergenceEstimate bootstrap_mse_quantile(const PredictionMatrix& pred,
                                           const BootstrapConfig& cfg);

/// OOB bootstrap over the n training points; effective_t0 = (1-1/n)^n * t.
ConvergenceEstimate bootstrap_mse_quantile_oob(
    const PredictionMatrix& pred_on_train, const Matrix<std::uint8_t>& oob_mask,
    const BootstrapConfig& cfg, std::size_t n);

/// Importance bootstrap: eps_b = max_l |resampled mean(l) - mean(l)|.
ConvergenceEstimate bootstrap_vi_quantile(const ViMatrix& vi,
                                          const BootstrapConfig& cfg);

/// sqrt(effective_t0) * q_hat / sqrt(t); t must be >= domain_start().
double extrapolate(const ConvergenceEstimate& est, std::size_t t);

/// sqrt(t0) * q_hat / sqrt(t) regardless of mode, i.e. without the OOB
/// effective-size correction.
double extrapolate_uncorrected(const ConvergenceEstimate& est, std::size_t t);

/// Smallest t in the extrapolation domain with extrapolate(est, t) <= epsilon.
std::size_t recommend_size(const ConvergenceEstimate& est, double epsilon);

}  // namespace forestconv
