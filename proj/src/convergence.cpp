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

#include "forestconv/convergence.hpp"

#include <algorithm>
#include <cmath>

#include "forestconv/random.hpp"

namespace forestconv {

namespace {

std::uint64_t mode_stream(EstimateMode mode) {
  switch (mode) {
    case EstimateMode::holdout: return 0x686f6c64;
    case EstimateMode::oob: return 0x6f6f62;
    case EstimateMode::vi: return 0x7669;
  }
  return 0;
}

// Averages are anchored at tree 0: sum_i w_i r_i / W = r_0 + sum_i w_i
// (r_i - r_0) / W. Identical trees then give bit-identical averages for
// every resample, so their replicates are exactly zero.
struct ResidualTable {
  Matrix<double> deviation;      // r_ij - r_0j
  std::vector<double> anchor;    // r_0j
};

ResidualTable residual_table(const PredictionMatrix& pred) {
  const std::size_t t = pred.trees();
  const std::size_t m = pred.points();
  ResidualTable table{Matrix<double>(t, m), std::vector<double>(m)};
  for (std::size_t j = 0; j < m; ++j) {
    table.anchor[j] = pred.labels[j] - pred.values(0, j);
  }
  for (std::size_t i = 0; i < t; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      table.deviation(i, j) =
          (pred.labels[j] - pred.values(i, j)) - table.anchor[j];
    }
  }
  return table;
}

void check_counts(std::size_t t, std::span<const std::uint32_t> counts) {
  if (counts.size() != t) throw Error("resample count vector has wrong length");
}

std::vector<double> holdout_residuals(const ResidualTable& table,
                                      std::span<const std::uint32_t> counts) {
  const std::size_t m = table.anchor.size();
  std::vector<double> acc(m, 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (counts[i] == 0) continue;
    const double w = counts[i];
    total += w;
    const auto dev = table.deviation.row(i);
    for (std::size_t j = 0; j < m; ++j) acc[j] += w * dev[j];
  }
  for (std::size_t j = 0; j < m; ++j) acc[j] = table.anchor[j] + acc[j] / total;
  return acc;
}

std::vector<double> oob_residuals(const ResidualTable& table,
                                  const Matrix<std::uint8_t>& mask,
                                  std::span<const std::uint32_t> counts) {
  const std::size_t m = table.anchor.size();
  std::vector<double> acc(m, 0.0);
  std::vector<double> weight(m, 0.0);
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (counts[i] == 0) continue;
    const double w = counts[i];
    const auto dev = table.deviation.row(i);
    const auto oob = mask.row(i);
    for (std::size_t j = 0; j < m; ++j) {
      if (!oob[j]) continue;
      acc[j] += w * dev[j];
      weight[j] += w;
    }
  }
  for (std::size_t j = 0; j < m; ++j) {
    // Empty OOB set: the prediction is taken to be the label itself.
    acc[j] = weight[j] > 0.0 ? table.anchor[j] + acc[j] / weight[j] : 0.0;
  }
  return acc;
}

double mean_square(const std::vector<double>& r) {
  double s = 0.0;
  for (double v : r) s += v * v;
  return s / static_cast<double>(r.size());
}

// psi(resampled) - psi(original), as mean of (a - b)(a + b).
double mse_difference(const std::vector<double>& resampled,
                      const std::vector<double>& original) {
  double s = 0.0;
  for (std::size_t j = 0; j < original.size(); ++j) {
    s += (resampled[j] - original[j]) * (resampled[j] + original[j]);
  }
  return s / static_cast<double>(original.size());
}

ConvergenceEstimate finish(EstimateMode mode, std::size_t t,
                           double effective_t0, const BootstrapConfig& cfg,
                           std::vector<double> replicates) {
  ConvergenceEstimate est;
  est.t0 = t;
  est.alpha = cfg.alpha;
  est.mode = mode;
  est.effective_t0 = effective_t0;
  est.q_hat = empirical_quantile(replicates, 1.0 - cfg.alpha);
  est.replicates = std::move(replicates);
  return est;
}

}  // namespace

std::string to_string(EstimateMode mode) {
  switch (mode) {
    case EstimateMode::holdout: return "holdout";
    case EstimateMode::oob: return "oob";
    case EstimateMode::vi: return "vi";
  }
  return "unknown";
}

EstimateMode parse_estimate_mode(const std::string& name) {
  if (name == "holdout") return EstimateMode::holdout;
  if (name == "oob") return EstimateMode::oob;
  if (name == "vi") return EstimateMode::vi;
  throw Error("unknown estimate mode '" + name + "' (expected holdout, oob or vi)");
}

void BootstrapConfig::validate() const {
  if (B < 1) throw Error("number of bootstrap replicates B must be at least 1");
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error("alpha must lie in (0, 1)");
}

double empirical_quantile(std::span<const double> values, double level) {
  if (values.empty()) throw Error("empirical quantile of an empty sample");
  if (!(level > 0.0 && level < 1.0)) throw Error("quantile level must lie in (0, 1)");
  const std::size_t size = values.size();
  const double x = static_cast<double>(size) * level;
  double k = std::ceil(x);
  if (k - 1.0 >= 1.0 && x - (k - 1.0) <= 1e-9 * x) k -= 1.0;
  const auto rank = std::clamp<std::size_t>(static_cast<std::size_t>(k), 1, size);
  std::vector<double> sorted(values.begin(), values.end());
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(rank - 1),
                   sorted.end());
  return sorted[rank - 1];
}

std::vector<std::uint32_t> resample_counts(std::size_t t, std::uint64_t seed,
                                           EstimateMode mode, std::size_t b) {
  std::vector<std::uint32_t> counts(t, 0);
  Engine rng = make_engine(derive_seed(seed, mode_stream(mode), b));
  for (std::size_t draw = 0; draw < t; ++draw) ++counts[uniform_index(rng, t)];
  return counts;
}

double holdout_mse(const PredictionMatrix& pred,
                   std::span<const std::uint32_t> counts) {
  check_counts(pred.trees(), counts);
  if (pred.points() == 0) throw Error("evaluation set is empty");
  return mean_square(holdout_residuals(residual_table(pred), counts));
}

double oob_mse(const PredictionMatrix& pred, const Matrix<std::uint8_t>& mask,
               std::span<const std::uint32_t> counts) {
  check_counts(pred.trees(), counts);
  if (mask.rows() != pred.trees() || mask.cols() != pred.points()) {
    throw Error("OOB mask shape does not match the prediction matrix");
  }
  if (pred.points() == 0) throw Error("training set is empty");
  return mean_square(oob_residuals(residual_table(pred), mask, counts));
}

ConvergenceEstimate bootstrap_mse_quantile(const PredictionMatrix& pred,
                                           const BootstrapConfig& cfg) {
  cfg.validate();
  const std::size_t t = pred.trees();
  if (t < 2) throw Error("hold-out bootstrap needs at least 2 trees");
  if (pred.points() == 0) throw Error("hold-out evaluation set is empty");

  const ResidualTable table = residual_table(pred);
  const std::vector<std::uint32_t> ones(t, 1);
  const std::vector<double> base = holdout_residuals(table, ones);

  std::vector<double> z(cfg.B);
  parallel_for(cfg.B, cfg.threads, [&](std::size_t b) {
    const auto counts = resample_counts(t, cfg.seed, EstimateMode::holdout, b);
    z[b] = mse_difference(holdout_residuals(table, counts), base);
  });
  return finish(EstimateMode::holdout, t, static_cast<double>(t), cfg, std::move(z));
}

ConvergenceEstimate bootstrap_mse_quantile_oob(
    const PredictionMatrix& pred_on_train, const Matrix<std::uint8_t>& oob_mask,
    const BootstrapConfig& cfg, std::size_t n) {
  cfg.validate();
  const std::size_t t = pred_on_train.trees();
  if (n < 1 || pred_on_train.points() != n) {
    throw Error("OOB prediction matrix must cover the n training points");
  }
  if (oob_mask.rows() != t || oob_mask.cols() != n) {
    throw Error("OOB mask shape does not match the prediction matrix");
  }
  if (t < 1) throw Error("OOB bootstrap needs at least 1 tree");

  const ResidualTable table = residual_table(pred_on_train);
  const std::vector<std::uint32_t> ones(t, 1);
  const std::vector<double> base = oob_residuals(table, oob_mask, ones);

  std::vector<double> z(cfg.B);
  parallel_for(cfg.B, cfg.threads, [&](std::size_t b) {
    const auto counts = resample_counts(t, cfg.seed, EstimateMode::oob, b);
    z[b] = mse_difference(oob_residuals(table, oob_mask, counts), base);
  });
  return finish(EstimateMode::oob, t,
                expected_oob_fraction(n) * static_cast<double>(t), cfg,
                std::move(z));
}

ConvergenceEstimate bootstrap_vi_quantile(const ViMatrix& vi,
                                          const BootstrapConfig& cfg) {
  cfg.validate();
  const std::size_t t = vi.trees();
  const std::size_t p = vi.variables();
  if (t < 2) throw Error("importance bootstrap needs at least 2 trees");
  if (p < 1) throw Error("importance matrix has no variables");

  Matrix<double> deviation(t, p);
  for (std::size_t i = 0; i < t; ++i) {
    for (std::size_t l = 0; l < p; ++l) {
      deviation(i, l) = vi.values(i, l) - vi.values(0, l);
    }
  }

  // mean*(l) - mean(l) = sum_i (w_i - 1) (vi_il - vi_0l) / t
  std::vector<double> eps(cfg.B);
  parallel_for(cfg.B, cfg.threads, [&](std::size_t b) {
    const auto counts = resample_counts(t, cfg.seed, EstimateMode::vi, b);
    std::vector<double> shift(p, 0.0);
    for (std::size_t i = 0; i < t; ++i) {
      if (counts[i] == 1) continue;
      const double w = static_cast<double>(counts[i]) - 1.0;
      const auto dev = deviation.row(i);
      for (std::size_t l = 0; l < p; ++l) shift[l] += w * dev[l];
    }
    double worst = 0.0;
    for (double s : shift) worst = std::max(worst, std::abs(s) / static_cast<double>(t));
    eps[b] = worst;
  });
  return finish(EstimateMode::vi, t, static_cast<double>(t), cfg, std::move(eps));
}

double extrapolate(const ConvergenceEstimate& est, std::size_t t) {
  const double td = static_cast<double>(t);
  if (td < est.domain_start()) {
    throw Error("extrapolation target t=" + std::to_string(t) +
                " lies below the estimate's domain start " +
                std::to_string(est.domain_start()));
  }
  const double kappa = std::sqrt(est.effective_t0) * est.q_hat;
  return kappa / std::sqrt(td);
}

double extrapolate_uncorrected(const ConvergenceEstimate& est, std::size_t t) {
  if (t < est.t0) {
    throw Error("extrapolation target lies below the initial ensemble size");
  }
  const double kappa = std::sqrt(static_cast<double>(est.t0)) * est.q_hat;
  return kappa / std::sqrt(static_cast<double>(t));
}

std::size_t recommend_size(const ConvergenceEstimate& est, double epsilon) {
  if (!(epsilon > 0.0)) throw Error("tolerance epsilon must be positive");
  const auto floor_size =
      static_cast<std::size_t>(std::ceil(est.domain_start()));
  if (!(est.q_hat > 0.0)) return floor_size;
  const double ratio = est.q_hat / epsilon;
  const double needed = std::ceil(est.effective_t0 * ratio * ratio);
  if (!(needed < 1e18)) throw Error("recommended size overflows");
  return std::max(floor_size, static_cast<std::size_t>(needed));
}

}  // namespace forestconv
