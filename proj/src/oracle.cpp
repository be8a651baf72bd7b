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

#include "forestconv/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "forestconv/io.hpp"
#include "forestconv/random.hpp"

namespace forestconv {

namespace {

constexpr std::uint64_t kRunStream = 0x72756e;
constexpr std::uint64_t kBootStream = 0x626f6f74;
constexpr std::uint64_t kPermStream = 0x7065726d;

// Grid plus t_max (if absent), ascending; returns the index of t_max.
std::vector<std::size_t> grid_with_max(const std::vector<std::size_t>& grid,
                                       std::size_t t_max) {
  std::vector<std::size_t> ts = grid;
  if (ts.empty() || ts.back() != t_max) ts.push_back(t_max);
  return ts;
}

std::vector<std::size_t> resolve_grid(const OracleConfig& cfg) {
  if (cfg.runs < 2) throw Error("oracle needs at least 2 runs");
  if (cfg.t_max < 1) throw Error("t_max must be at least 1");
  if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) throw Error("alpha must lie in (0, 1)");
  std::vector<std::size_t> grid =
      cfg.t_grid.empty() ? geometric_grid(std::min<std::size_t>(25, cfg.t_max), cfg.t_max)
                         : cfg.t_grid;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (grid[k] < 1) throw Error("ensemble sizes in the grid must be positive");
    if (k > 0 && grid[k] <= grid[k - 1]) throw Error("t grid must be strictly increasing");
  }
  if (grid.back() > cfg.t_max) {
    throw Error("t grid exceeds t_max=" + std::to_string(cfg.t_max));
  }
  return grid;
}

}  // namespace

std::string to_string(Generator g) {
  switch (g) {
    case Generator::friedman1: return "friedman1";
    case Generator::linear: return "linear";
    case Generator::constant: return "constant";
  }
  return "unknown";
}

Generator parse_generator(const std::string& name) {
  if (name == "friedman1") return Generator::friedman1;
  if (name == "linear") return Generator::linear;
  if (name == "constant") return Generator::constant;
  throw Error("unknown generator '" + name + "' (expected friedman1, linear or constant)");
}

std::string to_string(GapKind kind) {
  return kind == GapKind::mse_gap ? "mse_gap" : "vi_gap";
}

void SyntheticSpec::validate() const {
  if (n < 1) throw Error("synthetic n must be at least 1");
  if (p < 1) throw Error("synthetic p must be at least 1");
  if (generator == Generator::friedman1 && p < 5) {
    throw Error("friedman1 needs p >= 5");
  }
  if (!(noise_sd >= 0.0) || !std::isfinite(noise_sd)) {
    throw Error("noise_sd must be a finite nonnegative number");
  }
}

Dataset generate_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  Engine rng = make_engine(spec.seed);
  Matrix<double> x(spec.n, spec.p);
  std::vector<double> y(spec.n);
  for (std::size_t j = 0; j < spec.n; ++j) {
    auto row = x.row(j);
    for (double& v : row) v = uniform01(rng);
    double mean = 0.0;
    switch (spec.generator) {
      case Generator::friedman1:
        mean = 10.0 * std::sin(std::numbers::pi * row[0] * row[1]) +
               20.0 * (row[2] - 0.5) * (row[2] - 0.5) + 10.0 * row[3] +
               5.0 * row[4];
        break;
      case Generator::linear:
        for (double v : row) mean += v;
        break;
      case Generator::constant:
        break;
    }
    y[j] = mean + spec.noise_sd * standard_normal(rng);
  }
  std::vector<std::string> names;
  for (std::size_t l = 0; l < spec.p; ++l) names.push_back("x" + std::to_string(l + 1));
  return make_dataset(std::move(x), std::move(y), std::move(names), "y");
}

std::uint64_t oracle_run_seed(std::uint64_t seed, std::size_t r) {
  return derive_seed(seed, kRunStream, r);
}

std::vector<std::size_t> geometric_grid(std::size_t start, std::size_t t_max) {
  if (start < 1 || start > t_max) throw Error("geometric grid needs 1 <= start <= t_max");
  std::vector<std::size_t> grid;
  for (std::size_t t = start; t < t_max; t *= 2) grid.push_back(t);
  grid.push_back(t_max);
  return grid;
}

std::vector<double> mse_path(const PredictionMatrix& pred,
                             std::span<const std::size_t> ts) {
  const std::size_t m = pred.points();
  if (m == 0) throw Error("evaluation set is empty");
  for (std::size_t k = 0; k < ts.size(); ++k) {
    if (ts[k] < 1 || ts[k] > pred.trees() || (k > 0 && ts[k] <= ts[k - 1])) {
      throw Error("path sizes must be strictly increasing within [1, t]");
    }
  }
  std::vector<double> sums(m, 0.0);
  std::vector<double> path;
  path.reserve(ts.size());
  std::size_t next = 0;
  for (std::size_t i = 0; i < pred.trees() && next < ts.size(); ++i) {
    const auto row = pred.values.row(i);
    for (std::size_t j = 0; j < m; ++j) sums[j] += row[j];
    if (i + 1 == ts[next]) {
      const double size = static_cast<double>(i + 1);
      double sse = 0.0;
      for (std::size_t j = 0; j < m; ++j) {
        const double r = pred.labels[j] - sums[j] / size;
        sse += r * r;
      }
      path.push_back(sse / static_cast<double>(m));
      ++next;
    }
  }
  return path;
}

Matrix<double> vi_mean_path(const ViMatrix& vi, std::span<const std::size_t> ts) {
  const std::size_t p = vi.variables();
  for (std::size_t k = 0; k < ts.size(); ++k) {
    if (ts[k] < 1 || ts[k] > vi.trees() || (k > 0 && ts[k] <= ts[k - 1])) {
      throw Error("path sizes must be strictly increasing within [1, t]");
    }
  }
  Matrix<double> out(ts.size(), p);
  std::vector<double> sums(p, 0.0);
  std::size_t next = 0;
  for (std::size_t i = 0; i < vi.trees() && next < ts.size(); ++i) {
    const auto row = vi.values.row(i);
    for (std::size_t l = 0; l < p; ++l) sums[l] += row[l];
    if (i + 1 == ts[next]) {
      for (std::size_t l = 0; l < p; ++l) {
        out(next, l) = sums[l] / static_cast<double>(i + 1);
      }
      ++next;
    }
  }
  return out;
}

QuantileCurve curve_from_gaps(const Matrix<double>& gaps,
                              std::vector<std::size_t> ts, double alpha,
                              GapKind kind) {
  if (gaps.cols() != ts.size()) throw Error("gap table width does not match the grid");
  QuantileCurve curve;
  curve.alpha = alpha;
  curve.kind = kind;
  curve.values.resize(ts.size());
  std::vector<double> column(gaps.rows());
  for (std::size_t k = 0; k < ts.size(); ++k) {
    for (std::size_t r = 0; r < gaps.rows(); ++r) column[r] = gaps(r, k);
    curve.values[k] = empirical_quantile(column, 1.0 - alpha);
  }
  curve.ts = std::move(ts);
  return curve;
}

OracleReport true_quantile_curve(const Dataset& train, const Dataset& eval,
                                 const OracleConfig& cfg) {
  const std::vector<std::size_t> grid = resolve_grid(cfg);
  if (eval.n() == 0) throw Error("evaluation set is empty");
  if (eval.p() != train.p()) throw Error("evaluation set has a different column count");
  cfg.params.validate(train.p());
  const std::vector<std::size_t> ts = grid_with_max(grid, cfg.t_max);

  Matrix<double> paths(cfg.runs, ts.size());
  parallel_for(cfg.runs, cfg.threads, [&](std::size_t r) {
    const Ensemble ensemble =
        train_ensemble(train, cfg.t_max, cfg.params, oracle_run_seed(cfg.seed, r));
    const auto path = mse_path(predict_matrix(ensemble, eval), ts);
    std::copy(path.begin(), path.end(), paths.row(r).begin());
  });

  OracleReport report;
  report.runs = cfg.runs;
  report.t_max = cfg.t_max;
  report.seed = cfg.seed;
  report.params = cfg.params;
  report.input_hash = content_hash(train, eval);
  const std::size_t last = ts.size() - 1;
  double total = 0.0;
  for (std::size_t r = 0; r < cfg.runs; ++r) total += paths(r, last);
  report.mse_inf_hat = total / static_cast<double>(cfg.runs);

  Matrix<double> gaps(cfg.runs, grid.size());
  for (std::size_t r = 0; r < cfg.runs; ++r) {
    for (std::size_t k = 0; k < grid.size(); ++k) {
      gaps(r, k) = paths(r, k) - report.mse_inf_hat;
    }
  }
  report.curve = curve_from_gaps(gaps, grid, cfg.alpha, GapKind::mse_gap);
  if (cfg.keep_paths) report.per_run_paths = std::move(gaps);
  return report;
}

OracleReport true_vi_quantile_curve(const Dataset& train, ViRule rule,
                                    const OracleConfig& cfg) {
  const std::vector<std::size_t> grid = resolve_grid(cfg);
  cfg.params.validate(train.p());
  const std::vector<std::size_t> ts = grid_with_max(grid, cfg.t_max);
  const std::size_t p = train.p();

  // Per run: |ts| x p prefix means, stored flat.
  std::vector<Matrix<double>> means(cfg.runs);
  parallel_for(cfg.runs, cfg.threads, [&](std::size_t r) {
    const std::uint64_t seed = oracle_run_seed(cfg.seed, r);
    const Ensemble ensemble = train_ensemble(train, cfg.t_max, cfg.params, seed);
    const ViMatrix vi = rule == ViRule::impurity
                            ? impurity_vi_matrix(ensemble, train)
                            : permutation_importance(
                                  ensemble, train, derive_seed(seed, kPermStream));
    means[r] = vi_mean_path(vi, ts);
  });

  OracleReport report;
  report.runs = cfg.runs;
  report.t_max = cfg.t_max;
  report.seed = cfg.seed;
  report.params = cfg.params;
  report.input_hash = content_hash(train);
  const std::size_t last = ts.size() - 1;
  report.vi_inf_hat.assign(p, 0.0);
  for (std::size_t r = 0; r < cfg.runs; ++r) {
    for (std::size_t l = 0; l < p; ++l) report.vi_inf_hat[l] += means[r](last, l);
  }
  for (double& v : report.vi_inf_hat) v /= static_cast<double>(cfg.runs);

  Matrix<double> gaps(cfg.runs, grid.size());
  for (std::size_t r = 0; r < cfg.runs; ++r) {
    for (std::size_t k = 0; k < grid.size(); ++k) {
      double worst = 0.0;
      for (std::size_t l = 0; l < p; ++l) {
        worst = std::max(worst, std::abs(means[r](k, l) - report.vi_inf_hat[l]));
      }
      gaps(r, k) = worst;
    }
  }
  report.curve = curve_from_gaps(gaps, grid, cfg.alpha, GapKind::vi_gap);
  if (cfg.keep_paths) report.per_run_paths = std::move(gaps);
  return report;
}

std::vector<RunEstimate> estimate_runs(const Dataset& train,
                                       const Dataset& eval,
                                       const RunStudyConfig& cfg) {
  if (cfg.runs < 1) throw Error("study needs at least 1 run");
  if (eval.n() == 0) throw Error("evaluation set is empty");
  if (cfg.mode == EstimateMode::vi) {
    throw Error("run studies cover the hold-out and OOB estimators only");
  }
  if (cfg.mode == EstimateMode::holdout && cfg.holdout == nullptr) {
    throw Error("hold-out mode needs a hold-out set");
  }
  cfg.bootstrap.validate();
  cfg.params.validate(train.p());

  std::vector<RunEstimate> out(cfg.runs);
  parallel_for(cfg.runs, cfg.threads, [&](std::size_t r) {
    const Ensemble ensemble =
        train_ensemble(train, cfg.t, cfg.params, oracle_run_seed(cfg.seed, r));
    const PredictionMatrix on_eval = predict_matrix(ensemble, eval);
    const auto mse = mse_path(on_eval, std::vector<std::size_t>{cfg.t});

    BootstrapConfig boot = cfg.bootstrap;
    boot.seed = derive_seed(cfg.seed, kBootStream, r);
    boot.threads = 1;
    RunEstimate& slot = out[r];
    slot.mse = mse.front();
    if (cfg.mode == EstimateMode::holdout) {
      slot.estimate = bootstrap_mse_quantile(predict_matrix(ensemble, *cfg.holdout), boot);
    } else {
      slot.estimate = bootstrap_mse_quantile_oob(predict_matrix(ensemble, train),
                                                 oob_structure(ensemble).mask,
                                                 boot, train.n());
    }
  });
  return out;
}

CoverageReport coverage_check(const Dataset& train, const Dataset& eval,
                              const OracleReport& oracle,
                              const RunStudyConfig& cfg) {
  if (cfg.runs < 20) throw Error("coverage check needs at least 20 runs");
  if (oracle.curve.kind != GapKind::mse_gap || oracle.runs == 0) {
    throw Error("coverage check needs an MSE oracle report");
  }
  if (oracle.input_hash != content_hash(train, eval)) {
    throw Error("oracle report was computed on different data");
  }
  const auto runs = estimate_runs(train, eval, cfg);

  CoverageReport report;
  report.runs = cfg.runs;
  report.t_check = cfg.t;
  report.alpha = cfg.bootstrap.alpha;
  report.mode = cfg.mode;
  report.mse_inf_hat = oracle.mse_inf_hat;
  std::size_t covered = 0;
  for (const auto& run : runs) {
    const double gap = run.mse - oracle.mse_inf_hat;
    report.gaps.push_back(gap);
    report.q_hats.push_back(run.estimate.q_hat);
    if (gap <= run.estimate.q_hat) ++covered;
  }
  report.coverage = static_cast<double>(covered) / static_cast<double>(cfg.runs);
  return report;
}

}  // namespace forestconv
