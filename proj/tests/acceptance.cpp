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

// Acceptance gate. Prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <numeric>
#include <random>
#include <string>
#include <thread>
#include <vector>
#include <unistd.h>

#include "forestconv/convergence.hpp"
#include "forestconv/forest.hpp"
#include "forestconv/io.hpp"
#include "forestconv/oracle.hpp"
#include "oracles.hpp"

namespace fc = forestconv;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int hardware_threads() {
  const unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : static_cast<int>(std::min(n, 16u));
}

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

// Shared Monte Carlo setup: friedman1, n = 300, p = 10, noise sd 1, with an
// independent evaluation set of the same size (an even train/test split).
struct Study {
  fc::Dataset train;
  fc::Dataset eval;
  fc::TreeParams params;
};

const Study& study() {
  static const Study s = [] {
    fc::SyntheticSpec spec;
    spec.generator = fc::Generator::friedman1;
    spec.n = 300;
    spec.p = 10;
    spec.noise_sd = 1.0;
    spec.seed = 20261015;
    Study out;
    out.train = fc::generate_synthetic(spec);
    spec.seed = 20261016;
    out.eval = fc::generate_synthetic(spec);
    out.params = fc::TreeParams::defaults_for(10);
    return out;
  }();
  return s;
}

// ------------------------------------------------------------ coverage
Outcome coverage() {
  const Study& s = study();
  fc::OracleConfig ocfg;
  ocfg.params = s.params;
  ocfg.runs = 200;
  ocfg.t_max = 400;
  ocfg.alpha = 0.1;
  ocfg.seed = 101;
  ocfg.threads = hardware_threads();
  const fc::OracleReport oracle = fc::true_quantile_curve(s.train, s.eval, ocfg);

  fc::RunStudyConfig cfg;
  cfg.params = s.params;
  cfg.runs = 200;
  cfg.t = 200;
  cfg.mode = fc::EstimateMode::oob;
  cfg.bootstrap.B = 200;
  cfg.bootstrap.alpha = 0.1;
  cfg.seed = 202;
  cfg.threads = hardware_threads();
  const fc::CoverageReport cov = fc::coverage_check(s.train, s.eval, oracle, cfg);
  return {cov.coverage >= 0.85, "coverage " + num(cov.coverage) + " over 200 runs at t=200 (need >= 0.85)"};
}

// ------------------------------------------------------------ decay and extrapolation
const fc::OracleReport& big_oracle() {
  static const fc::OracleReport rep = [] {
    const Study& s = study();
    fc::OracleConfig cfg;
    cfg.params = s.params;
    cfg.runs = 200;
    cfg.t_max = 800;
    cfg.t_grid = {25, 50, 100, 200, 400, 500, 800};
    cfg.alpha = 0.1;
    cfg.seed = 303;
    cfg.keep_paths = true;
    cfg.threads = hardware_threads();
    return fc::true_quantile_curve(s.train, s.eval, cfg);
  }();
  return rep;
}

double curve_at(const fc::QuantileCurve& c, std::size_t t) {
  for (std::size_t k = 0; k < c.ts.size(); ++k)
    if (c.ts[k] == t) return c.values[k];
  throw fc::Error("size missing from the oracle grid");
}

double loglog_slope(const std::vector<double>& t, const std::vector<double>& v) {
  std::vector<double> lx, ly;
  for (std::size_t k = 0; k < t.size(); ++k) {
    lx.push_back(std::log(t[k]));
    ly.push_back(std::log(v[k]));
  }
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / lx.size();
  const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / ly.size();
  double sxy = 0, sxx = 0;
  for (std::size_t k = 0; k < lx.size(); ++k) {
    sxy += (lx[k] - mx) * (ly[k] - my);
    sxx += (lx[k] - mx) * (lx[k] - mx);
  }
  return sxy / sxx;
}

Outcome decay() {
  const auto& rep = big_oracle();
  const std::vector<std::size_t> grid{25, 50, 100, 200, 400, 800};
  std::vector<double> ts, q, sd;
  std::string values;
  for (std::size_t t : grid) {
    const double v = curve_at(rep.curve, t);
    values += (values.empty() ? "" : " ") + num(v);
    if (!(v > 0.0)) return {false, "nonpositive curve value at t=" + std::to_string(t) + ": " + values};
    ts.push_back(static_cast<double>(t));
    q.push_back(v);
    // Diagnostic: spread of the gaps across runs at this size.
    const std::size_t k = std::find(rep.curve.ts.begin(), rep.curve.ts.end(), t) - rep.curve.ts.begin();
    double m1 = 0, m2 = 0;
    for (std::size_t r = 0; r < rep.runs; ++r) {
      m1 += rep.per_run_paths(r, k) / rep.runs;
      m2 += rep.per_run_paths(r, k) * rep.per_run_paths(r, k) / rep.runs;
    }
    sd.push_back(std::sqrt(std::max(0.0, m2 - m1 * m1)));
  }
  const double slope = loglog_slope(ts, q);
  return {slope >= -0.65 && slope <= -0.35,
          "log-log slope " + num(slope) + " over t=25..800 (need [-0.65, -0.35]); q = " + values +
              "; slope of the gap sd " + num(loglog_slope(ts, sd))};
}

struct ExtrapolationStudy {
  double truth = 0;
  double mean_corrected = 0;
  double mae_corrected = 0;
  double mae_uncorrected = 0;
};

const ExtrapolationStudy& extrapolation_study() {
  static const ExtrapolationStudy out = [] {
    const Study& s = study();
    fc::RunStudyConfig cfg;
    cfg.params = s.params;
    cfg.runs = 200;
    cfg.t = 125;
    cfg.mode = fc::EstimateMode::oob;
    cfg.bootstrap.B = 50;
    cfg.bootstrap.alpha = 0.1;
    cfg.seed = 404;
    cfg.threads = hardware_threads();
    const auto runs = fc::estimate_runs(s.train, s.eval, cfg);
    ExtrapolationStudy r;
    r.truth = curve_at(big_oracle().curve, 500);
    for (const auto& run : runs) {
      const double corrected = fc::extrapolate(run.estimate, 500);
      const double uncorrected = fc::extrapolate_uncorrected(run.estimate, 500);
      r.mean_corrected += corrected / runs.size();
      r.mae_corrected += std::abs(corrected - r.truth) / runs.size();
      r.mae_uncorrected += std::abs(uncorrected - r.truth) / runs.size();
    }
    return r;
  }();
  return out;
}

Outcome extrapolation_x4() {
  const auto& r = extrapolation_study();
  const double rel = r.mean_corrected / r.truth - 1.0;
  return {std::abs(rel) <= 0.30, "mean corrected q_ext(500) " + num(r.mean_corrected) + " vs true q(500) " +
                                     num(r.truth) + " (relative error " + num(rel) + ", need within 0.30)"};
}

Outcome bias_correction() {
  const auto& r = extrapolation_study();
  return {r.mae_corrected < r.mae_uncorrected,
          "MAE corrected " + num(r.mae_corrected) + " vs uncorrected " + num(r.mae_uncorrected)};
}

// ------------------------------------------------------------ bootstrap oracle
fc::PredictionMatrix to_pred(const oracle::Table& table, const std::vector<double>& labels) {
  fc::Matrix<double> values(table.size(), labels.size());
  for (std::size_t i = 0; i < table.size(); ++i)
    for (std::size_t j = 0; j < labels.size(); ++j) values(i, j) = table[i][j];
  return fc::PredictionMatrix{std::move(values), labels};
}

fc::Matrix<std::uint8_t> to_mask(const oracle::Mask& mask) {
  fc::Matrix<std::uint8_t> m(mask.size(), mask.front().size());
  for (std::size_t i = 0; i < mask.size(); ++i)
    for (std::size_t j = 0; j < mask[i].size(); ++j) m(i, j) = mask[i][j] ? 1 : 0;
  return m;
}

Outcome bootstrap_oracle() {
  std::mt19937_64 rng(5150);
  std::uniform_real_distribution<double> unit(-4.0, 4.0);
  std::size_t checks = 0, failures = 0;
  double worst = 0;
  auto compare = [&](double streaming, double star, double base) {
    ++checks;
    const double scale = std::max({std::abs(star), std::abs(base), 1e-300});
    const double err = std::abs(streaming - (star - base)) / scale;
    worst = std::max(worst, err);
    if (err > 1e-12) ++failures;
  };
  for (int trial = 0; trial < 40; ++trial) {
    for (std::size_t t = 1; t <= 4; ++t) {
      for (std::size_t m = 1; m <= 3; ++m) {
        oracle::Table table(t, std::vector<double>(m));
        oracle::Mask mask(t, std::vector<bool>(m));
        std::vector<double> labels(m);
        for (auto& row : table) for (double& v : row) v = unit(rng);
        for (auto& row : mask) for (std::size_t j = 0; j < m; ++j) row[j] = unit(rng) < 0.0;
        for (double& y : labels) y = unit(rng);
        const auto pred = to_pred(table, labels);
        const auto fmask = to_mask(mask);
        const std::uint64_t seed = rng();
        fc::BootstrapConfig cfg;
        cfg.B = 20;
        cfg.seed = seed;

        const double hbase = oracle::holdout_psi(table, labels, oracle::identity(t));
        const double obase = oracle::oob_psi(table, mask, labels, oracle::identity(t));
        if (t >= 2) {
          const auto est = fc::bootstrap_mse_quantile(pred, cfg);
          for (std::size_t b = 0; b < cfg.B; ++b) {
            const auto counts = fc::resample_counts(t, seed, fc::EstimateMode::holdout, b);
            compare(est.replicates[b], oracle::holdout_psi(table, labels, oracle::expand(counts)), hbase);
          }
        }
        const auto oest = fc::bootstrap_mse_quantile_oob(pred, fmask, cfg, m);
        for (std::size_t b = 0; b < cfg.B; ++b) {
          const auto counts = fc::resample_counts(t, seed, fc::EstimateMode::oob, b);
          compare(oest.replicates[b], oracle::oob_psi(table, mask, labels, oracle::expand(counts)), obase);
        }
        // Every ordered resample: t^t of them (all t for hold-out, t <= 3 for OOB).
        const std::vector<std::uint32_t> ones(t, 1);
        const double hstream = fc::holdout_mse(pred, ones);
        const double ostream = fc::oob_mse(pred, fmask, ones);
        oracle::for_each_ordered_resample(t, [&](const std::vector<std::size_t>& draw) {
          const auto counts = oracle::histogram(draw, t);
          compare(fc::holdout_mse(pred, counts) - hstream, oracle::holdout_psi(table, labels, draw), hbase);
          if (t <= 3) {
            compare(fc::oob_mse(pred, fmask, counts) - ostream, oracle::oob_psi(table, mask, labels, draw), obase);
          }
        });
      }
    }
  }
  return {failures == 0, std::to_string(checks) + " replicate comparisons, " + std::to_string(failures) +
                             " beyond 1e-12 relative (worst " + num(worst) + ")"};
}

// ------------------------------------------------------------ scale / shift
Outcome scale_shift() {
  std::mt19937_64 rng(6060);
  std::uniform_int_distribution<int> grid(-256, 256);
  std::size_t scale_bad = 0, shift_bad = 0, checked = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t t = 10 + trial, m = 15;
    oracle::Table table(t, std::vector<double>(m));
    std::vector<double> labels(m);
    // Values on a 1/32 grid so that a shift by a multiple of 1/32 is exact.
    for (auto& row : table) for (double& v : row) v = grid(rng) / 32.0;
    for (double& y : labels) y = grid(rng) / 32.0;
    fc::Matrix<std::uint8_t> mask(t, m);
    for (auto& v : mask.data()) v = (rng() % 100) < 37;
    const double shift = grid(rng) / 32.0;

    auto transformed = [&](double a, double c) {
      oracle::Table tt = table;
      std::vector<double> ll = labels;
      for (auto& row : tt) for (double& v : row) v = a * v + c;
      for (double& y : ll) y = a * y + c;
      return to_pred(tt, ll);
    };
    fc::BootstrapConfig cfg;
    cfg.B = 50;
    cfg.seed = rng();
    const auto base = to_pred(table, labels);
    const auto scaled = transformed(10.0, 0.0);
    const auto shifted = transformed(1.0, shift);

    const fc::ConvergenceEstimate h[3] = {fc::bootstrap_mse_quantile(base, cfg),
                                          fc::bootstrap_mse_quantile(scaled, cfg),
                                          fc::bootstrap_mse_quantile(shifted, cfg)};
    const fc::ConvergenceEstimate o[3] = {fc::bootstrap_mse_quantile_oob(base, mask, cfg, m),
                                          fc::bootstrap_mse_quantile_oob(scaled, mask, cfg, m),
                                          fc::bootstrap_mse_quantile_oob(shifted, mask, cfg, m)};
    for (const auto* e : {h, o}) {
      for (std::size_t b = 0; b < cfg.B; ++b) {
        ++checked;
        const double want = 100.0 * e[0].replicates[b];
        if (std::abs(e[1].replicates[b] - want) > 1e-9 * std::abs(want)) ++scale_bad;
        if (e[2].replicates[b] != e[0].replicates[b]) ++shift_bad;
      }
      const double want_q = 100.0 * e[0].q_hat;
      if (std::abs(e[1].q_hat - want_q) > 1e-9 * std::abs(want_q)) ++scale_bad;
      if (e[2].q_hat != e[0].q_hat) ++shift_bad;
    }
  }
  return {scale_bad == 0 && shift_bad == 0,
          std::to_string(checked) + " replicates: " + std::to_string(scale_bad) + " off the c^2 scaling, " +
              std::to_string(shift_bad) + " changed by a shift"};
}

// ------------------------------------------------------------ OOB combinatorics
Outcome oob_combinatorics() {
  const Study& s = study();
  fc::SyntheticSpec spec;
  spec.generator = fc::Generator::friedman1;
  spec.n = 1000;
  spec.seed = 707;
  const fc::Dataset d = fc::generate_synthetic(spec);
  const fc::Ensemble e = fc::train_ensemble(d, 100, s.params, 808, hardware_threads());
  const auto oob = fc::oob_structure(e);
  double total = 0;
  for (auto v : oob.mask.data()) total += v;
  const double fraction = total / (100.0 * 1000.0);
  const double expected = fc::expected_oob_fraction(1000);
  const bool fraction_ok = std::abs(fraction - expected) <= 0.05;

  // Empty OOB sets at t = 10, pooled over 10 independent ensembles.
  std::size_t empty = 0, points = 0;
  for (std::uint64_t k = 0; k < 10; ++k) {
    const fc::Ensemble small = fc::train_ensemble(d, 10, s.params, 900 + k, hardware_threads());
    for (const auto& trees : fc::oob_structure(small).trees_for_point) {
      empty += trees.empty();
      ++points;
    }
  }
  const double target = std::pow(0.63, 10);
  const double se = std::sqrt(target * (1 - target) / points);
  const double observed = static_cast<double>(empty) / points;
  const bool empty_ok = std::abs(observed - target) <= 3 * se;
  return {fraction_ok && empty_ok,
          "mean OOB fraction " + num(fraction) + " vs " + num(expected) + "; empty-OOB fraction " + num(observed) +
              " vs 0.63^10 = " + num(target) + " (3 SE = " + num(3 * se) + ")"};
}

// ------------------------------------------------------------ quantile and importance
Outcome quantile_vi() {
  std::size_t bad = 0, checks = 0;
  // Order statistic rule on every permutation of small vectors (with ties).
  for (std::size_t B = 1; B <= 6; ++B) {
    for (int with_ties = 0; with_ties < 2; ++with_ties) {
      std::vector<double> v(B);
      for (std::size_t k = 0; k < B; ++k) v[k] = with_ties ? static_cast<double>(k / 2) : 10.0 + k;
      std::sort(v.begin(), v.end());
      const std::vector<double> sorted = v;
      do {
        for (std::size_t pct = 1; pct < 100; ++pct) {
          ++checks;
          const std::size_t rank = std::max<std::size_t>(1, oracle::rank_for(B, pct, 100));
          if (fc::empirical_quantile(v, pct / 100.0) != sorted[rank - 1]) ++bad;
        }
        ++checks;
        if (fc::empirical_quantile(v, 1.0 - 0.1) != sorted[oracle::rank_for(B, 9, 10) - 1]) ++bad;
      } while (std::next_permutation(v.begin(), v.end()));
    }
  }
  const std::size_t quantile_bad = bad;

  // Importance replicates are nonnegative on trained ensembles, both rules.
  const Study& s = study();
  const fc::Ensemble e = fc::train_ensemble(s.train, 60, s.params, 1234, hardware_threads());
  std::size_t negative = 0;
  for (const fc::ViMatrix& vi : {fc::impurity_vi_matrix(e, s.train), fc::permutation_importance(e, s.train, 77)}) {
    fc::BootstrapConfig cfg;
    cfg.B = 200;
    cfg.seed = 99;
    const auto est = fc::bootstrap_vi_quantile(vi, cfg);
    for (double r : est.replicates) negative += r < 0.0;
    negative += est.q_hat < 0.0;
  }

  // Identical rows: zero quantile in all three modes.
  const oracle::Table same(12, std::vector<double>{1.5, -0.25, 7.0, 3.3});
  const auto pred = to_pred(same, {0.5, 0.1, 6.0, 2.9});
  fc::BootstrapConfig cfg;
  cfg.B = 100;
  cfg.seed = 4;
  fc::ViMatrix vi;
  vi.values = fc::Matrix<double>(12, 4);
  for (std::size_t i = 0; i < 12; ++i)
    for (std::size_t l = 0; l < 4; ++l) vi.values(i, l) = same[i][l];
  const double q_h = fc::bootstrap_mse_quantile(pred, cfg).q_hat;
  const double q_o = fc::bootstrap_mse_quantile_oob(pred, fc::Matrix<std::uint8_t>(12, 4, 1), cfg, 4).q_hat;
  const double q_v = fc::bootstrap_vi_quantile(vi, cfg).q_hat;
  const bool identical_ok = q_h == 0.0 && q_o == 0.0 && q_v == 0.0;

  // extrapolate(4t) = extrapolate(t) / 2 exactly.
  std::size_t power_bad = 0;
  for (auto mode : {fc::EstimateMode::holdout, fc::EstimateMode::oob, fc::EstimateMode::vi}) {
    fc::ConvergenceEstimate est;
    est.mode = mode;
    est.t0 = 137;
    est.q_hat = 0.0123456789;
    est.effective_t0 = mode == fc::EstimateMode::oob ? fc::expected_oob_fraction(300) * 137 : 137;
    for (std::size_t t = 137; t < 20000; t += 97) power_bad += fc::extrapolate(est, 4 * t) != fc::extrapolate(est, t) / 2;
  }

  const bool ok = quantile_bad == 0 && negative == 0 && identical_ok && power_bad == 0;
  return {ok, std::to_string(checks) + " quantile checks (" + std::to_string(quantile_bad) + " bad); " +
                  std::to_string(negative) + " negative importance replicates; identical-row q_hat " + num(q_h) +
                  "/" + num(q_o) + "/" + num(q_v) + "; " + std::to_string(power_bad) + " power-law mismatches"};
}

// ------------------------------------------------------------ thread determinism
int run_cli(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string(FORESTCONV_CLI_PATH) + " " + args + " > " + log.string() + " 2>&1";
  return std::system(cmd.c_str());
}

std::vector<fs::path> json_files(const fs::path& dir) {
  std::vector<fs::path> out;
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (entry.path().extension() == ".json" && entry.path().filename() != "manifest.json") {
      out.push_back(fs::relative(entry.path(), dir));
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

Outcome thread_determinism() {
  const fs::path root = fs::temp_directory_path() / ("forestconv_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(root);
  fs::create_directories(root);
  fc::SyntheticSpec spec;
  spec.generator = fc::Generator::friedman1;
  spec.n = 240;
  spec.seed = 42;
  const std::string data = (root / "data.csv").string();
  fc::write_csv(fc::generate_synthetic(spec), data);

  auto commands = [&](const fs::path& out, int threads) {
    const std::string th = " --threads " + std::to_string(threads) + " --seed 7 --output-dir ";
    const std::string o = out.string();
    return std::vector<std::string>{
        "split --input " + data + " --label y --train-frac 0.6 --holdout-ratio 0.2" + th + o + "/split",
        "train --input " + o + "/split/train.csv --label y --t 40 --predict " + o +
            "/split/holdout.csv --vi-rule permutation" + th + o + "/train",
        "convergence --input " + o + "/split/train.csv --label y --mode oob --t0 40 --t-final 200 --epsilon 0.5" +
            th + o + "/conv_oob",
        "convergence --input " + o + "/split/train.csv --label y --mode holdout --holdout " + o +
            "/split/holdout.csv --t0 40 --t-final 200" + th + o + "/conv_holdout",
        "convergence --predictions " + o + "/train/predictions.bin --mode holdout --t-final 200" + th + o +
            "/conv_pred",
        "convergence --input " + o + "/split/train.csv --label y --ensemble " + o +
            "/train/ensemble.json --mode oob --t-final 200" + th + o + "/conv_ens",
        "vi-convergence --input " + o + "/split/train.csv --label y --vi-rule impurity --t0 40 --t-final 200" + th +
            o + "/vi_imp",
        "vi-convergence --input " + o + "/split/train.csv --label y --vi-rule permutation --t0 40 --t-final 200" +
            th + o + "/vi_perm",
        "vi-convergence --vi-matrix " + o + "/train/vi_permutation.bin --t-final 200" + th + o + "/vi_mat",
        "extrapolate --estimate " + o + "/conv_oob/convergence.json --t-final 300" + th + o + "/extrap",
        "recommend-size --estimate " + o + "/conv_oob/convergence.json --epsilon 0.1" + th + o + "/recommend",
        "oracle --generator friedman1 --n 120 --n-eval 200 --runs 6 --t-max 40 --keep-paths" + th + o + "/oracle",
        "oracle --generator friedman1 --n 120 --runs 4 --t-max 20 --kind vi --vi-rule permutation" + th + o +
            "/oracle_vi",
        "coverage --generator friedman1 --n 120 --n-eval 200 --runs 20 --t-check 20 --B 30 --oracle-report " + o +
            "/oracle/oracle.json" + th + o + "/coverage",
    };
  };
  const fs::path one = root / "t1", eight = root / "t8";
  std::size_t failed_runs = 0;
  for (const auto& [dir, threads] : {std::pair{one, 1}, std::pair{eight, 8}}) {
    fs::create_directories(dir);
    std::size_t k = 0;
    for (const auto& cmd : commands(dir, threads)) {
      if (run_cli(cmd, dir / ("log" + std::to_string(k++) + ".txt")) != 0) {
        ++failed_runs;
        std::fprintf(stderr, "command failed: %s\n", cmd.c_str());
      }
    }
  }
  const auto files = json_files(one);
  std::size_t differ = 0;
  for (const auto& rel : files) {
    if (!fs::exists(eight / rel) || fc::read_text_file((one / rel).string()) != fc::read_text_file((eight / rel).string())) {
      ++differ;
      std::fprintf(stderr, "differs: %s\n", rel.string().c_str());
    }
  }
  const bool ok = failed_runs == 0 && differ == 0 && files.size() >= 14 && json_files(eight).size() == files.size();
  if (ok) fs::remove_all(root);
  return {ok, std::to_string(files.size()) + " JSON outputs from 14 commands compared, " + std::to_string(differ) +
                  " differ, " + std::to_string(failed_runs) + " commands failed"};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"1 coverage", coverage},
      {"2 inverse-sqrt decay", decay},
      {"3 extrapolation x4", extrapolation_x4},
      {"4 OOB bias correction", bias_correction},
      {"5 bootstrap oracle equivalence", bootstrap_oracle},
      {"6 scale/shift equivariance", scale_shift},
      {"7 OOB combinatorics", oob_combinatorics},
      {"8 quantile and importance properties", quantile_vi},
      {"9 determinism under threads", thread_determinism},
  };
  int failures = 0;
  for (const auto& [name, check] : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s %s: %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str(), secs);
    std::fflush(stdout);
    failures += !o.pass;
  }
  return failures == 0 ? 0 : 1;
}
