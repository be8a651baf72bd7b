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

// forestconv command-line tool.
//
//   forestconv split          --input d.csv --label y --train-frac 0.5 ...
//   forestconv train          --input train.csv --label y --t 500 ...
//   forestconv convergence    --input train.csv --label y --mode oob ...
//   forestconv vi-convergence --input train.csv --label y --vi-rule impurity
//   forestconv extrapolate    --estimate convergence.json --t-final 2000
//   forestconv recommend-size --estimate convergence.json --epsilon 0.01
//   forestconv oracle         --generator friedman1 --n 300 --runs 50 ...
//   forestconv coverage       --oracle-report oracle.json --generator ...
//
// Every subcommand writes JSON (and CSV curves) into --output-dir, plus a
// manifest.json sidecar holding the wall-clock timestamp and the arguments.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "forestconv/convergence.hpp"
#include "forestconv/data.hpp"
#include "forestconv/forest.hpp"
#include "forestconv/io.hpp"
#include "forestconv/oracle.hpp"
#include "forestconv/random.hpp"

namespace fc = forestconv;
namespace fs = std::filesystem;

namespace {

// Sub-streams of --seed.
constexpr std::uint64_t kBootKey = 0x626f6f74;
constexpr std::uint64_t kPermKey = 0x7065726d;
constexpr std::uint64_t kCoverageKey = 0x636f76;
constexpr std::uint64_t kEvalDataKey = 0x6576616c;

struct Common {
  std::uint64_t seed = 0;
  int threads = 1;
  std::string output_dir = ".";
};

struct DataArgs {
  std::string input;
  std::string label;
  bool no_header = false;
};

struct ForestArgs {
  std::size_t mtry = 0;  // 0 = ceil(p / 3)
  std::size_t min_leaf = 5;
  std::size_t max_depth = 0;  // 0 = unlimited
};

struct BootArgs {
  std::size_t B = 50;
  double alpha = 0.1;
};

struct SynthArgs {
  std::string generator;
  std::size_t n = 300;
  std::size_t n_eval = 300;
  std::size_t p = 10;
  double noise_sd = 1.0;
  std::uint64_t data_seed = 0;
  std::string train_csv;
  std::string eval_csv;
  std::string label;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--seed", c.seed, "Master seed")->capture_default_str();
  cmd->add_option("--threads", c.threads, "Worker threads (output does not depend on it)")
      ->check(CLI::Range(1, 1024))
      ->capture_default_str();
  cmd->add_option("--output-dir", c.output_dir, "Directory for outputs")->capture_default_str();
}

void add_forest(CLI::App* cmd, ForestArgs& f) {
  cmd->add_option("--mtry", f.mtry, "Features tried per split (0 = ceil(p/3))")->capture_default_str();
  cmd->add_option("--min-leaf", f.min_leaf, "Minimum leaf weight")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--max-depth", f.max_depth, "Depth cap (0 = none)")->capture_default_str();
}

void add_boot(CLI::App* cmd, BootArgs& b) {
  cmd->add_option("--B", b.B, "Bootstrap replicates")->check(CLI::Range(1, 100000000))->capture_default_str();
  cmd->add_option("--alpha", b.alpha, "Miss probability")->capture_default_str();
}

void add_synth(CLI::App* cmd, SynthArgs& s) {
  cmd->add_option("--generator", s.generator, "friedman1, linear or constant");
  cmd->add_option("--n", s.n, "Generated training size")->capture_default_str();
  cmd->add_option("--n-eval", s.n_eval, "Generated evaluation size")->capture_default_str();
  cmd->add_option("--p", s.p, "Generated feature count")->capture_default_str();
  cmd->add_option("--noise-sd", s.noise_sd, "Generated noise sd")->capture_default_str();
  cmd->add_option("--data-seed", s.data_seed, "Seed of the generated data")->capture_default_str();
  cmd->add_option("--train", s.train_csv, "Training CSV (instead of --generator)");
  cmd->add_option("--eval", s.eval_csv, "Evaluation CSV (instead of --generator)");
  cmd->add_option("--label", s.label, "Label column of --train/--eval");
}

fc::Dataset load(const DataArgs& d) {
  if (d.input.empty()) throw fc::Error("--input is required");
  if (d.label.empty()) throw fc::Error("--label is required");
  return fc::load_csv(d.input, d.label, !d.no_header);
}

fc::TreeParams tree_params(const ForestArgs& f, std::size_t p) {
  fc::TreeParams params = fc::TreeParams::defaults_for(p);
  if (f.mtry > 0) params.mtry = f.mtry;
  params.min_leaf = f.min_leaf;
  if (f.max_depth > 0) params.max_depth = f.max_depth;
  params.validate(p);
  return params;
}

fc::BootstrapConfig boot_config(const BootArgs& b, const Common& c) {
  fc::BootstrapConfig cfg;
  cfg.B = b.B;
  cfg.alpha = b.alpha;
  cfg.seed = fc::derive_seed(c.seed, kBootKey);
  cfg.threads = c.threads;
  cfg.validate();
  return cfg;
}

std::pair<fc::Dataset, fc::Dataset> study_data(const SynthArgs& s) {
  if (!s.generator.empty()) {
    if (!s.train_csv.empty() || !s.eval_csv.empty()) {
      throw fc::Error("--generator cannot be combined with --train/--eval");
    }
    fc::SyntheticSpec spec;
    spec.generator = fc::parse_generator(s.generator);
    spec.p = s.p;
    spec.noise_sd = s.noise_sd;
    spec.n = s.n;
    spec.seed = s.data_seed;
    fc::Dataset train = fc::generate_synthetic(spec);
    spec.n = s.n_eval;
    spec.seed = fc::derive_seed(s.data_seed, kEvalDataKey);
    return {std::move(train), fc::generate_synthetic(spec)};
  }
  if (s.train_csv.empty() || s.eval_csv.empty()) {
    throw fc::Error("give --generator, or both --train and --eval");
  }
  if (s.label.empty()) throw fc::Error("--label is required with --train/--eval");
  return {fc::load_csv(s.train_csv, s.label), fc::load_csv(s.eval_csv, s.label)};
}

std::string out_path(const Common& c, const std::string& name) {
  return (fs::path(c.output_dir) / name).string();
}

void prepare_output(const Common& c) {
  std::error_code ec;
  fs::create_directories(c.output_dir, ec);
  if (ec || !fs::is_directory(c.output_dir)) {
    throw fc::Error("cannot create output directory '" + c.output_dir + "'");
  }
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_manifest(const Common& c, const std::string& command,
                    const std::vector<std::string>& argv, const fc::Json& extra) {
  fc::Json m;
  m["command"] = command;
  m["arguments"] = argv;
  m["seed"] = c.seed;
  m["threads"] = c.threads;
  m["timestamp"] = utc_timestamp();
  for (const auto& item : extra.items()) m[item.key()] = item.value();
  fc::write_json(out_path(c, "manifest.json"), m);
}

// Extrapolated curve from the first integer of the estimate's domain to t_final.
void write_extrapolation_curve(const fc::ConvergenceEstimate& est, std::size_t t_final,
                               const std::string& path) {
  const auto first = static_cast<std::size_t>(std::ceil(est.domain_start()));
  if (t_final < first) {
    throw fc::Error("--t-final " + std::to_string(t_final) + " lies below the extrapolation domain start " +
                    std::to_string(first));
  }
  std::vector<std::size_t> ts;
  std::vector<double> values;
  for (std::size_t t = first; t <= t_final; ++t) {
    ts.push_back(t);
    values.push_back(fc::extrapolate(est, t));
  }
  fc::write_text_file(path, fc::curve_csv(ts, values, "q_ext"));
}

fc::Json estimate_report(const fc::ConvergenceEstimate& est, std::optional<double> epsilon,
                         std::size_t t_final) {
  fc::Json j = fc::to_json(est);
  j["t_final"] = t_final;
  j["q_ext_t_final"] = fc::extrapolate(est, std::max<std::size_t>(
                                                t_final, static_cast<std::size_t>(std::ceil(est.domain_start()))));
  if (epsilon) {
    j["epsilon"] = *epsilon;
    j["recommended_size"] = fc::recommend_size(est, *epsilon);
  }
  return j;
}

void print_estimate(const fc::ConvergenceEstimate& est, const fc::Json& report) {
  std::printf("mode %s  t0 %zu  effective_t0 %s  q_hat(%s) %s\n", fc::to_string(est.mode).c_str(),
              est.t0, fc::format_real(est.effective_t0).c_str(),
              fc::format_real(1.0 - est.alpha).c_str(), fc::format_real(est.q_hat).c_str());
  if (report.contains("recommended_size")) {
    std::printf("recommended size for epsilon %s: %zu\n",
                fc::format_real(report.at("epsilon").get<double>()).c_str(),
                report.at("recommended_size").get<std::size_t>());
  }
}

// ---------------------------------------------------------------- split
struct SplitArgs {
  Common common;
  DataArgs data;
  double train_frac = 0.5;
  double holdout_ratio = 0.0;
};

void run_split(const SplitArgs& a) {
  const fc::Dataset d = load(a.data);
  const fc::Partition part = fc::split_dataset(d.n(), a.train_frac, a.holdout_ratio, a.common.seed);
  prepare_output(a.common);
  fc::write_csv(d.subset(part.train), out_path(a.common, "train.csv"));
  fc::write_csv(d.subset(part.holdout), out_path(a.common, "holdout.csv"));
  fc::write_csv(d.subset(part.test), out_path(a.common, "test.csv"));
  fc::write_json(out_path(a.common, "partition.json"), fc::to_json(part));
  std::printf("train %zu  holdout %zu  test %zu\n", part.train.size(), part.holdout.size(),
              part.test.size());
}

// ---------------------------------------------------------------- train
struct TrainArgs {
  Common common;
  DataArgs data;
  ForestArgs forest;
  std::size_t t = 500;
  std::string predict_csv;
  std::string vi_rule;
};

void run_train(const TrainArgs& a) {
  const fc::Dataset d = load(a.data);
  const fc::TreeParams params = tree_params(a.forest, d.p());
  std::optional<fc::ViRule> rule;
  if (!a.vi_rule.empty()) rule = fc::parse_vi_rule(a.vi_rule);
  std::optional<fc::Dataset> target;
  if (!a.predict_csv.empty()) target = fc::load_csv(a.predict_csv, a.data.label, !a.data.no_header);
  prepare_output(a.common);

  const fc::Ensemble e = fc::train_ensemble(d, a.t, params, a.common.seed, a.common.threads);
  fc::write_json(out_path(a.common, "ensemble.json"), fc::to_json(e));
  if (target) {
    fc::write_prediction_matrix(fc::predict_matrix(e, *target, a.common.threads),
                                out_path(a.common, "predictions.bin"));
  }
  if (rule) {
    const fc::ViMatrix vi =
        *rule == fc::ViRule::impurity
            ? fc::impurity_vi_matrix(e, d, a.common.threads)
            : fc::permutation_importance(e, d, fc::derive_seed(a.common.seed, kPermKey), a.common.threads);
    fc::write_vi_matrix(vi, out_path(a.common, "vi_" + fc::to_string(*rule) + ".bin"));
  }
  std::size_t leaves = 0;
  for (const auto& tree : e.trees) leaves += tree.num_leaves();
  std::printf("trained %zu trees on n=%zu p=%zu, mean leaves %s\n", e.size(), d.n(), d.p(),
              fc::format_real(static_cast<double>(leaves) / static_cast<double>(e.size())).c_str());
}

// ---------------------------------------------------------------- convergence
struct ConvergenceArgs {
  Common common;
  DataArgs data;
  ForestArgs forest;
  BootArgs boot;
  std::string mode = "oob";
  std::size_t t0 = 500;
  std::size_t t_final = 2000;
  std::optional<double> epsilon;
  std::string holdout_csv;
  std::string ensemble_json;
  std::string predictions_bin;
};

void run_convergence(const ConvergenceArgs& a) {
  const fc::EstimateMode mode = fc::parse_estimate_mode(a.mode);
  if (mode == fc::EstimateMode::vi) throw fc::Error("use the vi-convergence subcommand for importance");
  if (a.epsilon && !(*a.epsilon > 0.0)) throw fc::Error("--epsilon must be positive");
  const fc::BootstrapConfig cfg = boot_config(a.boot, a.common);

  fc::ConvergenceEstimate est;
  if (!a.predictions_bin.empty()) {
    if (mode == fc::EstimateMode::oob) {
      throw fc::Error("oob mode needs the training data and bags; --predictions holds hold-out predictions only");
    }
    const fc::PredictionMatrix pred = fc::read_prediction_matrix(a.predictions_bin);
    if (pred.trees() < 2) throw fc::Error("t0 must be at least 2");
    prepare_output(a.common);
    est = fc::bootstrap_mse_quantile(pred, cfg);
  } else {
    if (mode == fc::EstimateMode::holdout && a.holdout_csv.empty()) {
      throw fc::Error("holdout mode needs --holdout (hold-out CSV) or --predictions");
    }
    const fc::Dataset d = load(a.data);
    fc::Ensemble e;
    if (!a.ensemble_json.empty()) {
      e = fc::ensemble_from_json(fc::read_json(a.ensemble_json));
      if (e.num_train() != d.n()) throw fc::Error("--ensemble was trained on a different number of rows");
    } else {
      if (a.t0 < 2) throw fc::Error("t0 must be at least 2");
      e = fc::train_ensemble(d, a.t0, tree_params(a.forest, d.p()), a.common.seed, a.common.threads);
    }
    if (e.size() < 2) throw fc::Error("t0 must be at least 2");
    if (mode == fc::EstimateMode::holdout) {
      const fc::Dataset h = fc::load_csv(a.holdout_csv, a.data.label, !a.data.no_header);
      prepare_output(a.common);
      est = fc::bootstrap_mse_quantile(fc::predict_matrix(e, h, a.common.threads), cfg);
    } else {
      prepare_output(a.common);
      est = fc::bootstrap_mse_quantile_oob(fc::predict_matrix(e, d, a.common.threads),
                                           fc::oob_structure(e).mask, cfg, d.n());
    }
  }
  const fc::Json report = estimate_report(est, a.epsilon, a.t_final);
  fc::write_json(out_path(a.common, "convergence.json"), report);
  write_extrapolation_curve(est, a.t_final, out_path(a.common, "convergence_curve.csv"));
  print_estimate(est, report);
}

// ---------------------------------------------------------------- vi-convergence
struct ViConvergenceArgs {
  Common common;
  DataArgs data;
  ForestArgs forest;
  BootArgs boot;
  std::string vi_rule = "impurity";
  std::size_t t0 = 500;
  std::size_t t_final = 2000;
  std::optional<double> epsilon;
  std::string vi_matrix;
};

void run_vi_convergence(const ViConvergenceArgs& a) {
  if (a.epsilon && !(*a.epsilon > 0.0)) throw fc::Error("--epsilon must be positive");
  const fc::BootstrapConfig cfg = boot_config(a.boot, a.common);
  fc::ViMatrix vi;
  if (!a.vi_matrix.empty()) {
    vi = fc::read_vi_matrix(a.vi_matrix);
  } else {
    const fc::ViRule rule = fc::parse_vi_rule(a.vi_rule);
    const fc::Dataset d = load(a.data);
    if (a.t0 < 2) throw fc::Error("t0 must be at least 2");
    const fc::Ensemble e =
        fc::train_ensemble(d, a.t0, tree_params(a.forest, d.p()), a.common.seed, a.common.threads);
    vi = rule == fc::ViRule::impurity
             ? fc::impurity_vi_matrix(e, d, a.common.threads)
             : fc::permutation_importance(e, d, fc::derive_seed(a.common.seed, kPermKey), a.common.threads);
  }
  prepare_output(a.common);
  const fc::ConvergenceEstimate est = fc::bootstrap_vi_quantile(vi, cfg);
  fc::Json report = estimate_report(est, a.epsilon, a.t_final);
  report["vi_rule"] = fc::to_string(vi.rule);
  report["empty_oob_trees"] = vi.empty_oob_trees;
  std::vector<double> mean(vi.variables(), 0.0);
  for (std::size_t i = 0; i < vi.trees(); ++i)
    for (std::size_t l = 0; l < vi.variables(); ++l) mean[l] += vi.values(i, l);
  for (double& m : mean) m /= static_cast<double>(vi.trees());
  report["vi_mean"] = mean;
  fc::write_json(out_path(a.common, "vi_convergence.json"), report);
  write_extrapolation_curve(est, a.t_final, out_path(a.common, "vi_convergence_curve.csv"));
  print_estimate(est, report);
}

// ---------------------------------------------------------------- extrapolate
struct ExtrapolateArgs {
  Common common;
  std::string estimate;
  std::vector<std::size_t> ts;
  std::size_t t_final = 2000;
  bool uncorrected = false;
};

void run_extrapolate(const ExtrapolateArgs& a) {
  if (a.estimate.empty()) throw fc::Error("--estimate is required");
  const fc::ConvergenceEstimate est = fc::estimate_from_json(fc::read_json(a.estimate));
  std::vector<std::size_t> ts = a.ts;
  if (ts.empty()) {
    const auto first = static_cast<std::size_t>(std::ceil(est.domain_start()));
    if (a.t_final < first) throw fc::Error("--t-final lies below the extrapolation domain start");
    for (std::size_t t = first; t <= a.t_final; ++t) ts.push_back(t);
  }
  std::vector<double> values;
  for (std::size_t t : ts) {
    values.push_back(a.uncorrected ? fc::extrapolate_uncorrected(est, t) : fc::extrapolate(est, t));
  }
  prepare_output(a.common);
  fc::Json j;
  j["mode"] = fc::to_string(est.mode);
  j["t0"] = est.t0;
  j["effective_t0"] = est.effective_t0;
  j["q_hat"] = est.q_hat;
  j["rule"] = a.uncorrected ? "uncorrected" : "corrected";
  j["t"] = ts;
  j["q_ext"] = values;
  fc::write_json(out_path(a.common, "extrapolation.json"), j);
  fc::write_text_file(out_path(a.common, "extrapolation.csv"), fc::curve_csv(ts, values, "q_ext"));
  std::printf("%zu points, q_ext(%zu) = %s\n", ts.size(), ts.back(), fc::format_real(values.back()).c_str());
}

// ---------------------------------------------------------------- recommend-size
struct RecommendArgs {
  Common common;
  std::string estimate;
  double epsilon = 0.0;
};

void run_recommend(const RecommendArgs& a) {
  if (!(a.epsilon > 0.0)) throw fc::Error("--epsilon must be positive");
  if (a.estimate.empty()) throw fc::Error("--estimate is required");
  const fc::ConvergenceEstimate est = fc::estimate_from_json(fc::read_json(a.estimate));
  const std::size_t t = fc::recommend_size(est, a.epsilon);
  prepare_output(a.common);
  fc::Json j;
  j["mode"] = fc::to_string(est.mode);
  j["t0"] = est.t0;
  j["effective_t0"] = est.effective_t0;
  j["q_hat"] = est.q_hat;
  j["epsilon"] = a.epsilon;
  j["recommended_size"] = t;
  j["q_ext_at_recommended"] = fc::extrapolate(est, t);
  fc::write_json(out_path(a.common, "recommendation.json"), j);
  std::printf("recommended size %zu\n", t);
}

// ---------------------------------------------------------------- oracle
struct OracleArgs {
  Common common;
  SynthArgs synth;
  ForestArgs forest;
  std::size_t runs = 100;
  std::size_t t_max = 400;
  std::vector<std::size_t> t_grid;
  double alpha = 0.1;
  std::string kind = "mse";
  std::string vi_rule = "impurity";
  bool keep_paths = false;
};

void run_oracle(const OracleArgs& a) {
  if (a.runs < 2) throw fc::Error("--runs must be at least 2");
  if (a.kind != "mse" && a.kind != "vi") throw fc::Error("--kind must be mse or vi");
  const auto [train, eval] = study_data(a.synth);
  fc::OracleConfig cfg;
  cfg.params = tree_params(a.forest, train.p());
  cfg.runs = a.runs;
  cfg.t_grid = a.t_grid;
  cfg.t_max = a.t_max;
  cfg.alpha = a.alpha;
  cfg.seed = a.common.seed;
  cfg.keep_paths = a.keep_paths;
  cfg.threads = a.common.threads;
  const fc::ViRule rule = fc::parse_vi_rule(a.vi_rule);
  prepare_output(a.common);
  const fc::OracleReport rep = a.kind == "mse" ? fc::true_quantile_curve(train, eval, cfg)
                                               : fc::true_vi_quantile_curve(train, rule, cfg);
  fc::Json j = fc::to_json(rep);
  if (a.kind == "vi") j["vi_rule"] = fc::to_string(rule);
  fc::write_json(out_path(a.common, "oracle.json"), j);
  fc::write_text_file(out_path(a.common, "oracle_curve.csv"),
                      fc::curve_csv(rep.curve.ts, rep.curve.values, "q_true"));
  std::printf("%zu runs x %zu trees, %s curve at t=%zu: %s\n", rep.runs, rep.t_max,
              fc::to_string(rep.curve.kind).c_str(), rep.curve.ts.back(),
              fc::format_real(rep.curve.values.back()).c_str());
}

// ---------------------------------------------------------------- coverage
struct CoverageArgs {
  Common common;
  SynthArgs synth;
  ForestArgs forest;
  BootArgs boot;
  std::string oracle_report;
  std::size_t runs = 100;
  std::size_t t_check = 200;
  std::string mode = "oob";
  std::string holdout_csv;
};

void run_coverage(const CoverageArgs& a) {
  if (a.oracle_report.empty()) throw fc::Error("--oracle-report is required");
  if (a.runs < 20) throw fc::Error("--runs must be at least 20");
  const fc::OracleReport rep = fc::oracle_report_from_json(fc::read_json(a.oracle_report));
  const auto [train, eval] = study_data(a.synth);
  fc::RunStudyConfig cfg;
  cfg.params = tree_params(a.forest, train.p());
  cfg.runs = a.runs;
  cfg.t = a.t_check;
  cfg.mode = fc::parse_estimate_mode(a.mode);
  cfg.bootstrap = boot_config(a.boot, a.common);
  cfg.seed = fc::derive_seed(a.common.seed, kCoverageKey);
  cfg.threads = a.common.threads;
  std::optional<fc::Dataset> holdout;
  if (cfg.mode == fc::EstimateMode::holdout) {
    if (a.holdout_csv.empty()) throw fc::Error("holdout mode needs --holdout");
    holdout = fc::load_csv(a.holdout_csv, a.synth.label.empty() ? "y" : a.synth.label);
    cfg.holdout = &*holdout;
  }
  prepare_output(a.common);
  const fc::CoverageReport cov = fc::coverage_check(train, eval, rep, cfg);
  fc::write_json(out_path(a.common, "coverage.json"), fc::to_json(cov));
  std::printf("coverage %s over %zu runs at t=%zu (target %s)\n", fc::format_real(cov.coverage).c_str(),
              cov.runs, cov.t_check, fc::format_real(1.0 - cov.alpha).c_str());
}

void add_data(CLI::App* cmd, DataArgs& d) {
  cmd->add_option("--input", d.input, "Training CSV");
  cmd->add_option("--label", d.label, "Label column: header name or 1-based index");
  cmd->add_flag("--no-header", d.no_header, "CSV has no header row");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"forestconv: convergence estimates for bagged regression forests"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  SplitArgs split;
  auto* c_split = app.add_subcommand("split", "Partition a CSV into train / hold-out / test");
  add_common(c_split, split.common);
  c_split->add_option("--input", split.data.input, "Input CSV")->required();
  c_split->add_option("--label", split.data.label, "Label column")->required();
  c_split->add_flag("--no-header", split.data.no_header, "CSV has no header row");
  c_split->add_option("--train-frac", split.train_frac, "Training fraction")->capture_default_str();
  c_split->add_option("--holdout-ratio", split.holdout_ratio, "|H| / (|H| + |train|)")->capture_default_str();

  TrainArgs train;
  auto* c_train = app.add_subcommand("train", "Train an ensemble");
  add_common(c_train, train.common);
  add_data(c_train, train.data);
  add_forest(c_train, train.forest);
  c_train->add_option("--t", train.t, "Number of trees")->check(CLI::PositiveNumber)->capture_default_str();
  c_train->add_option("--predict", train.predict_csv, "CSV to predict on (writes predictions.bin)");
  c_train->add_option("--vi-rule", train.vi_rule, "Also write an importance matrix: impurity or permutation");

  ConvergenceArgs conv;
  auto* c_conv = app.add_subcommand("convergence", "Bootstrap estimate of the MSE convergence quantile");
  add_common(c_conv, conv.common);
  add_data(c_conv, conv.data);
  add_forest(c_conv, conv.forest);
  add_boot(c_conv, conv.boot);
  c_conv->add_option("--mode", conv.mode, "holdout or oob")->capture_default_str();
  c_conv->add_option("--t0", conv.t0, "Initial ensemble size")->capture_default_str();
  c_conv->add_option("--t-final", conv.t_final, "Last size of the extrapolated curve")->capture_default_str();
  c_conv->add_option("--epsilon", conv.epsilon, "Tolerance for the recommended size");
  c_conv->add_option("--holdout", conv.holdout_csv, "Hold-out CSV (holdout mode)");
  c_conv->add_option("--ensemble", conv.ensemble_json, "Use a trained ensemble instead of training");
  c_conv->add_option("--predictions", conv.predictions_bin, "Hold-out prediction matrix (holdout mode)");

  ViConvergenceArgs vic;
  auto* c_vi = app.add_subcommand("vi-convergence", "Bootstrap estimate of the importance convergence quantile");
  add_common(c_vi, vic.common);
  add_data(c_vi, vic.data);
  add_forest(c_vi, vic.forest);
  add_boot(c_vi, vic.boot);
  c_vi->add_option("--vi-rule", vic.vi_rule, "impurity or permutation")->capture_default_str();
  c_vi->add_option("--t0", vic.t0, "Initial ensemble size")->capture_default_str();
  c_vi->add_option("--t-final", vic.t_final, "Last size of the extrapolated curve")->capture_default_str();
  c_vi->add_option("--epsilon", vic.epsilon, "Tolerance for the recommended size");
  c_vi->add_option("--vi-matrix", vic.vi_matrix, "Use a stored importance matrix");

  ExtrapolateArgs ext;
  auto* c_ext = app.add_subcommand("extrapolate", "Extrapolate a stored estimate to larger ensembles");
  add_common(c_ext, ext.common);
  c_ext->add_option("--estimate", ext.estimate, "Estimate JSON")->required();
  c_ext->add_option("--t", ext.ts, "Target sizes (default: every size up to --t-final)");
  c_ext->add_option("--t-final", ext.t_final, "Last size")->capture_default_str();
  c_ext->add_flag("--uncorrected", ext.uncorrected, "Scale with t0 even in oob mode");

  RecommendArgs rec;
  auto* c_rec = app.add_subcommand("recommend-size", "Smallest ensemble size meeting a tolerance");
  add_common(c_rec, rec.common);
  c_rec->add_option("--estimate", rec.estimate, "Estimate JSON")->required();
  c_rec->add_option("--epsilon", rec.epsilon, "Tolerance")->required();

  OracleArgs ora;
  auto* c_ora = app.add_subcommand("oracle", "Monte Carlo ground-truth quantile curve");
  add_common(c_ora, ora.common);
  add_synth(c_ora, ora.synth);
  add_forest(c_ora, ora.forest);
  c_ora->add_option("--runs", ora.runs, "Independent ensembles")->capture_default_str();
  c_ora->add_option("--t-max", ora.t_max, "Trees per run")->capture_default_str();
  c_ora->add_option("--t-grid", ora.t_grid, "Sizes on the curve (default 25, 50, ..., t-max)");
  c_ora->add_option("--alpha", ora.alpha, "Miss probability")->capture_default_str();
  c_ora->add_option("--kind", ora.kind, "mse or vi")->capture_default_str();
  c_ora->add_option("--vi-rule", ora.vi_rule, "impurity or permutation (kind vi)")->capture_default_str();
  c_ora->add_flag("--keep-paths", ora.keep_paths, "Store per-run gap paths in the report");

  CoverageArgs cov;
  auto* c_cov = app.add_subcommand("coverage", "Empirical coverage of the bootstrap quantile");
  add_common(c_cov, cov.common);
  add_synth(c_cov, cov.synth);
  add_forest(c_cov, cov.forest);
  add_boot(c_cov, cov.boot);
  c_cov->add_option("--oracle-report", cov.oracle_report, "Report from the oracle subcommand");
  c_cov->add_option("--runs", cov.runs, "Independent ensembles")->capture_default_str();
  c_cov->add_option("--t-check", cov.t_check, "Ensemble size checked")->capture_default_str();
  c_cov->add_option("--mode", cov.mode, "oob or holdout")->capture_default_str();
  c_cov->add_option("--holdout", cov.holdout_csv, "Hold-out CSV (holdout mode)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::fprintf(stderr, "forestconv: error: %s (see --help)\n", e.what());
    return e.get_exit_code() != 0 ? e.get_exit_code() : 2;
  }

  const std::vector<std::string> args(argv + 1, argv + argc);
  try {
    std::string command;
    const Common* common = nullptr;
    if (c_split->parsed()) { run_split(split); command = "split"; common = &split.common; }
    if (c_train->parsed()) { run_train(train); command = "train"; common = &train.common; }
    if (c_conv->parsed()) { run_convergence(conv); command = "convergence"; common = &conv.common; }
    if (c_vi->parsed()) { run_vi_convergence(vic); command = "vi-convergence"; common = &vic.common; }
    if (c_ext->parsed()) { run_extrapolate(ext); command = "extrapolate"; common = &ext.common; }
    if (c_rec->parsed()) { run_recommend(rec); command = "recommend-size"; common = &rec.common; }
    if (c_ora->parsed()) { run_oracle(ora); command = "oracle"; common = &ora.common; }
    if (c_cov->parsed()) { run_coverage(cov); command = "coverage"; common = &cov.common; }
    write_manifest(*common, command, args, fc::Json::object());
  } catch (const std::exception& e) {
    std::string msg = e.what();
    for (char& ch : msg) if (ch == '\n') ch = ' ';
    std::fprintf(stderr, "forestconv: error: %s\n", msg.c_str());
    return 1;
  }
  return 0;
}
