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

#include "forestconv/io.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

namespace forestconv {

namespace {

using Magic = std::array<char, 8>;
constexpr Magic kPredMagic{'F', 'C', 'P', 'R', 'E', 'D', '\0', '\1'};
constexpr Magic kViImpurityMagic{'F', 'C', 'V', 'I', 'I', 'M', 'P', '\1'};
constexpr Magic kViPermutationMagic{'F', 'C', 'V', 'I', 'P', 'R', 'M', '\1'};

void put_u32(std::string& out, std::uint32_t v) {
  for (int k = 0; k < 4; ++k) out.push_back(static_cast<char>((v >> (8 * k)) & 0xFF));
}

void put_f64(std::string& out, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  for (int k = 0; k < 8; ++k) out.push_back(static_cast<char>((bits >> (8 * k)) & 0xFF));
}

class Reader {
 public:
  Reader(std::string bytes, std::string path)
      : bytes_(std::move(bytes)), path_(std::move(path)) {}

  void need(std::size_t count) const {
    if (pos_ + count > bytes_.size()) throw Error("'" + path_ + "' is truncated");
  }
  Magic magic() {
    need(8);
    Magic m{};
    std::memcpy(m.data(), bytes_.data() + pos_, 8);
    pos_ += 8;
    return m;
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int k = 0; k < 4; ++k) {
      v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes_[pos_ + k])) << (8 * k);
    }
    pos_ += 4;
    return v;
  }
  double f64() {
    need(8);
    std::uint64_t bits = 0;
    for (int k = 0; k < 8; ++k) {
      bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_ + k])) << (8 * k);
    }
    pos_ += 8;
    return std::bit_cast<double>(bits);
  }
  void expect_end() const {
    if (pos_ != bytes_.size()) throw Error("'" + path_ + "' has trailing bytes");
  }

 private:
  std::string bytes_;
  std::string path_;
  std::size_t pos_ = 0;
};

std::string matrix_bytes(const Magic& magic, const Matrix<double>& values) {
  std::string out(magic.begin(), magic.end());
  put_u32(out, static_cast<std::uint32_t>(values.rows()));
  put_u32(out, static_cast<std::uint32_t>(values.cols()));
  for (double v : values.data()) put_f64(out, v);
  return out;
}

Matrix<double> read_matrix_body(Reader& in) {
  const std::uint32_t rows = in.u32();
  const std::uint32_t cols = in.u32();
  in.need(static_cast<std::size_t>(rows) * cols * 8);
  Matrix<double> m(rows, cols);
  for (double& v : m.data()) v = in.f64();
  return m;
}

void hash_bytes(std::uint64_t& h, const void* data, std::size_t size) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t k = 0; k < size; ++k) {
    h ^= p[k];
    h *= 0x100000001B3ULL;
  }
}

void hash_dataset(std::uint64_t& h, const Dataset& d) {
  const std::uint64_t shape[2] = {d.n(), d.p()};
  hash_bytes(h, shape, sizeof(shape));
  for (double v : d.features.data()) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    hash_bytes(h, &bits, 8);
  }
  for (double v : d.labels) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    hash_bytes(h, &bits, 8);
  }
}

std::string hex64(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

constexpr std::uint64_t kFnvOffset = 0xCBF29CE484222325ULL;

}  // namespace

std::string format_real(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw Error("cannot format number");
  return std::string(buf, ptr);
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw Error("failed writing '" + path + "'");
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_json(const std::string& path, const Json& doc) {
  write_text_file(path, doc.dump(2) + "\n");
}

Json read_json(const std::string& path) {
  try {
    return Json::parse(read_text_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw Error("'" + path + "' is not valid JSON: " + e.what());
  }
}

std::string content_hash(const Dataset& data) {
  std::uint64_t h = kFnvOffset;
  hash_dataset(h, data);
  return hex64(h);
}

std::string content_hash(const Dataset& a, const Dataset& b) {
  std::uint64_t h = kFnvOffset;
  hash_dataset(h, a);
  hash_dataset(h, b);
  return hex64(h);
}

Json to_json(const TreeParams& params) {
  Json j;
  j["mtry"] = params.mtry;
  j["min_leaf"] = params.min_leaf;
  j["max_depth"] = params.max_depth ? Json(*params.max_depth) : Json(nullptr);
  return j;
}

TreeParams tree_params_from_json(const Json& j) {
  TreeParams params;
  params.mtry = j.at("mtry").get<std::size_t>();
  params.min_leaf = j.at("min_leaf").get<std::size_t>();
  if (j.contains("max_depth") && !j.at("max_depth").is_null()) {
    params.max_depth = j.at("max_depth").get<std::size_t>();
  }
  return params;
}

Json to_json(const Partition& part) {
  Json j;
  j["seed"] = part.seed;
  j["train"] = part.train;
  j["holdout"] = part.holdout;
  j["test"] = part.test;
  return j;
}

Json to_json(const RegressionTree& tree) {
  Json nodes = Json::array();
  for (const TreeNode& node : tree.nodes()) {
    Json n;
    if (node.is_leaf()) {
      n["value"] = node.value;
      n["count"] = node.weight;
    } else {
      n["split_var"] = node.split_var;
      n["threshold"] = node.threshold;
      n["left"] = node.left;
      n["right"] = node.right;
      n["value"] = node.value;
      n["count"] = node.weight;
    }
    nodes.push_back(std::move(n));
  }
  return nodes;
}

RegressionTree tree_from_json(const Json& j) {
  std::vector<TreeNode> nodes;
  for (const auto& n : j) {
    TreeNode node;
    node.value = n.at("value").get<double>();
    node.weight = n.at("count").get<std::uint32_t>();
    if (n.contains("split_var")) {
      node.split_var = n.at("split_var").get<std::int32_t>();
      node.threshold = n.at("threshold").get<double>();
      node.left = n.at("left").get<std::int32_t>();
      node.right = n.at("right").get<std::int32_t>();
    }
    nodes.push_back(node);
  }
  return RegressionTree(std::move(nodes));
}

Json to_json(const Ensemble& ensemble) {
  Json j;
  j["master_seed"] = ensemble.master_seed;
  j["params"] = to_json(ensemble.params);
  j["t"] = ensemble.size();
  j["n"] = ensemble.num_train();
  Json bags = Json::array();
  for (std::size_t i = 0; i < ensemble.size(); ++i) {
    const auto row = ensemble.bag_counts.row(i);
    bags.push_back(std::vector<std::uint32_t>(row.begin(), row.end()));
  }
  j["bag_counts"] = std::move(bags);
  Json trees = Json::array();
  for (const auto& tree : ensemble.trees) trees.push_back(to_json(tree));
  j["trees"] = std::move(trees);
  return j;
}

Ensemble ensemble_from_json(const Json& j) {
  try {
    Ensemble e;
    e.master_seed = j.at("master_seed").get<std::uint64_t>();
    e.params = tree_params_from_json(j.at("params"));
    const auto t = j.at("t").get<std::size_t>();
    const auto n = j.at("n").get<std::size_t>();
    const auto& bags = j.at("bag_counts");
    const auto& trees = j.at("trees");
    if (bags.size() != t || trees.size() != t) throw Error("ensemble JSON has inconsistent sizes");
    e.bag_counts = Matrix<std::uint32_t>(t, n);
    for (std::size_t i = 0; i < t; ++i) {
      const auto row = bags[i].get<std::vector<std::uint32_t>>();
      if (row.size() != n) throw Error("ensemble JSON bag row has wrong length");
      std::copy(row.begin(), row.end(), e.bag_counts.row(i).begin());
      e.trees.push_back(tree_from_json(trees[i]));
    }
    return e;
  } catch (const nlohmann::json::exception& ex) {
    throw Error(std::string("malformed ensemble JSON: ") + ex.what());
  }
}

Json to_json(const ConvergenceEstimate& est) {
  Json j;
  j["mode"] = to_string(est.mode);
  j["t0"] = est.t0;
  j["effective_t0"] = est.effective_t0;
  j["alpha"] = est.alpha;
  j["B"] = est.replicates.size();
  j["q_hat"] = est.q_hat;
  j["replicates"] = est.replicates;
  return j;
}

ConvergenceEstimate estimate_from_json(const Json& j) {
  try {
    ConvergenceEstimate est;
    est.mode = parse_estimate_mode(j.at("mode").get<std::string>());
    est.t0 = j.at("t0").get<std::size_t>();
    est.effective_t0 = j.at("effective_t0").get<double>();
    est.alpha = j.at("alpha").get<double>();
    est.q_hat = j.at("q_hat").get<double>();
    est.replicates = j.at("replicates").get<std::vector<double>>();
    return est;
  } catch (const nlohmann::json::exception& ex) {
    throw Error(std::string("malformed estimate JSON: ") + ex.what());
  }
}

Json to_json(const QuantileCurve& curve) {
  Json j;
  j["kind"] = to_string(curve.kind);
  j["alpha"] = curve.alpha;
  j["t"] = curve.ts;
  j["value"] = curve.values;
  return j;
}

Json to_json(const OracleReport& report) {
  Json j;
  j["kind"] = to_string(report.curve.kind);
  j["runs"] = report.runs;
  j["t_max"] = report.t_max;
  j["seed"] = report.seed;
  j["params"] = to_json(report.params);
  j["input_hash"] = report.input_hash;
  j["mse_inf_hat"] = report.mse_inf_hat;
  j["vi_inf_hat"] = report.vi_inf_hat;
  j["curve"] = to_json(report.curve);
  if (!report.per_run_paths.empty()) {
    Json paths = Json::array();
    for (std::size_t r = 0; r < report.per_run_paths.rows(); ++r) {
      const auto row = report.per_run_paths.row(r);
      paths.push_back(std::vector<double>(row.begin(), row.end()));
    }
    j["per_run_paths"] = std::move(paths);
  }
  return j;
}

OracleReport oracle_report_from_json(const Json& j) {
  try {
    OracleReport r;
    r.runs = j.at("runs").get<std::size_t>();
    r.t_max = j.at("t_max").get<std::size_t>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.params = tree_params_from_json(j.at("params"));
    r.input_hash = j.at("input_hash").get<std::string>();
    r.mse_inf_hat = j.at("mse_inf_hat").get<double>();
    r.vi_inf_hat = j.at("vi_inf_hat").get<std::vector<double>>();
    const auto& c = j.at("curve");
    const auto kind = c.at("kind").get<std::string>();
    if (kind != "mse_gap" && kind != "vi_gap") throw Error("unknown curve kind '" + kind + "'");
    r.curve.kind = kind == "mse_gap" ? GapKind::mse_gap : GapKind::vi_gap;
    r.curve.alpha = c.at("alpha").get<double>();
    r.curve.ts = c.at("t").get<std::vector<std::size_t>>();
    r.curve.values = c.at("value").get<std::vector<double>>();
    if (j.contains("per_run_paths")) {
      const auto rows = j.at("per_run_paths").get<std::vector<std::vector<double>>>();
      std::vector<double> flat;
      for (const auto& row : rows) flat.insert(flat.end(), row.begin(), row.end());
      r.per_run_paths = Matrix<double>(rows.size(), r.curve.ts.size(), std::move(flat));
    }
    return r;
  } catch (const nlohmann::json::exception& ex) {
    throw Error(std::string("malformed oracle report: ") + ex.what());
  }
}

Json to_json(const CoverageReport& report) {
  Json j;
  j["coverage"] = report.coverage;
  j["runs"] = report.runs;
  j["t_check"] = report.t_check;
  j["alpha"] = report.alpha;
  j["mode"] = to_string(report.mode);
  j["mse_inf_hat"] = report.mse_inf_hat;
  j["gaps"] = report.gaps;
  j["q_hats"] = report.q_hats;
  return j;
}

void write_prediction_matrix(const PredictionMatrix& pred, const std::string& path) {
  std::string bytes = matrix_bytes(kPredMagic, pred.values);
  for (double v : pred.labels) put_f64(bytes, v);
  write_text_file(path, bytes);
}

PredictionMatrix read_prediction_matrix(const std::string& path) {
  Reader in(read_text_file(path), path);
  if (in.magic() != kPredMagic) throw Error("'" + path + "' is not a prediction matrix");
  PredictionMatrix pred;
  pred.values = read_matrix_body(in);
  pred.labels.resize(pred.values.cols());
  for (double& v : pred.labels) v = in.f64();
  in.expect_end();
  return pred;
}

void write_vi_matrix(const ViMatrix& vi, const std::string& path) {
  write_text_file(path, matrix_bytes(vi.rule == ViRule::impurity ? kViImpurityMagic
                                                                 : kViPermutationMagic,
                                     vi.values));
}

ViMatrix read_vi_matrix(const std::string& path) {
  Reader in(read_text_file(path), path);
  const Magic magic = in.magic();
  ViMatrix vi;
  if (magic == kViImpurityMagic) {
    vi.rule = ViRule::impurity;
  } else if (magic == kViPermutationMagic) {
    vi.rule = ViRule::permutation;
  } else {
    throw Error("'" + path + "' is not an importance matrix");
  }
  vi.values = read_matrix_body(in);
  in.expect_end();
  return vi;
}

std::string matrix_csv(const Matrix<double>& values,
                       const std::vector<std::string>& header) {
  std::ostringstream out;
  for (std::size_t c = 0; c < header.size(); ++c) {
    out << (c ? "," : "") << header[c];
  }
  if (!header.empty()) out << '\n';
  for (std::size_t r = 0; r < values.rows(); ++r) {
    const auto row = values.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) {
      out << (c ? "," : "") << format_real(row[c]);
    }
    out << '\n';
  }
  return out.str();
}

std::string curve_csv(std::span<const std::size_t> ts,
                      std::span<const double> values,
                      const std::string& value_name) {
  if (ts.size() != values.size()) throw Error("curve columns differ in length");
  std::string out = "t," + value_name + "\n";
  for (std::size_t k = 0; k < ts.size(); ++k) {
    out += std::to_string(ts[k]) + "," + format_real(values[k]) + "\n";
  }
  return out;
}

}  // namespace forestconv
