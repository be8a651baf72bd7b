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

#include "forestconv/data.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <optional>
#include <sstream>

#include "forestconv/io.hpp"
#include "forestconv/random.hpp"

namespace forestconv {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() &&
         (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(trim(line.substr(start)));
      return out;
    }
    out.push_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
}

std::optional<double> parse_real(std::string_view cell) {
  if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] =
      std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (ec != std::errc() || ptr != cell.data() + cell.size() || cell.empty() ||
      !std::isfinite(value)) {
    return std::nullopt;
  }
  return value;
}

std::optional<std::size_t> parse_index(const std::string& s) {
  std::size_t value = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    return std::nullopt;
  }
  return value;
}

}  // namespace

void Dataset::validate() const {
  if (n() == 0) throw Error("dataset is empty");
  if (p() == 0) throw Error("dataset has no feature columns");
  if (labels.size() != n()) {
    throw Error("label count " + std::to_string(labels.size()) +
                " does not match row count " + std::to_string(n()));
  }
  if (!column_names.empty() && column_names.size() != p()) {
    throw Error("column name count does not match feature count");
  }
  for (double v : features.data()) {
    if (!std::isfinite(v)) throw Error("dataset contains a non-finite feature");
  }
  for (double v : labels) {
    if (!std::isfinite(v)) throw Error("dataset contains a non-finite label");
  }
}

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
  Dataset out;
  out.features = Matrix<double>(rows.size(), p());
  out.labels.reserve(rows.size());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    if (rows[k] >= n()) throw Error("subset row index out of range");
    const auto src = row(rows[k]);
    std::copy(src.begin(), src.end(), out.features.row(k).begin());
    out.labels.push_back(labels[rows[k]]);
  }
  out.column_names = column_names;
  out.label_name = label_name;
  return out;
}

Dataset make_dataset(Matrix<double> features, std::vector<double> labels,
                     std::vector<std::string> column_names,
                     std::string label_name) {
  Dataset d{std::move(features), std::move(labels), std::move(column_names),
            std::move(label_name)};
  d.validate();
  return d;
}

Dataset load_csv(const std::string& path, const std::string& label_column,
                 bool header) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "'");

  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> names;
  std::size_t width = 0;

  if (header) {
    while (std::getline(in, line)) {
      ++line_no;
      if (!trim(line).empty()) break;
    }
    if (trim(line).empty()) throw Error("'" + path + "' is empty");
    for (auto f : split_fields(line)) names.emplace_back(f);
    width = names.size();
  }

  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line);
    if (width == 0) width = fields.size();
    if (fields.size() != width) {
      throw Error(path + ":" + std::to_string(line_no) + ": expected " +
                  std::to_string(width) + " columns, found " +
                  std::to_string(fields.size()));
    }
    std::vector<double> values;
    values.reserve(width);
    for (std::size_t c = 0; c < fields.size(); ++c) {
      const auto v = parse_real(fields[c]);
      if (!v) {
        throw Error(path + ":" + std::to_string(line_no) + ": column " +
                    std::to_string(c + 1) + ": cannot parse '" +
                    std::string(fields[c]) + "' as a finite real");
      }
      values.push_back(*v);
    }
    rows.push_back(std::move(values));
  }
  if (rows.empty()) throw Error("'" + path + "' contains no data rows");

  std::size_t label_idx = width;
  for (std::size_t c = 0; c < names.size(); ++c) {
    if (names[c] == label_column) {
      label_idx = c;
      break;
    }
  }
  if (label_idx == width) {
    const auto one_based = parse_index(label_column);
    if (!one_based || *one_based < 1 || *one_based > width) {
      throw Error("label column '" + label_column + "' not found in '" +
                  path + "'");
    }
    label_idx = *one_based - 1;
  }
  if (width < 2) throw Error("'" + path + "' has no feature columns");

  Dataset d;
  d.features = Matrix<double>(rows.size(), width - 1);
  d.labels.reserve(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    std::size_t out = 0;
    for (std::size_t c = 0; c < width; ++c) {
      if (c == label_idx) {
        d.labels.push_back(rows[r][c]);
      } else {
        d.features(r, out++) = rows[r][c];
      }
    }
  }
  if (header) {
    d.label_name = names[label_idx];
    for (std::size_t c = 0; c < width; ++c) {
      if (c != label_idx) d.column_names.push_back(names[c]);
    }
  } else {
    d.label_name = "y";
  }
  d.validate();
  return d;
}

void write_csv(const Dataset& data, const std::string& path) {
  std::ostringstream out;
  for (std::size_t c = 0; c < data.p(); ++c) {
    out << (data.column_names.empty() ? "x" + std::to_string(c + 1)
                                      : data.column_names[c])
        << ',';
  }
  out << (data.label_name.empty() ? "y" : data.label_name) << '\n';
  for (std::size_t r = 0; r < data.n(); ++r) {
    for (double v : data.row(r)) out << format_real(v) << ',';
    out << format_real(data.labels[r]) << '\n';
  }
  write_text_file(path, out.str());
}

Partition split_dataset(std::size_t total, double train_frac,
                        double holdout_ratio, std::uint64_t seed) {
  if (!(train_frac > 0.0 && train_frac < 1.0)) {
    throw Error("train fraction must lie in (0, 1)");
  }
  if (!(holdout_ratio >= 0.0 && holdout_ratio < 1.0)) {
    throw Error("hold-out ratio must lie in [0, 1)");
  }
  const auto n_train = static_cast<std::size_t>(
      std::floor(static_cast<double>(total) * train_frac));
  if (n_train == 0) throw Error("split leaves the training set empty");

  const double target = holdout_ratio * static_cast<double>(n_train) /
                        (1.0 - holdout_ratio);
  const std::size_t n_holdout = std::min<std::size_t>(
      static_cast<std::size_t>(std::llround(target)), total - n_train);

  std::vector<std::size_t> order(total);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Engine rng = make_engine(seed);
  for (std::size_t i = total; i > 1; --i) {
    std::swap(order[i - 1], order[uniform_index(rng, i)]);
  }

  Partition part;
  part.seed = seed;
  const auto mid = order.begin() + static_cast<std::ptrdiff_t>(n_train);
  const auto end_h = mid + static_cast<std::ptrdiff_t>(n_holdout);
  part.train.assign(order.begin(), mid);
  part.holdout.assign(mid, end_h);
  part.test.assign(end_h, order.end());
  std::sort(part.train.begin(), part.train.end());
  std::sort(part.holdout.begin(), part.holdout.end());
  std::sort(part.test.begin(), part.test.end());
  return part;
}

}  // namespace forestconv
