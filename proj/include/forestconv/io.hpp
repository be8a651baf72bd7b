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

// Serialization for the pipeline's artifacts.
//
// Binary matrices: a 16-byte header (8-byte magic, uint32 rows, uint32 cols,
// little-endian) followed by rows*cols little-endian float64 values in
// row-major order. Prediction matrices append their `cols` point labels.

#include <span>
#include <string>
#include <vector>

#include "forestconv/convergence.hpp"
#include "forestconv/data.hpp"
#include "forestconv/forest.hpp"
#include "forestconv/oracle.hpp"
#include "json.hpp"

namespace forestconv {

using Json = nlohmann::ordered_json;

/// Shortest decimal text that round-trips to the same double.
std::string format_real(double v);

void write_text_file(const std::string& path, const std::string& text);
std::string read_text_file(const std::string& path);

void write_json(const std::string& path, const Json& doc);
Json read_json(const std::string& path);

/// 64-bit FNV-1a over the shape and raw values, as 16 hex digits.
std::string content_hash(const Dataset& data);
std::string content_hash(const Dataset& a, const Dataset& b);

Json to_json(const TreeParams& params);
TreeParams tree_params_from_json(const Json& j);

Json to_json(const Partition& part);

Json to_json(const RegressionTree& tree);
RegressionTree tree_from_json(const Json& j);

Json to_json(const Ensemble& ensemble);
Ensemble ensemble_from_json(const Json& j);

Json to_json(const ConvergenceEstimate& est);
ConvergenceEstimate estimate_from_json(const Json& j);

Json to_json(const QuantileCurve& curve);
Json to_json(const OracleReport& report);
OracleReport oracle_report_from_json(const Json& j);

Json to_json(const CoverageReport& report);

void write_prediction_matrix(const PredictionMatrix& pred, const std::string& path);
PredictionMatrix read_prediction_matrix(const std::string& path);

void write_vi_matrix(const ViMatrix& vi, const std::string& path);
ViMatrix read_vi_matrix(const std::string& path);

/// Rows = trees. `header` may be empty.
std::string matrix_csv(const Matrix<double>& values,
                       const std::vector<std::string>& header);

/// Two-column CSV "t,<value_name>".
std::string curve_csv(std::span<const std::size_t> ts,
                      std::span<const double> values,
                      const std::string& value_name);

}  // namespace forestconv
