/*
 * Copyright (c) 2026 The cgof Authors. All Rights Reserved
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <json.hpp>
#include <string>
#include <string_view>
#include <vector>

#include "cgof/mc.hpp"
#include "cgof/partition.hpp"
#include "cgof/pipeline.hpp"

namespace cgof {

using Json = nlohmann::ordered_json;

inline constexpr std::string_view kVersion = "1.0.0";

/// Header plus raw cells of a comma-separated file.
struct CsvFrame {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(std::string_view name) const;
  /// Parses a column as finite doubles; errors name the row and column.
  std::vector<double> numeric_column(std::string_view name) const;
};

CsvFrame parse_csv(std::string_view text);
CsvFrame read_csv(const std::string& path);

/// Row-major covariates for the named columns.
std::vector<double> covariate_matrix(const CsvFrame& frame, const std::vector<std::string>& x_cols);

Dataset dataset_from_csv(const CsvFrame& frame, std::string_view y_col,
                         const std::vector<std::string>& x_cols);

// Partition documents. Infinite bounds are written as the strings "-inf"/"inf".
Json partition_to_json(const Partition& partition);
Partition partition_from_json(const Json& doc);
/// Serialization plus per-cell counts and balance diagnostics for x.
Json partition_document(const Partition& partition, const Covariates& x);

Json test_config_to_json(const TestConfig& config);
/// Throws invalid_argument listing every offending field.
TestConfig test_config_from_json(const Json& doc);

Json test_report_document(const TestConfig& config, const TestOutcome& outcome,
                          const Json& data_description);

Json sim_config_to_json(const SimConfig& config);
SimConfig sim_config_from_json(const Json& doc);
Json sim_result_document(const SimConfig& config, const SimResult& result);

}  // namespace cgof
