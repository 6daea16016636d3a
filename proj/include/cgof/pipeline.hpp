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

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cgof/estimate.hpp"
#include "cgof/model.hpp"
#include "cgof/partition.hpp"
#include "cgof/stats.hpp"
#include "cgof/tabulate.hpp"

namespace cgof {

enum class PartitionRule { grid, gessaman, rtp, fixed };

std::string_view to_string(PartitionRule rule) noexcept;
PartitionRule partition_rule_from_string(std::string_view text);

struct PartitionSpec {
  PartitionRule rule = PartitionRule::rtp;
  std::size_t T = 2;
  std::size_t r = 1;
  std::uint64_t seed = 0;
  bool equal_depth = false;
  std::vector<std::vector<double>> cuts;           // grid: interior cut points per axis
  std::shared_ptr<const Partition> fixed;          // fixed: a prebuilt partition
};

Partition build_partition(const Covariates& x, const PartitionSpec& spec);

/// T equal-width intervals per axis between the observed minimum and maximum.
std::vector<std::vector<double>> equal_width_cuts(const Covariates& x, std::size_t T);

/// One specification test: model -> estimate -> transform -> partition -> table -> stats.
struct TestConfig {
  std::string model = "gaussian_linear";
  EstimatorKind estimator = EstimatorKind::known;
  ParamVector theta;  // known: the hypothesized value; otherwise an optional start
  std::size_t L = 4;
  PartitionSpec partition;
  std::vector<StatKind> stats{StatKind::pearson, StatKind::lr, StatKind::wald_null};
  DfConvention df_convention = DfConvention::conditional;
  OptimizerConfig optimizer;
};

struct TestOutcome {
  ParamVector theta;
  Partition partition;
  ContingencyTable table;
  std::vector<TestReport> reports;
};

/// Resolves the "wald" alias: wald_raw_mle for raw-MLE estimates, wald_null otherwise.
StatKind resolve_stat(std::string_view name, EstimatorKind estimator);

/// Default starting values for numeric estimation.
ParamVector default_start(const ConditionalModel& model, const Dataset& data);

ParamVector estimate_theta(const ConditionalModel& model, const Dataset& data,
                           const TestConfig& config, const UGrid& grid,
                           const Partition& partition);

TestOutcome run_specification_test(const Dataset& data, const TestConfig& config);

}  // namespace cgof
