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

#include "cgof/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cgof/error.hpp"

namespace cgof {

std::string_view to_string(PartitionRule rule) noexcept {
  switch (rule) {
    case PartitionRule::grid: return "grid";
    case PartitionRule::gessaman: return "gessaman";
    case PartitionRule::rtp: return "rtp";
    case PartitionRule::fixed: return "fixed";
  }
  return "rtp";
}

PartitionRule partition_rule_from_string(std::string_view text) {
  if (text == "grid") return PartitionRule::grid;
  if (text == "gessaman") return PartitionRule::gessaman;
  if (text == "rtp") return PartitionRule::rtp;
  if (text == "fixed") return PartitionRule::fixed;
  fail(ErrorKind::invalid_argument, "unknown partition rule '" + std::string(text) + "'");
}

std::vector<std::vector<double>> equal_width_cuts(const Covariates& x, std::size_t T) {
  if (T < 1) fail(ErrorKind::invalid_argument, "grid needs T >= 1");
  std::vector<std::vector<double>> cuts(x.k());
  for (std::size_t d = 0; d < x.k(); ++d) {
    double lo = x(0, d);
    double hi = x(0, d);
    for (std::size_t i = 1; i < x.n(); ++i) {
      lo = std::min(lo, x(i, d));
      hi = std::max(hi, x(i, d));
    }
    if (!(hi > lo)) continue;
    for (std::size_t g = 1; g < T; ++g) {
      cuts[d].push_back(lo + (hi - lo) * static_cast<double>(g) / static_cast<double>(T));
    }
  }
  return cuts;
}

Partition build_partition(const Covariates& x, const PartitionSpec& spec) {
  switch (spec.rule) {
    case PartitionRule::grid: {
      if (!spec.cuts.empty()) {
        if (spec.cuts.size() != x.k()) {
          fail(ErrorKind::invalid_argument, "grid cuts must be given for every axis");
        }
        return grid_partition(spec.cuts);
      }
      return grid_partition(equal_width_cuts(x, spec.T));
    }
    case PartitionRule::gessaman:
      return gessaman_partition(x, spec.T);
    case PartitionRule::rtp:
      return rtp_partition(x, RtpOptions{spec.T, spec.r, spec.seed, spec.equal_depth});
    case PartitionRule::fixed:
      if (!spec.fixed) fail(ErrorKind::invalid_argument, "fixed partition rule needs a partition");
      if (spec.fixed->k() != x.k()) {
        fail(ErrorKind::invalid_argument, "fixed partition dimension does not match the data");
      }
      return *spec.fixed;
  }
  fail(ErrorKind::invalid_argument, "unknown partition rule");
}

StatKind resolve_stat(std::string_view name, EstimatorKind estimator) {
  if (name == "wald") {
    return estimator == EstimatorKind::raw_mle ? StatKind::wald_raw_mle : StatKind::wald_null;
  }
  return stat_kind_from_string(name);
}

ParamVector default_start(const ConditionalModel& model, const Dataset& data) {
  const std::vector<double>& y = data.y();
  const double mean = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
  ParamVector theta(model.param_dim(), 0.0);
  if (model.name() == "exponential_regression") {
    theta[0] = mean > 0.0 ? -std::log(mean) : 0.0;
    return theta;
  }
  double ss = 0.0;
  for (double v : y) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / static_cast<double>(y.size()));
  if (model.name() == "gaussian_linear") {
    theta.front() = mean;
  }
  for (std::size_t m = 0; m < theta.size(); ++m) {
    if (model.is_scale_param(m)) theta[m] = sd > 0.0 ? sd : 1.0;
  }
  return theta;
}

ParamVector estimate_theta(const ConditionalModel& model, const Dataset& data,
                           const TestConfig& config, const UGrid& grid,
                           const Partition& partition) {
  if (config.estimator == EstimatorKind::known) {
    if (config.theta.empty()) fail(ErrorKind::invalid_argument, "known estimator needs theta");
    model.check_params(config.theta);
    return config.theta;
  }
  ParamVector raw;
  if (model.name() == "gaussian_linear") {
    raw = mle_gaussian_linear(data);
  } else {
    const ParamVector start = config.theta.empty() ? default_start(model, data) : config.theta;
    raw = mle_numeric(model, data, start, config.optimizer);
  }
  if (config.estimator == EstimatorKind::raw_mle) return raw;
  return min_chisq_estimate(model, data, grid, partition, raw, config.optimizer);
}

TestOutcome run_specification_test(const Dataset& data, const TestConfig& config) {
  const auto model = make_model(config.model, data.k());
  const Covariates x(data);
  const UGrid grid = balanced_grid(config.L);
  Partition partition = build_partition(x, config.partition);
  ParamVector theta = estimate_theta(*model, data, config, grid, partition);

  const std::vector<double> v = rosenblatt(*model, theta, data);
  ContingencyTable table = cross_classify(v, x, grid, partition);

  DfPolicy policy;
  policy.convention = config.df_convention;
  policy.p_adjust = config.estimator == EstimatorKind::known ? 0 : model->param_dim();

  RawMleContext raw{model.get(), theta, &data, &grid, &partition};
  const EstimatorContext context{config.estimator, &raw};

  std::vector<TestReport> reports;
  reports.reserve(config.stats.size());
  for (StatKind kind : config.stats) reports.push_back(run_test(kind, table, policy, context));
  return TestOutcome{std::move(theta), std::move(partition), std::move(table), std::move(reports)};
}

}  // namespace cgof
