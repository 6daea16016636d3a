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
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cgof/pipeline.hpp"
#include "cgof/rng.hpp"

namespace cgof {

enum class DgpFamily { gaussian_linear, gaussian_heteroskedastic, exponential_regression };
enum class CovariateLaw { uniform, normal };

std::string_view to_string(DgpFamily family) noexcept;
DgpFamily dgp_family_from_string(std::string_view text);
std::string_view to_string(CovariateLaw law) noexcept;
CovariateLaw covariate_law_from_string(std::string_view text);

/// Data-generating process.
///   gaussian_linear:          y = b0 + b'x + sigma e
///   gaussian_heteroskedastic: y = b0 + b'x + sigma (1 + |x_1|) e
///   exponential_regression:   y ~ Exponential(exp(b0 + b'x))
/// Covariates are independent Uniform(-1, 1) or N(0, 1). sigma = 0 is accepted
/// so degenerate designs can be simulated.
struct DgpSpec {
  DgpFamily family = DgpFamily::gaussian_linear;
  ParamVector true_params;
  CovariateLaw covariates = CovariateLaw::uniform;
  std::size_t k = 1;
  std::size_t n = 500;

  void validate() const;
  Dataset simulate(CounterRng& rng) const;
  /// Interior population quantiles i/T of one covariate, i = 1..T-1.
  std::vector<double> covariate_quantiles(std::size_t T) const;
};

struct SimConfig {
  DgpSpec dgp;
  TestConfig test;                 // model under test, estimator, L, partition, stats
  std::vector<double> levels{0.01, 0.05, 0.10};
  std::size_t replications = 1000;
  std::uint64_t master_seed = 1;
  std::size_t threads = 1;         // 0: one per hardware thread

  void validate() const;
};

struct StatOutcome {
  StatKind kind = StatKind::pearson;
  double value = 0.0;
  long df = 0;
  std::optional<std::pair<long, long>> df_interval;
  double p = 1.0;                  // conservative p (upper end for intervals)
  std::optional<std::pair<double, double>> p_interval;

  bool operator==(const StatOutcome&) const = default;
};

struct ReplicationOutcome {
  std::size_t rep_index = 0;
  std::uint64_t partition_seed = 0;
  bool ok = false;
  std::string reason;              // error kind when !ok
  std::string message;
  ParamVector theta;
  std::vector<StatOutcome> stats;

  bool operator==(const ReplicationOutcome&) const = default;
};

/// Seed of the partition built in replication `rep_index`.
std::uint64_t replication_partition_seed(std::uint64_t master_seed, std::size_t rep_index);

/// One replication, fully determined by (cfg, rep_index). Errors are recorded.
ReplicationOutcome run_replication(const SimConfig& cfg, std::size_t rep_index);

struct LevelResult {
  double level = 0.0;
  std::size_t rejections = 0;          // p_hi < level
  double rate = 0.0;
  double mc_se = 0.0;
  std::size_t liberal_rejections = 0;  // p_lo < level
  double liberal_rate = 0.0;
};

struct StatSummary {
  StatKind kind = StatKind::pearson;
  std::size_t count = 0;
  double mean_stat = 0.0;
  double var_stat = 0.0;
  double mean_df = 0.0;
  double ks_uniform = 0.0;             // KS distance of conservative p-values from U(0,1)
  std::vector<LevelResult> levels;
};

struct Failure {
  std::size_t rep_index = 0;
  std::string reason;
  std::string message;
};

struct SimResult {
  std::size_t replications = 0;
  std::size_t completed = 0;
  std::vector<StatSummary> per_stat;
  std::vector<Failure> failures;
};

/// Reduces replication outcomes; the result does not depend on their order.
/// Throws experiment_invalid when more than 5% of replications failed.
SimResult aggregate(const SimConfig& cfg, std::vector<ReplicationOutcome> outcomes);

std::vector<ReplicationOutcome> run_replications(const SimConfig& cfg);

SimResult run_experiment(const SimConfig& cfg);

struct DfCalibration {
  StatKind kind = StatKind::pearson;
  double mean = 0.0;
  double se = 0.0;
  double df_conditional = 0.0;    // J(L-1) - p_adjust
  double df_unconditional = 0.0;  // JL - 1 - p_adjust
  double df_reported = 0.0;       // mean df used for p-values (effective df for wald_raw_mle)
};

std::vector<DfCalibration> calibrate_df(const SimConfig& cfg, const SimResult& result,
                                        std::size_t J);
std::vector<DfCalibration> calibrate_df(const SimConfig& cfg);

/// sup |F_n - F| against Uniform(0,1).
double ks_distance_uniform(std::vector<double> values);

/// 99% two-sided normal-approximation band for a binomial rate.
std::pair<double, double> binomial_band_99(double level, std::size_t replications);

}  // namespace cgof
