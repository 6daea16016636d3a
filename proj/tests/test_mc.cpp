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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "cgof/error.hpp"
#include "cgof/mc.hpp"
#include "cgof/rng.hpp"

namespace cgof {
namespace {

SimConfig null_config(EstimatorKind estimator, std::size_t R) {
  SimConfig c;
  c.dgp.family = DgpFamily::gaussian_linear;
  c.dgp.true_params = {1.0, 0.5, -0.3, 1.0};
  c.dgp.k = 2;
  c.dgp.n = 500;
  c.test.estimator = estimator;
  c.test.L = 4;
  c.test.partition.rule = PartitionRule::rtp;
  c.test.partition.T = 2;
  c.test.partition.r = 2;
  c.test.stats = {StatKind::pearson, StatKind::lr,
                  estimator == EstimatorKind::raw_mle ? StatKind::wald_raw_mle : StatKind::wald_null};
  c.levels = {0.01, 0.05, 0.10};
  c.replications = R;
  c.master_seed = 20261018;
  return c;
}

TEST(CounterRngTest, ReproducibleAndSplittable) {
  CounterRng a(5);
  CounterRng b(5);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next_u64(), b.next_u64());
  CounterRng s1 = CounterRng(5).substream(1);
  CounterRng s2 = CounterRng(5).substream(2);
  EXPECT_NE(s1.next_u64(), s2.next_u64());
  CounterRng u(9);
  double sum = 0.0;
  double sum_sq = 0.0;
  const int m = 200000;
  for (int i = 0; i < m; ++i) {
    const double z = u.normal();
    sum += z;
    sum_sq += z * z;
  }
  EXPECT_NEAR(sum / m, 0.0, 0.01);
  EXPECT_NEAR(sum_sq / m, 1.0, 0.02);
  for (int i = 0; i < 1000; ++i) {
    const double v = u.uniform_open();
    EXPECT_GT(v, 0.0);
    EXPECT_LT(v, 1.0);
    EXPECT_LT(u.uniform_index(7), 7u);
  }
}

TEST(Replication, Deterministic) {
  const SimConfig c = null_config(EstimatorKind::raw_mle, 10);
  for (std::size_t r : {0u, 3u, 9u}) {
    const ReplicationOutcome a = run_replication(c, r);
    const ReplicationOutcome b = run_replication(c, r);
    EXPECT_TRUE(a.ok) << a.message;
    EXPECT_EQ(a, b);
  }
  EXPECT_NE(run_replication(c, 1).stats[0].value, run_replication(c, 2).stats[0].value);
}

TEST(Replication, DegenerateDgpIsRecorded) {
  SimConfig c = null_config(EstimatorKind::known, 5);
  c.dgp.true_params = {1.0, 0.5, -0.3, 0.0};
  const ReplicationOutcome out = run_replication(c, 0);
  EXPECT_FALSE(out.ok);
  EXPECT_EQ(out.reason, "invalid_parameter");
  EXPECT_FALSE(out.message.empty());
}

TEST(Replication, TooFewObservationsIsRecorded) {
  SimConfig c = null_config(EstimatorKind::known, 5);
  c.dgp.n = 4;
  const ReplicationOutcome out = run_replication(c, 0);
  EXPECT_FALSE(out.ok);
  EXPECT_EQ(out.reason, "insufficient_data");
}

TEST(Experiment, TooManyFailuresInvalidatesExperiment) {
  SimConfig c = null_config(EstimatorKind::known, 20);
  c.dgp.n = 4;
  try {
    run_experiment(c);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::experiment_invalid);
  }
}

TEST(Experiment, FailureToleranceIsFivePercent) {
  const SimConfig c = null_config(EstimatorKind::known, 40);
  std::vector<ReplicationOutcome> outcomes = run_replications(c);
  outcomes[3].ok = false;
  outcomes[3].reason = "model_evaluation";
  outcomes[3].stats.clear();
  outcomes[17].ok = false;
  outcomes[17].reason = "model_evaluation";
  outcomes[17].stats.clear();
  const SimResult two = aggregate(c, outcomes);
  EXPECT_EQ(two.completed, 38u);
  EXPECT_EQ(two.failures.size(), 2u);
  EXPECT_EQ(two.failures[0].rep_index, 3u);
  outcomes[20].ok = false;
  outcomes[20].stats.clear();
  EXPECT_THROW(aggregate(c, outcomes), Error);
}

TEST(Experiment, NearZeroLevelNeverRejects) {
  SimConfig c = null_config(EstimatorKind::known, 200);
  c.levels = {1e-12};
  const SimResult r = run_experiment(c);
  for (const StatSummary& s : r.per_stat) EXPECT_EQ(s.levels[0].rejections, 0u);
}

TEST(Experiment, SingleReplication) {
  SimConfig c = null_config(EstimatorKind::known, 1);
  const SimResult r = run_experiment(c);
  for (const StatSummary& s : r.per_stat) {
    for (const LevelResult& l : s.levels) EXPECT_TRUE(l.rate == 0.0 || l.rate == 1.0);
  }
}

TEST(Experiment, OrderIndependentAggregation) {
  const SimConfig c = null_config(EstimatorKind::raw_mle, 60);
  std::vector<ReplicationOutcome> outcomes = run_replications(c);
  const SimResult a = aggregate(c, outcomes);
  std::reverse(outcomes.begin(), outcomes.end());
  CounterRng rng(1);
  for (std::size_t i = outcomes.size(); i > 1; --i) {
    std::swap(outcomes[i - 1], outcomes[rng.uniform_index(i)]);
  }
  const SimResult b = aggregate(c, outcomes);
  ASSERT_EQ(a.per_stat.size(), b.per_stat.size());
  for (std::size_t s = 0; s < a.per_stat.size(); ++s) {
    EXPECT_EQ(a.per_stat[s].mean_stat, b.per_stat[s].mean_stat);
    EXPECT_EQ(a.per_stat[s].var_stat, b.per_stat[s].var_stat);
    EXPECT_EQ(a.per_stat[s].ks_uniform, b.per_stat[s].ks_uniform);
    for (std::size_t l = 0; l < a.per_stat[s].levels.size(); ++l) {
      EXPECT_EQ(a.per_stat[s].levels[l].rejections, b.per_stat[s].levels[l].rejections);
    }
  }
}

TEST(Experiment, ThreadCountDoesNotChangeResults) {
  SimConfig c = null_config(EstimatorKind::raw_mle, 30);
  c.threads = 1;
  const auto serial = run_replications(c);
  c.threads = 3;
  const auto parallel = run_replications(c);
  EXPECT_EQ(serial, parallel);
}

TEST(Experiment, KnownThetaSizeWithinBand) {
  const SimConfig c = null_config(EstimatorKind::known, 2000);
  const SimResult r = run_experiment(c);
  for (const StatSummary& s : r.per_stat) {
    for (const LevelResult& l : s.levels) {
      const auto [lo, hi] = binomial_band_99(l.level, 2000);
      EXPECT_GE(l.rate, lo) << to_string(s.kind) << " level " << l.level;
      EXPECT_LE(l.rate, hi) << to_string(s.kind) << " level " << l.level;
    }
    // 1% KS critical value for R = 2000.
    EXPECT_LT(s.ks_uniform, 1.63 / std::sqrt(2000.0)) << to_string(s.kind);
  }
}

TEST(CalibrateDf, KnownThetaPearsonMeanIsConditionalDf) {
  const SimConfig c = null_config(EstimatorKind::known, 2000);
  const auto cal = calibrate_df(c);
  ASSERT_EQ(cal[0].kind, StatKind::pearson);
  EXPECT_EQ(cal[0].df_conditional, 15.0);
  EXPECT_EQ(cal[0].df_unconditional, 19.0);
  EXPECT_LE(std::abs(cal[0].mean - 15.0), 3.0 * cal[0].se) << cal[0].mean;
}

TEST(CalibrateDf, DegenerateGridHasZeroMean) {
  SimConfig c = null_config(EstimatorKind::known, 20);
  c.test.L = 1;
  const auto cal = calibrate_df(c);
  for (const DfCalibration& d : cal) {
    EXPECT_EQ(d.mean, 0.0);
    EXPECT_EQ(d.df_reported, 0.0);
  }
}

TEST(CalibrateDf, GroupedEstimatorApproachesReducedDfSlowly) {
  // The grouped objective is piecewise constant in theta, so its minimum sits
  // below the smooth chi-square(J(L-1) - p) approximation at moderate n and
  // rises toward it as n grows.
  SimConfig c = null_config(EstimatorKind::min_chisq, 200);
  c.test.stats = {StatKind::pearson};
  c.test.optimizer.restarts = 1;
  c.dgp.n = 200;
  const double small = calibrate_df(c)[0].mean;
  c.dgp.n = 1000;
  const auto large = calibrate_df(c)[0];
  EXPECT_EQ(large.df_conditional, 11.0);
  EXPECT_LT(small, large.mean);
  EXPECT_LT(large.mean, 11.0 + 3.0 * large.se);
  EXPECT_GT(large.mean, 7.5);
}

TEST(Helpers, KsDistanceAndBand) {
  EXPECT_EQ(ks_distance_uniform({}), 0.0);
  EXPECT_NEAR(ks_distance_uniform({0.5}), 0.5, 1e-15);
  EXPECT_NEAR(ks_distance_uniform({0.25, 0.75}), 0.25, 1e-15);
  const auto [lo, hi] = binomial_band_99(0.05, 2000);
  EXPECT_NEAR(lo, 0.037, 0.0005);
  EXPECT_NEAR(hi, 0.063, 0.0005);
}

TEST(DgpSpecTest, ValidationAndQuantiles) {
  DgpSpec d;
  d.family = DgpFamily::gaussian_linear;
  d.k = 2;
  d.true_params = {1.0, 2.0};
  EXPECT_THROW(d.validate(), Error);
  d.true_params = {1.0, 2.0, 3.0, -1.0};
  EXPECT_THROW(d.validate(), Error);
  d.true_params.back() = 0.0;
  EXPECT_NO_THROW(d.validate());
  EXPECT_EQ(d.covariate_quantiles(4), (std::vector<double>{-0.5, 0.0, 0.5}));
  d.covariates = CovariateLaw::normal;
  EXPECT_NEAR(d.covariate_quantiles(2)[0], 0.0, 1e-15);
}

}  // namespace
}  // namespace cgof
