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

#include <cmath>
#include <numeric>
#include <vector>

#include "cgof/error.hpp"
#include "cgof/model.hpp"
#include "cgof/rng.hpp"
#include "cgof/tabulate.hpp"

namespace cgof {
namespace {

TEST(BalancedGrid, Thresholds) {
  EXPECT_EQ(balanced_grid(1).thresholds(), (std::vector<double>{0.0, 1.0}));
  EXPECT_EQ(balanced_grid(4).thresholds(), (std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0}));
  const UGrid g3 = balanced_grid(3);
  for (double w : g3.widths()) EXPECT_EQ(w, 1.0 / 3.0);
  EXPECT_NEAR(std::accumulate(g3.widths().begin(), g3.widths().end(), 0.0), 1.0, 1e-15);
  EXPECT_THROW(balanced_grid(0), Error);
}

TEST(BalancedGrid, ExactThresholdsForManyL) {
  for (std::size_t L = 1; L <= 64; ++L) {
    const UGrid g = balanced_grid(L);
    ASSERT_EQ(g.size(), L);
    for (std::size_t l = 0; l <= L; ++l) {
      EXPECT_EQ(g.thresholds()[l], static_cast<double>(l) / static_cast<double>(L));
    }
  }
}

TEST(UGridTest, RejectsInvalidThresholds) {
  EXPECT_THROW(UGrid({0.0, 0.5}), Error);
  EXPECT_THROW(UGrid({0.1, 1.0}), Error);
  EXPECT_THROW(UGrid({0.0, 0.5, 0.5, 1.0}), Error);
  EXPECT_THROW(UGrid({0.0}), Error);
  EXPECT_NO_THROW(UGrid({0.0, 0.1, 1.0}));
}

TEST(BinV, BoundaryConventions) {
  const UGrid g = balanced_grid(4);
  EXPECT_EQ(g.bin(0.25), 0u);
  EXPECT_EQ(g.bin(0.250001), 1u);
  EXPECT_EQ(g.bin(0.0), 0u);
  EXPECT_EQ(g.bin(1.0), 3u);
  EXPECT_THROW(g.bin(-1e-12), Error);
  EXPECT_THROW(g.bin(1.0 + 1e-12), Error);
  EXPECT_THROW(g.bin(NAN), Error);
}

TEST(CrossClassify, SingleCovariateCell) {
  const std::vector<double> v{0.1, 0.6, 0.4, 0.9};
  const std::vector<double> x{0.0, 1.0, 2.0, 3.0};
  const ContingencyTable t =
      cross_classify(v, Covariates(x, 4, 1), balanced_grid(2), Partition({Cell::whole_space(1)}, 1));
  EXPECT_EQ(t.observed(), (std::vector<std::int64_t>{2, 2}));
  EXPECT_EQ(t.n(), 4);
}

TEST(CrossClassify, TwoByTwoHandEnumeration) {
  const std::vector<double> v{0.1, 0.9, 0.1, 0.9};
  const std::vector<double> x{-1.0, -1.0, 1.0, 1.0};
  const Partition p({Cell{{-kInf}, {0.0}}, Cell{{0.0}, {kInf}}}, 1);
  const ContingencyTable t = cross_classify(v, Covariates(x, 4, 1), balanced_grid(2), p);
  EXPECT_EQ(t.observed(), (std::vector<std::int64_t>{1, 1, 1, 1}));
  EXPECT_EQ(t.column_counts(), (std::vector<std::int64_t>{2, 2}));
  EXPECT_EQ(t.q_hat(), (std::vector<double>{0.5, 0.5}));
}

TEST(CrossClassify, RtpWithNEqualsJHasNoEmptyColumn) {
  CounterRng rng(6);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t k = 1 + rng.uniform_index(3);
    const std::size_t J = rtp_cell_count(k, 2, 2);
    std::vector<double> x(J * k);
    for (double& e : x) e = rng.normal();
    std::vector<double> v(J);
    for (double& e : v) e = rng.uniform();
    const Covariates cov(x, J, k);
    const ContingencyTable t =
        cross_classify(v, cov, balanced_grid(3), rtp_partition(cov, {2, 2, rng.next_u64(), false}));
    for (auto c : t.column_counts()) EXPECT_GE(c, 1);
  }
}

TEST(CrossClassify, RejectsOutOfRangeV) {
  const std::vector<double> v{0.5, 1.5};
  const std::vector<double> x{0.0, 0.0};
  EXPECT_THROW(cross_classify(v, Covariates(x, 2, 1), balanced_grid(2),
                              Partition({Cell::whole_space(1)}, 1)),
               Error);
}

TEST(CrossClassify, MarginalsAndPermutationInvariance) {
  CounterRng rng(13);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 20 + rng.uniform_index(300);
    const std::size_t k = 1 + rng.uniform_index(3);
    std::vector<double> x(n * k);
    std::vector<double> v(n);
    for (double& e : x) e = rng.uniform(-1.0, 1.0);
    for (double& e : v) e = rng.uniform();
    const Covariates cov(x, n, k);
    const Partition p = gessaman_partition(cov, 2);
    const UGrid g = balanced_grid(1 + rng.uniform_index(6));
    const ContingencyTable t = cross_classify(v, cov, g, p);

    std::int64_t total = 0;
    for (std::size_t j = 0; j < t.J(); ++j) {
      std::int64_t col = 0;
      for (std::size_t l = 0; l < t.L(); ++l) col += t.observed(l, j);
      EXPECT_EQ(col, t.column_counts()[j]);
      total += col;
    }
    EXPECT_EQ(total, static_cast<std::int64_t>(n));
    EXPECT_NEAR(std::accumulate(t.q_hat().begin(), t.q_hat().end(), 0.0), 1.0, 1e-12);

    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    for (std::size_t i = n; i > 1; --i) std::swap(perm[i - 1], perm[rng.uniform_index(i)]);
    std::vector<double> x2(n * k);
    std::vector<double> v2(n);
    for (std::size_t i = 0; i < n; ++i) {
      v2[i] = v[perm[i]];
      for (std::size_t d = 0; d < k; ++d) x2[i * k + d] = x[perm[i] * k + d];
    }
    EXPECT_EQ(cross_classify(v2, Covariates(x2, n, k), g, p).observed(), t.observed());
  }
}

TEST(CrossClassify, ConditionalMeanUnderTrueModel) {
  // Under the true model E[O_lj | N_j] = N_j / L; check the average of
  // O_lj - N_j / L over 1000 datasets against its standard error.
  GaussianLinearModel model(1);
  const std::vector<double> theta{0.5, -1.0, 2.0};
  const std::size_t n = 200;
  const std::size_t L = 4;
  const Partition p = grid_partition({{-0.5, 0.0, 0.5}});
  const std::size_t J = p.size();
  CounterRng master(21);
  std::vector<double> sum(L * J, 0.0);
  std::vector<double> sum_sq(L * J, 0.0);
  const int reps = 1000;
  for (int r = 0; r < reps; ++r) {
    CounterRng rng = master.substream(r);
    std::vector<double> x(n);
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = rng.uniform(-1.0, 1.0);
      y[i] = theta[0] + theta[1] * x[i] + theta[2] * rng.normal();
    }
    const Dataset data(y, x, 1);
    const ContingencyTable t =
        cross_classify(rosenblatt(model, theta, data), Covariates(data), balanced_grid(L), p);
    for (std::size_t l = 0; l < L; ++l) {
      for (std::size_t j = 0; j < J; ++j) {
        const double dev = static_cast<double>(t.observed(l, j)) -
                           static_cast<double>(t.column_counts()[j]) / static_cast<double>(L);
        sum[l * J + j] += dev;
        sum_sq[l * J + j] += dev * dev;
      }
    }
  }
  for (std::size_t c = 0; c < L * J; ++c) {
    const double mean = sum[c] / reps;
    const double se = std::sqrt((sum_sq[c] / reps - mean * mean) / reps);
    EXPECT_LE(std::abs(mean), 3.0 * se + 1e-12) << "cell " << c;
  }
}

TEST(ContingencyTableTest, ExpectedUsesWidths) {
  const ContingencyTable t(2, 2, {6, 4, 4, 6}, {0.5, 0.5});
  EXPECT_EQ(t.expected(0, 0), 5.0);
  EXPECT_EQ(t.expected(1, 1), 5.0);
  EXPECT_THROW(ContingencyTable(2, 2, {1, 2, 3}, {0.5, 0.5}), Error);
  EXPECT_THROW(ContingencyTable(2, 1, {1, -2}, {0.5, 0.5}), Error);
}

}  // namespace
}  // namespace cgof
