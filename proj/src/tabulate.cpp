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

#include "cgof/tabulate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "cgof/error.hpp"

namespace cgof {

UGrid::UGrid(std::vector<double> thresholds) : thresholds_(std::move(thresholds)) {
  if (thresholds_.size() < 2 || thresholds_.front() != 0.0 || thresholds_.back() != 1.0) {
    fail(ErrorKind::invalid_argument, "grid thresholds must run from 0 to 1");
  }
  for (std::size_t l = 1; l < thresholds_.size(); ++l) {
    if (!(thresholds_[l - 1] < thresholds_[l])) {
      fail(ErrorKind::invalid_argument, "grid thresholds must be strictly increasing");
    }
  }
  widths_.resize(size());
  for (std::size_t l = 0; l < widths_.size(); ++l) widths_[l] = thresholds_[l + 1] - thresholds_[l];
}


std::size_t UGrid::bin(double v) const {
  if (!(v >= 0.0 && v <= 1.0)) {
    fail(ErrorKind::invalid_argument, "transformed value " + std::to_string(v) + " outside [0,1]");
  }
  // First upper threshold >= v; v == 0 lands in the first bin.
  auto it = std::lower_bound(thresholds_.begin() + 1, thresholds_.end(), v);
  return static_cast<std::size_t>(it - (thresholds_.begin() + 1));
}

UGrid balanced_grid(std::size_t L) {
  if (L < 1) fail(ErrorKind::invalid_argument, "balanced grid needs L >= 1");
  std::vector<double> t(L + 1);
  for (std::size_t l = 0; l <= L; ++l) t[l] = static_cast<double>(l) / static_cast<double>(L);
  UGrid grid(std::move(t));
  grid.widths_.assign(L, 1.0 / static_cast<double>(L));
  return grid;
}

ContingencyTable::ContingencyTable(std::size_t L, std::size_t J,
                                   std::vector<std::int64_t> observed_row_major,
                                   std::vector<double> widths)
    : L_(L), J_(J), O_(std::move(observed_row_major)), widths_(std::move(widths)) {
  if (L_ == 0 || J_ == 0) fail(ErrorKind::invalid_argument, "table needs L >= 1 and J >= 1");
  if (O_.size() != L_ * J_) fail(ErrorKind::invalid_argument, "table size mismatch");
  if (widths_.size() != L_) fail(ErrorKind::invalid_argument, "need one width per grid interval");
  for (auto o : O_) {
    if (o < 0) fail(ErrorKind::invalid_argument, "observed counts must be nonnegative");
  }
  for (double w : widths_) {
    if (!(w > 0.0)) fail(ErrorKind::invalid_argument, "grid widths must be positive");
  }
  column_counts_.assign(J_, 0);
  for (std::size_t l = 0; l < L_; ++l) {
    for (std::size_t j = 0; j < J_; ++j) column_counts_[j] += O_[l * J_ + j];
  }
  n_ = std::accumulate(column_counts_.begin(), column_counts_.end(), std::int64_t{0});
  q_hat_.assign(J_, 0.0);
  if (n_ > 0) {
    for (std::size_t j = 0; j < J_; ++j) {
      q_hat_[j] = static_cast<double>(column_counts_[j]) / static_cast<double>(n_);
    }
  }
}

std::vector<std::size_t> classify_observations(std::span<const double> v, const Covariates& x,
                                               const UGrid& grid, const Partition& partition) {
  if (v.size() != x.n()) fail(ErrorKind::invalid_argument, "v and x disagree on n");
  const std::size_t J = partition.size();
  std::vector<std::size_t> cells(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    cells[i] = grid.bin(v[i]) * J + partition.locate(x.row(i));
  }
  return cells;
}

ContingencyTable cross_classify(std::span<const double> v, const Covariates& x, const UGrid& grid,
                                const Partition& partition) {
  const std::size_t L = grid.size();
  const std::size_t J = partition.size();
  std::vector<std::int64_t> O(L * J, 0);
  for (std::size_t cell : classify_observations(v, x, grid, partition)) ++O[cell];
  return ContingencyTable(L, J, std::move(O), grid.widths());
}

}  // namespace cgof
