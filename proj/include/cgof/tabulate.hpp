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
#include <span>
#include <vector>

#include "cgof/partition.hpp"

namespace cgof {

/// Partition of [0,1] into L intervals (t_{l-1}, t_l]; the first interval also
/// holds 0 so the grid covers the closed unit interval.
class UGrid {
 public:
  explicit UGrid(std::vector<double> thresholds);

  std::size_t size() const noexcept { return thresholds_.size() - 1; }
  const std::vector<double>& thresholds() const noexcept { return thresholds_; }
  const std::vector<double>& widths() const noexcept { return widths_; }

  /// 0-based bin of v.
  std::size_t bin(double v) const;

 private:
  friend UGrid balanced_grid(std::size_t L);

  std::vector<double> thresholds_;
  std::vector<double> widths_;
};

/// Thresholds l/L, l = 0..L.
UGrid balanced_grid(std::size_t L);

/// L x J cross-classification of (V_i, X_i).
class ContingencyTable {
 public:
  ContingencyTable(std::size_t L, std::size_t J, std::vector<std::int64_t> observed_row_major,
                   std::vector<double> widths);

  std::size_t L() const noexcept { return L_; }
  std::size_t J() const noexcept { return J_; }
  std::int64_t n() const noexcept { return n_; }

  std::int64_t observed(std::size_t l, std::size_t j) const noexcept { return O_[l * J_ + j]; }
  const std::vector<std::int64_t>& observed() const noexcept { return O_; }
  const std::vector<std::int64_t>& column_counts() const noexcept { return column_counts_; }
  const std::vector<double>& widths() const noexcept { return widths_; }
  const std::vector<double>& q_hat() const noexcept { return q_hat_; }

  /// N_j |U_l|.
  double expected(std::size_t l, std::size_t j) const noexcept {
    return static_cast<double>(column_counts_[j]) * widths_[l];
  }

 private:
  std::size_t L_;
  std::size_t J_;
  std::vector<std::int64_t> O_;
  std::vector<std::int64_t> column_counts_;
  std::int64_t n_ = 0;
  std::vector<double> widths_;
  std::vector<double> q_hat_;
};

/// Flat cell index l * J + j of every observation.
std::vector<std::size_t> classify_observations(std::span<const double> v, const Covariates& x,
                                               const UGrid& grid, const Partition& partition);

ContingencyTable cross_classify(std::span<const double> v, const Covariates& x, const UGrid& grid,
                                const Partition& partition);

}  // namespace cgof
