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
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "cgof/model.hpp"
#include "cgof/rng.hpp"

namespace cgof {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Read-only view of an n x k row-major covariate matrix.
class Covariates {
 public:
  Covariates(std::span<const double> values, std::size_t n, std::size_t k);
  explicit Covariates(const Dataset& data) : Covariates(data.x(), data.n(), data.k()) {}

  std::size_t n() const noexcept { return n_; }
  std::size_t k() const noexcept { return k_; }
  double operator()(std::size_t i, std::size_t d) const noexcept { return values_[i * k_ + d]; }
  std::span<const double> row(std::size_t i) const noexcept { return values_.subspan(i * k_, k_); }

 private:
  std::span<const double> values_;
  std::size_t n_;
  std::size_t k_;
};

/// Axis-aligned box {x : lower_d < x_d <= upper_d for all d}; bounds may be infinite.
struct Cell {
  std::vector<double> lower;
  std::vector<double> upper;

  static Cell whole_space(std::size_t k) {
    return Cell{std::vector<double>(k, -kInf), std::vector<double>(k, kInf)};
  }

  bool contains(std::span<const double> x) const noexcept {
    for (std::size_t d = 0; d < lower.size(); ++d) {
      if (!(lower[d] < x[d] && x[d] <= upper[d])) return false;
    }
    return true;
  }

  bool operator==(const Cell&) const = default;
};

enum class PartitionOrigin { fixed, gessaman, rtp };

std::string_view to_string(PartitionOrigin origin) noexcept;
PartitionOrigin partition_origin_from_string(std::string_view text);

struct RtpNode {
  std::size_t creation_index = 0;
  std::size_t depth = 0;
  std::size_t count = 0;  // training points in the node
  Cell cell;
  bool terminal = true;
  std::size_t axis = 0;              // 0-based split axis, internal nodes only
  std::vector<double> thresholds;    // T-1 increasing cut points
  std::vector<std::size_t> children; // indices into RtpTree::nodes
};

struct RtpTree {
  std::vector<RtpNode> nodes;  // nodes[i].creation_index == i

  std::size_t terminal_count() const noexcept;
  /// Number of splits made along each axis.
  std::vector<std::size_t> split_counts(std::size_t k) const;
  /// Depths of the terminal nodes, in creation order.
  std::vector<std::size_t> terminal_depths() const;
};

/// Multiset of axes still available to the tree builder.
class AxisMultiset {
 public:
  AxisMultiset(std::vector<std::size_t> multiplicity);

  static AxisMultiset uniform(std::size_t k, std::size_t r) {
    return AxisMultiset(std::vector<std::size_t>(k, r));
  }
  /// Length (T^q - 1)/(T - 1) for the smallest q reaching k*r, spread round-robin.
  static AxisMultiset equal_depth(std::size_t k, std::size_t r, std::size_t T);

  std::size_t total() const noexcept { return total_; }
  bool empty() const noexcept { return total_ == 0; }
  std::size_t multiplicity(std::size_t axis) const { return counts_.at(axis); }

  /// Draws an element uniformly from the multiset (axes weighted by multiplicity).
  std::size_t draw(CounterRng& rng) const;
  void remove_one(std::size_t axis);

 private:
  std::vector<std::size_t> counts_;
  std::size_t total_ = 0;
};

struct RtpOptions {
  std::size_t T = 2;
  std::size_t r = 1;
  std::uint64_t seed = 0;
  bool equal_depth = false;
};

/// J disjoint cells covering R^k. Immutable once built.
class Partition {
 public:
  Partition(std::vector<Cell> cells, std::size_t k, PartitionOrigin origin = PartitionOrigin::fixed);

  std::size_t size() const noexcept { return cells_.size(); }
  std::size_t k() const noexcept { return k_; }
  const std::vector<Cell>& cells() const noexcept { return cells_; }
  PartitionOrigin origin() const noexcept { return origin_; }

  std::optional<std::uint64_t> seed() const noexcept { return seed_; }
  std::optional<std::size_t> T() const noexcept { return T_; }
  std::optional<std::size_t> r() const noexcept { return r_; }
  bool equal_depth() const noexcept { return equal_depth_; }
  const RtpTree* tree() const noexcept { return tree_.get(); }

  /// 0-based index of the cell containing x. Throws invalid_argument when the
  /// cells do not cover x (only possible for hand-built partitions).
  std::size_t locate(std::span<const double> x) const;

  std::vector<std::size_t> counts(const Covariates& x) const;

 private:
  friend Partition gessaman_partition(const Covariates&, std::size_t);
  friend Partition rtp_partition(const Covariates&, const RtpOptions&);
  friend Partition partition_with_metadata(Partition, std::optional<std::uint64_t>,
                                           std::optional<std::size_t>, std::optional<std::size_t>,
                                           bool);

  std::vector<Cell> cells_;
  std::size_t k_;
  PartitionOrigin origin_;
  std::optional<std::uint64_t> seed_;
  std::optional<std::size_t> T_;
  std::optional<std::size_t> r_;
  bool equal_depth_ = false;
  std::shared_ptr<const RtpTree> tree_;
};

/// Attaches rule metadata (used when reloading a serialized partition).
Partition partition_with_metadata(Partition p, std::optional<std::uint64_t> seed,
                                  std::optional<std::size_t> T, std::optional<std::size_t> r,
                                  bool equal_depth);

/// Product of T equal-count slabs per axis, split recursively axis by axis; J = T^k.
Partition gessaman_partition(const Covariates& x, std::size_t T);

/// Random tree partition; J = 1 + k r (T - 1) cells (or T^q with equal_depth).
Partition rtp_partition(const Covariates& x, const RtpOptions& options);

/// Product grid with the given interior cut points per axis (each strictly increasing).
Partition grid_partition(const std::vector<std::vector<double>>& cuts);

inline std::size_t rtp_cell_count(std::size_t k, std::size_t r, std::size_t T) {
  return 1 + k * r * (T - 1);
}

}  // namespace cgof
