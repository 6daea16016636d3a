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

#include "cgof/partition.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "cgof/error.hpp"

namespace cgof {

namespace {

struct AxisSplit {
  std::vector<double> thresholds;
  std::vector<std::vector<std::size_t>> groups;
};

std::size_t int_pow(std::size_t base, std::size_t exp) {
  std::size_t result = 1;
  for (std::size_t e = 0; e < exp; ++e) {
    if (result > std::numeric_limits<std::size_t>::max() / base) {
      return std::numeric_limits<std::size_t>::max();
    }
    result *= base;
  }
  return result;
}

// Splits the points `idx` of a cell whose extent along `axis` is (lo, hi] into
// T groups of sizes ceil(m/T) (first m mod T groups) and floor(m/T). Each cut
// sits at the coordinate of the last point of its left group; ties are ordered
// by row index. With duplicated coordinates a cut is moved to the next distinct
// value so cells stay non-degenerate, and groups follow the cuts.
AxisSplit equal_count_split(const Covariates& x, std::vector<std::size_t> idx, std::size_t axis,
                            std::size_t T, double hi) {
  const std::size_t m = idx.size();
  if (m < T) {
    fail(ErrorKind::insufficient_data, "cannot split a cell holding " + std::to_string(m) +
                                           " points into " + std::to_string(T) +
                                           " non-empty groups");
  }
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    const double xa = x(a, axis);
    const double xb = x(b, axis);
    return xa < xb || (xa == xb && a < b);
  });

  AxisSplit split;
  split.thresholds.reserve(T - 1);
  const std::size_t base = m / T;
  const std::size_t extra = m % T;
  std::size_t end = 0;
  for (std::size_t g = 0; g + 1 < T; ++g) {
    end += base + (g < extra ? 1 : 0);
    double cut = x(idx[end - 1], axis);
    if (!split.thresholds.empty() && cut <= split.thresholds.back()) {
      const double prev = split.thresholds.back();
      auto it = std::upper_bound(idx.begin(), idx.end(), prev,
                                 [&](double v, std::size_t i) { return v < x(i, axis); });
      if (it == idx.end()) {
        fail(ErrorKind::insufficient_data,
             "too few distinct values along axis " + std::to_string(axis + 1) + " to split");
      }
      cut = x(*it, axis);
    }
    if (!(cut < hi)) {
      fail(ErrorKind::insufficient_data,
           "too few distinct values along axis " + std::to_string(axis + 1) + " to split");
    }
    split.thresholds.push_back(cut);
  }

  split.groups.resize(T);
  std::size_t g = 0;
  for (std::size_t i : idx) {
    while (g + 1 < T && x(i, axis) > split.thresholds[g]) ++g;
    split.groups[g].push_back(i);
  }
  for (const auto& group : split.groups) {
    if (group.empty()) {
      fail(ErrorKind::insufficient_data,
           "too few distinct values along axis " + std::to_string(axis + 1) + " to split");
    }
  }
  return split;
}

Cell child_cell(const Cell& parent, std::size_t axis, const std::vector<double>& thresholds,
                std::size_t g) {
  Cell c = parent;
  if (g > 0) c.lower[axis] = thresholds[g - 1];
  if (g < thresholds.size()) c.upper[axis] = thresholds[g];
  return c;
}

void gessaman_recurse(const Covariates& x, const Cell& cell, std::vector<std::size_t> idx,
                      std::size_t axis, std::size_t T, std::vector<Cell>& out) {
  if (axis == x.k()) {
    out.push_back(cell);
    return;
  }
  AxisSplit split = equal_count_split(x, std::move(idx), axis, T, cell.upper[axis]);
  for (std::size_t g = 0; g < T; ++g) {
    gessaman_recurse(x, child_cell(cell, axis, split.thresholds, g), std::move(split.groups[g]),
                     axis + 1, T, out);
  }
}

}  // namespace

Covariates::Covariates(std::span<const double> values, std::size_t n, std::size_t k)
    : values_(values), n_(n), k_(k) {
  if (k == 0) fail(ErrorKind::invalid_argument, "covariates need k >= 1");
  if (values.size() != n * k) fail(ErrorKind::invalid_argument, "covariate matrix size mismatch");
}

std::string_view to_string(PartitionOrigin origin) noexcept {
  switch (origin) {
    case PartitionOrigin::fixed: return "fixed";
    case PartitionOrigin::gessaman: return "gessaman";
    case PartitionOrigin::rtp: return "rtp";
  }
  return "fixed";
}

PartitionOrigin partition_origin_from_string(std::string_view text) {
  if (text == "fixed") return PartitionOrigin::fixed;
  if (text == "gessaman") return PartitionOrigin::gessaman;
  if (text == "rtp") return PartitionOrigin::rtp;
  fail(ErrorKind::invalid_argument, "unknown partition origin '" + std::string(text) + "'");
}

// ---------------------------------------------------------------------------

std::size_t RtpTree::terminal_count() const noexcept {
  return static_cast<std::size_t>(
      std::count_if(nodes.begin(), nodes.end(), [](const RtpNode& n) { return n.terminal; }));
}

std::vector<std::size_t> RtpTree::split_counts(std::size_t k) const {
  std::vector<std::size_t> counts(k, 0);
  for (const auto& node : nodes) {
    if (!node.terminal) ++counts.at(node.axis);
  }
  return counts;
}

std::vector<std::size_t> RtpTree::terminal_depths() const {
  std::vector<std::size_t> depths;
  for (const auto& node : nodes) {
    if (node.terminal) depths.push_back(node.depth);
  }
  return depths;
}

// ---------------------------------------------------------------------------

AxisMultiset::AxisMultiset(std::vector<std::size_t> multiplicity)
    : counts_(std::move(multiplicity)),
      total_(std::accumulate(counts_.begin(), counts_.end(), std::size_t{0})) {}

AxisMultiset AxisMultiset::equal_depth(std::size_t k, std::size_t r, std::size_t T) {
  const std::size_t target = k * r;
  std::size_t length = 1;  // (T^q - 1)/(T - 1) for q = 1
  std::size_t power = T;
  while (length < target) {
    length += power;
    power *= T;
  }
  std::vector<std::size_t> counts(k, length / k);
  for (std::size_t d = 0; d < length % k; ++d) ++counts[d];
  return AxisMultiset(std::move(counts));
}

std::size_t AxisMultiset::draw(CounterRng& rng) const {
  if (total_ == 0) fail(ErrorKind::invalid_argument, "axis multiset is empty");
  std::uint64_t pick = rng.uniform_index(total_);
  for (std::size_t d = 0; d < counts_.size(); ++d) {
    if (pick < counts_[d]) return d;
    pick -= counts_[d];
  }
  return counts_.size() - 1;
}

void AxisMultiset::remove_one(std::size_t axis) {
  if (counts_.at(axis) == 0) fail(ErrorKind::invalid_argument, "axis not in multiset");
  --counts_[axis];
  --total_;
}

// ---------------------------------------------------------------------------

Partition::Partition(std::vector<Cell> cells, std::size_t k, PartitionOrigin origin)
    : cells_(std::move(cells)), k_(k), origin_(origin) {
  if (k_ == 0) fail(ErrorKind::invalid_argument, "partition needs k >= 1");
  if (cells_.empty()) fail(ErrorKind::invalid_argument, "partition needs at least one cell");
  for (const auto& c : cells_) {
    if (c.lower.size() != k_ || c.upper.size() != k_) {
      fail(ErrorKind::invalid_argument, "cell dimension does not match k");
    }
    for (std::size_t d = 0; d < k_; ++d) {
      if (std::isnan(c.lower[d]) || std::isnan(c.upper[d]) || !(c.lower[d] < c.upper[d])) {
        fail(ErrorKind::invalid_argument, "cell bounds must satisfy lower < upper");
      }
    }
  }
}

std::size_t Partition::locate(std::span<const double> x) const {
  for (std::size_t j = 0; j < cells_.size(); ++j) {
    if (cells_[j].contains(x)) return j;
  }
  fail(ErrorKind::invalid_argument, "point is not covered by the partition");
}

std::vector<std::size_t> Partition::counts(const Covariates& x) const {
  if (x.k() != k_) fail(ErrorKind::invalid_argument, "covariate dimension does not match partition");
  std::vector<std::size_t> counts(cells_.size(), 0);
  for (std::size_t i = 0; i < x.n(); ++i) ++counts[locate(x.row(i))];
  return counts;
}

Partition partition_with_metadata(Partition p, std::optional<std::uint64_t> seed,
                                  std::optional<std::size_t> T, std::optional<std::size_t> r,
                                  bool equal_depth) {
  p.seed_ = seed;
  p.T_ = T;
  p.r_ = r;
  p.equal_depth_ = equal_depth;
  return p;
}

Partition gessaman_partition(const Covariates& x, std::size_t T) {
  if (T < 2) fail(ErrorKind::invalid_argument, "gessaman partition needs T >= 2");
  const std::size_t J = int_pow(T, x.k());
  if (x.n() < J) {
    fail(ErrorKind::insufficient_data, "gessaman partition with T=" + std::to_string(T) +
                                           " and k=" + std::to_string(x.k()) + " needs n >= " +
                                           std::to_string(J) + ", got n=" + std::to_string(x.n()));
  }
  std::vector<std::size_t> idx(x.n());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::vector<Cell> cells;
  cells.reserve(J);
  gessaman_recurse(x, Cell::whole_space(x.k()), std::move(idx), 0, T, cells);
  Partition p(std::move(cells), x.k(), PartitionOrigin::gessaman);
  p.T_ = T;
  return p;
}

Partition rtp_partition(const Covariates& x, const RtpOptions& options) {
  const std::size_t T = options.T;
  const std::size_t k = x.k();
  if (T < 2) fail(ErrorKind::invalid_argument, "rtp partition needs T >= 2");
  if (options.r < 1) fail(ErrorKind::invalid_argument, "rtp partition needs r >= 1");

  AxisMultiset axes = options.equal_depth ? AxisMultiset::equal_depth(k, options.r, T)
                                          : AxisMultiset::uniform(k, options.r);
  const std::size_t J = 1 + axes.total() * (T - 1);
  if (x.n() < J) {
    fail(ErrorKind::insufficient_data, "rtp partition with J=" + std::to_string(J) +
                                           " cells needs n >= " + std::to_string(J) +
                                           ", got n=" + std::to_string(x.n()));
  }

  auto tree = std::make_shared<RtpTree>();
  std::vector<std::vector<std::size_t>> members;

  RtpNode root;
  root.cell = Cell::whole_space(k);
  root.count = x.n();
  tree->nodes.push_back(root);
  members.emplace_back(x.n());
  std::iota(members[0].begin(), members[0].end(), std::size_t{0});

  CounterRng rng(options.seed);
  std::size_t current = 0;
  while (true) {
    const std::size_t axis = axes.draw(rng);
    AxisSplit split = equal_count_split(x, std::move(members[current]), axis, T,
                                        tree->nodes[current].cell.upper[axis]);
    members[current].clear();

    RtpNode& parent = tree->nodes[current];
    parent.terminal = false;
    parent.axis = axis;
    parent.thresholds = split.thresholds;
    const Cell parent_cell = parent.cell;
    const std::size_t child_depth = parent.depth + 1;
    for (std::size_t g = 0; g < T; ++g) {
      RtpNode child;
      child.creation_index = tree->nodes.size();
      child.depth = child_depth;
      child.count = split.groups[g].size();
      child.cell = child_cell(parent_cell, axis, split.thresholds, g);
      tree->nodes[current].children.push_back(child.creation_index);
      tree->nodes.push_back(std::move(child));
      members.push_back(std::move(split.groups[g]));
    }
    axes.remove_one(axis);
    if (axes.empty()) break;

    // Largest terminal node next; ties go to the earliest created.
    std::size_t best = tree->nodes.size();
    for (std::size_t i = 0; i < tree->nodes.size(); ++i) {
      const auto& node = tree->nodes[i];
      if (node.terminal && (best == tree->nodes.size() || node.count > tree->nodes[best].count)) {
        best = i;
      }
    }
    current = best;
  }

  std::vector<Cell> cells;
  cells.reserve(J);
  for (const auto& node : tree->nodes) {
    if (node.terminal) cells.push_back(node.cell);
  }
  Partition p(std::move(cells), k, PartitionOrigin::rtp);
  p.seed_ = options.seed;
  p.T_ = T;
  p.r_ = options.r;
  p.equal_depth_ = options.equal_depth;
  p.tree_ = std::move(tree);
  return p;
}

Partition grid_partition(const std::vector<std::vector<double>>& cuts) {
  const std::size_t k = cuts.size();
  if (k == 0) fail(ErrorKind::invalid_argument, "grid partition needs at least one axis");
  for (const auto& axis_cuts : cuts) {
    for (std::size_t i = 0; i < axis_cuts.size(); ++i) {
      if (!std::isfinite(axis_cuts[i]) || (i > 0 && !(axis_cuts[i - 1] < axis_cuts[i]))) {
        fail(ErrorKind::invalid_argument, "grid cuts must be finite and strictly increasing");
      }
    }
  }
  std::vector<Cell> cells{Cell::whole_space(k)};
  for (std::size_t d = 0; d < k; ++d) {
    std::vector<Cell> next;
    for (const auto& cell : cells) {
      for (std::size_t g = 0; g <= cuts[d].size(); ++g) {
        next.push_back(child_cell(cell, d, cuts[d], g));
      }
    }
    cells = std::move(next);
  }
  return Partition(std::move(cells), k, PartitionOrigin::fixed);
}

}  // namespace cgof
