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

#include <cstdint>
#include <optional>

namespace cgof {

/// Counter-based 64-bit generator (SplitMix64 output function).
///
/// The i-th draw of a stream with key `k` is `mix64(k + (i + 1) * golden_gamma)`,
/// so a stream is fully described by (key, counter) and the output sequence is
/// identical on every platform. Independent substreams are obtained by hashing
/// a substream index into a fresh key; Monte Carlo replication `r` of an
/// experiment with master seed `s` uses `CounterRng(s).substream(r)`.
///
/// Normal variates use the Marsaglia polar method, which needs only `log` and
/// `sqrt`; the spare variate is part of the generator state.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) noexcept : key_(mix64(seed ^ kSeedSalt)) {}

  static std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t next_u64() noexcept {
    ++counter_;
    return mix64(key_ + counter_ * kGoldenGamma);
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform on the open interval (0, 1).
  double uniform_open() noexcept {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

  /// Unbiased integer in [0, bound) (Lemire's multiply-and-reject).
  std::uint64_t uniform_index(std::uint64_t bound) noexcept;

  double normal() noexcept;

  double exponential() noexcept;

  /// Independent generator for substream `index`.
  CounterRng substream(std::uint64_t index) const noexcept {
    CounterRng child(0);
    child.key_ = mix64(key_ ^ mix64(index + kStreamSalt));
    return child;
  }

  std::uint64_t key() const noexcept { return key_; }
  std::uint64_t counter() const noexcept { return counter_; }

 private:
  static constexpr std::uint64_t kGoldenGamma = 0x9e3779b97f4a7c15ULL;
  static constexpr std::uint64_t kSeedSalt = 0x243f6a8885a308d3ULL;
  static constexpr std::uint64_t kStreamSalt = 0x13198a2e03707344ULL;

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  std::optional<double> spare_normal_;
};

}  // namespace cgof
