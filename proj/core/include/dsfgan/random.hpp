// Copyright 2026 The dsfgan Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string_view>

namespace dsfgan {

/// Derives an independent 64-bit seed for a named sub-stream, e.g.
/// derive_seed(seed, "fold", 3). Stable across platforms.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view stream, std::uint64_t index = 0);

/// Seeded random source. All randomness in the library flows through one of
/// these; there is no global generator.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform in the open interval (0, 1).
  double uniform();
  double normal();
  /// Uniform integer in [0, n).
  std::size_t index(std::size_t n);
  /// Draws an index with probability proportional to weights (non-negative, not all zero).
  std::size_t categorical(std::span<const double> weights);

  /// Child generator for a named sub-stream, seeded from this generator's next output.
  Rng fork(std::string_view stream);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace dsfgan
