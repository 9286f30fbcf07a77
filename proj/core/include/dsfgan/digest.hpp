// Copyright 2026 The dsfgan Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>

#include "dsfgan/tensor.hpp"

namespace dsfgan {

/// Incremental 64-bit FNV-1a. Used for provenance digests and for comparing
/// parameter sets bit-for-bit; not a cryptographic hash.
class Digest {
 public:
  Digest& update(std::string_view bytes);
  Digest& update(std::span<const double> values);
  Digest& update(std::span<const std::size_t> values);
  Digest& update(const Tensor& t);
  std::uint64_t value() const noexcept { return state_; }
  /// 16 lowercase hex digits.
  std::string hex() const;

 private:
  std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

}  // namespace dsfgan
