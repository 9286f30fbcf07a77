// Copyright 2026 The dsfgan Authors
// SPDX-License-Identifier: Apache-2.0

#include "dsfgan/digest.hpp"

#include <bit>
#include <cstdio>

namespace dsfgan {
namespace {

void mix(std::uint64_t& state, std::uint64_t word) {
  for (int i = 0; i < 8; ++i) {
    state ^= (word >> (8 * i)) & 0xffU;
    state *= 0x100000001b3ULL;
  }
}

}  // namespace

Digest& Digest::update(std::string_view bytes) {
  for (unsigned char c : bytes) {
    state_ ^= c;
    state_ *= 0x100000001b3ULL;
  }
  return *this;
}

Digest& Digest::update(std::span<const double> values) {
  for (double v : values) mix(state_, std::bit_cast<std::uint64_t>(v));
  return *this;
}

Digest& Digest::update(std::span<const std::size_t> values) {
  for (std::size_t v : values) mix(state_, static_cast<std::uint64_t>(v));
  return *this;
}

Digest& Digest::update(const Tensor& t) {
  const std::size_t shape[2] = {t.rows(), t.cols()};
  update(std::span<const std::size_t>(shape));
  return update(t.data());
}

std::string Digest::hex() const {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(state_));
  return buf;
}

}  // namespace dsfgan
