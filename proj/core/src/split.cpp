// Copyright 2026 The dsfgan Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <numeric>

#include "dsfgan/errors.hpp"
#include "dsfgan/random.hpp"
#include "dsfgan/tabular.hpp"

namespace dsfgan {

std::vector<std::vector<std::size_t>> kfold_split(std::size_t row_count, std::size_t k,
                                                  std::uint64_t seed) {
  if (k < 2) throw ConfigError("kfold_split: k must be at least 2");
  if (row_count < k) {
    throw ConfigError("kfold_split: " + std::to_string(row_count) + " rows cannot fill " +
                      std::to_string(k) + " folds");
  }
  std::vector<std::size_t> order(row_count);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(derive_seed(seed, "kfold"));
  for (std::size_t i = row_count; i > 1; --i) std::swap(order[i - 1], order[rng.index(i)]);

  std::vector<std::vector<std::size_t>> folds(k);
  const std::size_t base = row_count / k;
  const std::size_t extra = row_count % k;
  std::size_t pos = 0;
  for (std::size_t f = 0; f < k; ++f) {
    const std::size_t size = base + (f < extra ? 1 : 0);
    folds[f].assign(order.begin() + static_cast<std::ptrdiff_t>(pos),
                    order.begin() + static_cast<std::ptrdiff_t>(pos + size));
    std::sort(folds[f].begin(), folds[f].end());
    pos += size;
  }
  return folds;
}

}  // namespace dsfgan
