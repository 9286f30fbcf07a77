// Copyright 2026 The dsfgan Authors
// SPDX-License-Identifier: Apache-2.0
//
// Synthetic datasets with a known generating process.

#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

#include "dsfgan/tabular.hpp"

namespace dsfgan::testing {

/// Three continuous features, one 3-level categorical feature and a binary
/// label from a fixed linear rule with 5% label flips. About 30% positive.
RawTable toy_classification(std::size_t rows, std::uint64_t seed);
SchemaConfig toy_classification_config();

/// Same features; the target is linear in them plus Gaussian noise.
RawTable toy_regression(std::size_t rows, std::uint64_t seed);
SchemaConfig toy_regression_config();

/// Writes `table` as CSV to `path`.
void write_table(const RawTable& table, const std::string& path);
/// Writes `config` as schema-config JSON to `path`.
void write_config(const SchemaConfig& config, const std::string& path);

}  // namespace dsfgan::testing
