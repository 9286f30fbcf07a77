// Copyright 2026 The dsfgan Authors
// SPDX-License-Identifier: Apache-2.0
//
// Tabular data: CSV ingestion, per-column encoders and the encoded layout the
// GAN works in.
//
// Encoded layout, one segment per column in schema order:
//   continuous   [alpha, mode_0 .. mode_{K-1}]  alpha = (c - mu_k) / (4 sigma_k), clipped to [-1, 1]
//   categorical  [cat_0 .. cat_{C-1}]           one-hot
//
// Schemas are immutable once fitted and may be shared between threads.

#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "dsfgan/tensor.hpp"

namespace dsfgan {

class Rng;

inline constexpr int kFormatVersion = 1;

enum class ColumnKind { kContinuous, kCategorical };
enum class TaskKind { kClassification, kRegression };

const char* to_string(ColumnKind kind);
const char* to_string(TaskKind kind);
ColumnKind parse_column_kind(const std::string& s);
TaskKind parse_task_kind(const std::string& s);

// ---------------------------------------------------------------------------
// Raw rows
// ---------------------------------------------------------------------------

using Value = std::variant<double, std::string>;
using Row = std::vector<Value>;

/// Which CSV columns to use, how to type them, and the prediction target.
struct SchemaConfig {
  struct Column {
    std::string name;
    ColumnKind kind;
  };
  std::vector<Column> columns;  // order is irrelevant; tables follow CSV header order
  std::string target;
  TaskKind task = TaskKind::kClassification;
  std::optional<std::string> positive_class;
  std::vector<std::string> missing_tokens{"", "?", "NA"};

  const Column* find(const std::string& name) const;

  /// Throws ConfigError on unknown kinds, a missing target, or a target
  /// whose kind does not fit the task.
  static SchemaConfig from_json(const nlohmann::json& j);
  static SchemaConfig load(const std::string& path);
  nlohmann::json to_json() const;
};

struct RawTable {
  std::vector<std::string> names;
  std::vector<ColumnKind> kinds;
  std::vector<Row> rows;
  std::size_t dropped_rows = 0;

  std::size_t column_index(const std::string& name) const;
  std::size_t size() const noexcept { return rows.size(); }
  RawTable subset(std::span<const std::size_t> indices) const;
};

/// Reads a comma-delimited CSV with a header row. Only configured columns are
/// kept, in header order. Rows with a missing token or an unparseable number
/// in a kept column are dropped and counted.
/// Errors: DataError (missing file, zero usable rows), ConfigError (a
/// configured column is absent from the header).
RawTable load_csv(const std::string& path, const SchemaConfig& config);
RawTable parse_csv(std::istream& in, const SchemaConfig& config);

/// Writes rows with a header; doubles use shortest round-trip formatting.
void write_csv(std::ostream& out, const std::vector<std::string>& names,
               std::span<const Row> rows);

// ---------------------------------------------------------------------------
// Gaussian mixture for mode-specific normalization
// ---------------------------------------------------------------------------

struct MixtureMode {
  double mean = 0.0;
  double stddev = 1.0;
  double weight = 1.0;
};

struct GmmConfig {
  std::size_t max_modes = 10;
  int max_iterations = 100;
  /// Convergence threshold on the change of mean per-sample log-likelihood.
  double tolerance = 1e-6;
  double prune_weight = 1e-3;
};

/// Variance floor for a column with the given value range.
double variance_floor(double range);

/// EM-fitted 1-D mixture. Fits every mode count up to max_modes (bounded by
/// the number of distinct values), keeps the lowest-BIC fit, prunes modes with
/// weight below prune_weight and renormalizes. A constant column yields one
/// mode at the value with stddev = sqrt(variance_floor).
std::vector<MixtureMode> fit_gmm(std::span<const double> values, const GmmConfig& config,
                                 Rng& rng);

// ---------------------------------------------------------------------------
// Fitted schema
// ---------------------------------------------------------------------------

struct ColumnMeta {
  std::string name;
  ColumnKind kind = ColumnKind::kContinuous;
  bool is_target = false;
  // categorical
  std::vector<std::string> categories;  // sorted, unique
  std::vector<std::size_t> category_counts;  // frequency in the fitting rows
  // continuous
  std::vector<MixtureMode> modes;
  double min = 0.0;
  double max = 0.0;

  std::size_t width() const {
    return kind == ColumnKind::kCategorical ? categories.size() : 1 + modes.size();
  }
  std::optional<std::size_t> category_index(const std::string& value) const;
};

struct ColumnLayout {
  std::size_t offset = 0;
  std::size_t width = 0;
};

/// A categorical column's slot inside the encoded row and inside the
/// condition vector (which concatenates only the categorical segments).
struct CategoricalSegment {
  std::size_t column = 0;
  std::size_t encoded_offset = 0;
  std::size_t cond_offset = 0;
  std::size_t width = 0;
};

class TableSchema {
 public:
  TableSchema() = default;
  TableSchema(std::vector<ColumnMeta> columns, TaskKind task, std::size_t positive_index);

  /// Fits encoders. Category vocabularies come from every row of `table` so
  /// held-out rows always encode; mixtures, ranges and category counts come
  /// from `fit_rows` only (all rows when empty).
  static TableSchema fit(const RawTable& table, const SchemaConfig& config,
                         const GmmConfig& gmm, Rng& rng,
                         std::span<const std::size_t> fit_rows = {});

  const std::vector<ColumnMeta>& columns() const noexcept { return columns_; }
  const std::vector<ColumnLayout>& layout() const noexcept { return layout_; }
  const std::vector<CategoricalSegment>& categorical_segments() const noexcept {
    return segments_;
  }
  std::size_t width() const noexcept { return width_; }
  std::size_t cond_width() const noexcept { return cond_width_; }
  TaskKind task() const noexcept { return task_; }
  std::size_t target_index() const noexcept { return target_; }
  const ColumnMeta& target() const { return columns_[target_]; }
  const ColumnLayout& target_layout() const { return layout_[target_]; }
  /// Index of the positive class within the (binary) target's categories.
  std::size_t positive_index() const noexcept { return positive_; }
  std::vector<std::string> names() const;

  /// Throws DataError for unseen categories or rows of the wrong arity.
  std::vector<double> encode_row(const Row& row, Rng& rng) const;
  Tensor encode(std::span<const Row> rows, Rng& rng) const;

  /// Inverse of encode_row; soft one-hots resolve by argmax.
  Row decode_row(std::span<const double> encoded) const;
  std::vector<Row> decode(const Tensor& encoded) const;

  /// Downstream label of a raw row: 1/0 for the positive class, or the
  /// min-max scaled target value for regression.
  double label(const Row& row) const;
  double scale_target(double value) const;

  nlohmann::json to_json() const;
  /// Throws ConfigError on malformed documents.
  static TableSchema from_json(const nlohmann::json& j);

 private:
  void build_layout();

  std::vector<ColumnMeta> columns_;
  std::vector<ColumnLayout> layout_;
  std::vector<CategoricalSegment> segments_;
  std::size_t width_ = 0;
  std::size_t cond_width_ = 0;
  TaskKind task_ = TaskKind::kClassification;
  std::size_t target_ = 0;
  std::size_t positive_ = 0;
};

// ---------------------------------------------------------------------------
// Splits
// ---------------------------------------------------------------------------

/// Shuffles 0..row_count-1 and deals it into k folds whose sizes differ by at
/// most one (the first row_count % k folds get the extra row). Each fold is
/// sorted. Throws ConfigError when k < 2 or row_count < k.
std::vector<std::vector<std::size_t>> kfold_split(std::size_t row_count, std::size_t k,
                                                  std::uint64_t seed);

}  // namespace dsfgan
