// Copyright 2026 The dsfgan Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include "dsfgan/errors.hpp"
#include "dsfgan/random.hpp"
#include "dsfgan/tabular.hpp"

namespace dsfgan {
namespace {

std::size_t argmax(std::span<const double> v) {
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

}  // namespace

std::optional<std::size_t> ColumnMeta::category_index(const std::string& value) const {
  auto it = std::lower_bound(categories.begin(), categories.end(), value);
  if (it == categories.end() || *it != value) return std::nullopt;
  return static_cast<std::size_t>(it - categories.begin());
}

TableSchema::TableSchema(std::vector<ColumnMeta> columns, TaskKind task, std::size_t positive_index)
    : columns_(std::move(columns)), task_(task), positive_(positive_index) {
  std::size_t targets = 0;
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    const ColumnMeta& c = columns_[i];
    if (c.is_target) {
      target_ = i;
      ++targets;
    }
    if (c.kind == ColumnKind::kCategorical) {
      if (c.categories.empty()) throw ConfigError("column '" + c.name + "' has no categories");
      if (std::adjacent_find(c.categories.begin(), c.categories.end(),
                             [](const auto& a, const auto& b) { return !(a < b); }) !=
          c.categories.end()) {
        throw ConfigError("column '" + c.name + "' categories must be sorted and unique");
      }
      if (!c.category_counts.empty() && c.category_counts.size() != c.categories.size()) {
        throw ConfigError("column '" + c.name + "' category counts do not match categories");
      }
    } else if (c.modes.empty()) {
      throw ConfigError("column '" + c.name + "' has no mixture modes");
    }
  }
  if (targets != 1) {
    throw ConfigError("schema must have exactly one target column, found " +
                      std::to_string(targets));
  }
  const ColumnMeta& t = columns_[target_];
  if (task_ == TaskKind::kClassification) {
    if (t.kind != ColumnKind::kCategorical || t.categories.size() != 2) {
      throw DataError("classification target '" + t.name + "' must be binary categorical, has " +
                      std::to_string(t.categories.size()) + " categories");
    }
    if (positive_ >= 2) throw ConfigError("positive class index out of range");
  } else if (t.kind != ColumnKind::kContinuous) {
    throw ConfigError("regression target '" + t.name + "' must be continuous");
  }
  build_layout();
}

void TableSchema::build_layout() {
  layout_.clear();
  segments_.clear();
  width_ = 0;
  cond_width_ = 0;
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    const std::size_t w = columns_[i].width();
    layout_.push_back({width_, w});
    if (columns_[i].kind == ColumnKind::kCategorical) {
      segments_.push_back({i, width_, cond_width_, w});
      cond_width_ += w;
    }
    width_ += w;
  }
}

TableSchema TableSchema::fit(const RawTable& table, const SchemaConfig& config,
                             const GmmConfig& gmm, Rng& rng,
                             std::span<const std::size_t> fit_rows) {
  std::vector<std::size_t> all;
  if (fit_rows.empty()) {
    all.resize(table.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    fit_rows = all;
  }
  if (fit_rows.empty()) throw DataError("cannot fit a schema on zero rows");

  std::vector<ColumnMeta> columns;
  for (std::size_t c = 0; c < table.names.size(); ++c) {
    ColumnMeta meta;
    meta.name = table.names[c];
    meta.kind = table.kinds[c];
    meta.is_target = meta.name == config.target;
    if (meta.kind == ColumnKind::kCategorical) {
      std::set<std::string> vocab;
      for (const Row& r : table.rows) vocab.insert(std::get<std::string>(r[c]));
      meta.categories.assign(vocab.begin(), vocab.end());
      meta.category_counts.assign(meta.categories.size(), 0);
      for (std::size_t i : fit_rows) {
        ++meta.category_counts[*meta.category_index(std::get<std::string>(table.rows[i][c]))];
      }
    } else {
      std::vector<double> values;
      values.reserve(fit_rows.size());
      for (std::size_t i : fit_rows) values.push_back(std::get<double>(table.rows[i][c]));
      const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
      meta.min = *lo;
      meta.max = *hi;
      Rng column_rng = rng.fork(meta.name);
      meta.modes = fit_gmm(values, gmm, column_rng);
    }
    columns.push_back(std::move(meta));
  }

  std::size_t positive = 0;
  if (config.task == TaskKind::kClassification) {
    auto target = std::find_if(columns.begin(), columns.end(),
                               [](const ColumnMeta& m) { return m.is_target; });
    if (target != columns.end() && target->categories.size() == 2) {
      if (config.positive_class) {
        auto idx = target->category_index(*config.positive_class);
        if (!idx) {
          throw ConfigError("positive class '" + *config.positive_class +
                            "' does not occur in target '" + target->name + "'");
        }
        positive = *idx;
      } else {
        positive = 1;  // last category in sorted order
      }
    }
  }
  return TableSchema(std::move(columns), config.task, positive);
}

std::vector<std::string> TableSchema::names() const {
  std::vector<std::string> out;
  for (const auto& c : columns_) out.push_back(c.name);
  return out;
}

std::vector<double> TableSchema::encode_row(const Row& row, Rng& rng) const {
  if (row.size() != columns_.size()) {
    throw DataError("row has " + std::to_string(row.size()) + " values, schema has " +
                    std::to_string(columns_.size()) + " columns");
  }
  std::vector<double> out(width_, 0.0);
  std::vector<double> logp;
  for (std::size_t c = 0; c < columns_.size(); ++c) {
    const ColumnMeta& meta = columns_[c];
    const std::size_t off = layout_[c].offset;
    if (meta.kind == ColumnKind::kCategorical) {
      const auto* s = std::get_if<std::string>(&row[c]);
      if (s == nullptr) throw DataError("column '" + meta.name + "' expects a category");
      auto idx = meta.category_index(*s);
      if (!idx) throw DataError("unseen category '" + *s + "' in column '" + meta.name + "'");
      out[off + *idx] = 1.0;
      continue;
    }
    const auto* v = std::get_if<double>(&row[c]);
    if (v == nullptr) throw DataError("column '" + meta.name + "' expects a number");
    // Mode drawn from the posterior responsibilities.
    const std::size_t k = meta.modes.size();
    logp.assign(k, 0.0);
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < k; ++j) {
      const MixtureMode& m = meta.modes[j];
      const double z = (*v - m.mean) / m.stddev;
      logp[j] = std::log(m.weight) - 0.5 * z * z - std::log(m.stddev);
      mx = std::max(mx, logp[j]);
    }
    for (double& p : logp) p = std::exp(p - mx);
    const std::size_t mode = rng.categorical(logp);
    const MixtureMode& m = meta.modes[mode];
    out[off] = std::clamp((*v - m.mean) / (4.0 * m.stddev), -1.0, 1.0);
    out[off + 1 + mode] = 1.0;
  }
  return out;
}

Tensor TableSchema::encode(std::span<const Row> rows, Rng& rng) const {
  Tensor out(rows.size(), width_);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto enc = encode_row(rows[r], rng);
    std::copy(enc.begin(), enc.end(), out.row_span(r).begin());
  }
  return out;
}

Row TableSchema::decode_row(std::span<const double> encoded) const {
  if (encoded.size() != width_) {
    throw ShapeError("decode_row: width " + std::to_string(encoded.size()) + ", expected " +
                     std::to_string(width_));
  }
  Row row;
  row.reserve(columns_.size());
  for (std::size_t c = 0; c < columns_.size(); ++c) {
    const ColumnMeta& meta = columns_[c];
    const auto seg = encoded.subspan(layout_[c].offset, layout_[c].width);
    if (meta.kind == ColumnKind::kCategorical) {
      row.emplace_back(meta.categories[argmax(seg)]);
    } else {
      const MixtureMode& m = meta.modes[argmax(seg.subspan(1))];
      row.emplace_back(seg[0] * 4.0 * m.stddev + m.mean);
    }
  }
  return row;
}

std::vector<Row> TableSchema::decode(const Tensor& encoded) const {
  std::vector<Row> rows;
  rows.reserve(encoded.rows());
  for (std::size_t r = 0; r < encoded.rows(); ++r) rows.push_back(decode_row(encoded.row_span(r)));
  return rows;
}

double TableSchema::scale_target(double value) const {
  const ColumnMeta& t = target();
  const double range = t.max - t.min;
  return range > 0.0 ? (value - t.min) / range : 0.0;
}

double TableSchema::label(const Row& row) const {
  const Value& v = row.at(target_);
  if (task_ == TaskKind::kClassification) {
    return std::get<std::string>(v) == target().categories[positive_] ? 1.0 : 0.0;
  }
  return scale_target(std::get<double>(v));
}

nlohmann::json TableSchema::to_json() const {
  nlohmann::json cols = nlohmann::json::array();
  for (const ColumnMeta& c : columns_) {
    nlohmann::json jc{{"name", c.name}, {"kind", to_string(c.kind)}, {"is_target", c.is_target}};
    if (c.kind == ColumnKind::kCategorical) {
      jc["categories"] = c.categories;
      jc["category_counts"] = c.category_counts;
    } else {
      nlohmann::json modes = nlohmann::json::array();
      for (const MixtureMode& m : c.modes) {
        modes.push_back({{"mean", m.mean}, {"stddev", m.stddev}, {"weight", m.weight}});
      }
      jc["modes"] = modes;
      jc["min"] = c.min;
      jc["max"] = c.max;
    }
    cols.push_back(jc);
  }
  return {{"format_version", kFormatVersion},
          {"task", to_string(task_)},
          {"positive_index", positive_},
          {"columns", cols}};
}

TableSchema TableSchema::from_json(const nlohmann::json& j) {
  try {
    if (j.at("format_version").get<int>() != kFormatVersion) {
      throw ConfigError("schema: unsupported format_version");
    }
    std::vector<ColumnMeta> columns;
    for (const auto& jc : j.at("columns")) {
      ColumnMeta c;
      c.name = jc.at("name").get<std::string>();
      c.kind = parse_column_kind(jc.at("kind").get<std::string>());
      c.is_target = jc.at("is_target").get<bool>();
      if (c.kind == ColumnKind::kCategorical) {
        c.categories = jc.at("categories").get<std::vector<std::string>>();
        c.category_counts = jc.at("category_counts").get<std::vector<std::size_t>>();
      } else {
        for (const auto& jm : jc.at("modes")) {
          c.modes.push_back({jm.at("mean").get<double>(), jm.at("stddev").get<double>(),
                             jm.at("weight").get<double>()});
        }
        c.min = jc.at("min").get<double>();
        c.max = jc.at("max").get<double>();
      }
      columns.push_back(std::move(c));
    }
    return TableSchema(std::move(columns), parse_task_kind(j.at("task").get<std::string>()),
                       j.at("positive_index").get<std::size_t>());
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed schema document: ") + e.what());
  } catch (const DataError& e) {
    throw ConfigError(std::string("malformed schema document: ") + e.what());
  }
}

}  // namespace dsfgan
