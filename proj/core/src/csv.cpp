// Copyright 2026 The dsfgan Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

#include "dsfgan/errors.hpp"
#include "dsfgan/tabular.hpp"

namespace dsfgan {
namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

// Splits one CSV record. Handles double-quoted fields with embedded commas,
// doubled quotes and newlines (continuation lines are pulled from `in`).
bool read_record(std::istream& in, std::vector<std::string>& fields) {
  fields.clear();
  std::string line;
  if (!std::getline(in, line)) return false;
  std::string field;
  bool quoted = false;
  bool was_quoted = false;
  for (;;) {
    for (std::size_t i = 0; i < line.size(); ++i) {
      const char c = line[i];
      if (quoted) {
        if (c == '"') {
          if (i + 1 < line.size() && line[i + 1] == '"') {
            field += '"';
            ++i;
          } else {
            quoted = false;
          }
        } else {
          field += c;
        }
      } else if (c == '"') {
        quoted = true;
        was_quoted = true;
      } else if (c == ',') {
        fields.push_back(was_quoted ? field : trim(field));
        field.clear();
        was_quoted = false;
      } else {
        field += c;
      }
    }
    if (!quoted) break;
    field += '\n';
    if (!std::getline(in, line)) break;
  }
  fields.push_back(was_quoted ? field : trim(field));
  return true;
}

std::optional<double> parse_number(const std::string& s) {
  double v = 0.0;
  const char* begin = s.data();
  const char* end = s.data() + s.size();
  if (begin != end && *begin == '+') ++begin;
  auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::string quote_if_needed(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos && trim(s) == s) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

}  // namespace

const char* to_string(ColumnKind kind) {
  return kind == ColumnKind::kContinuous ? "continuous" : "categorical";
}

const char* to_string(TaskKind kind) {
  return kind == TaskKind::kClassification ? "classification" : "regression";
}

ColumnKind parse_column_kind(const std::string& s) {
  if (s == "continuous") return ColumnKind::kContinuous;
  if (s == "categorical") return ColumnKind::kCategorical;
  throw ConfigError("unknown column kind '" + s + "' (expected continuous|categorical)");
}

TaskKind parse_task_kind(const std::string& s) {
  if (s == "classification") return TaskKind::kClassification;
  if (s == "regression") return TaskKind::kRegression;
  throw ConfigError("unknown task '" + s + "' (expected classification|regression)");
}

const SchemaConfig::Column* SchemaConfig::find(const std::string& name) const {
  auto it = std::find_if(columns.begin(), columns.end(),
                         [&](const Column& c) { return c.name == name; });
  return it == columns.end() ? nullptr : &*it;
}

SchemaConfig SchemaConfig::from_json(const nlohmann::json& j) {
  try {
    SchemaConfig cfg;
    if (!j.contains("columns") || !j.at("columns").is_object()) {
      throw ConfigError("schema config: 'columns' must be an object of name -> kind");
    }
    for (const auto& [name, kind] : j.at("columns").items()) {
      cfg.columns.push_back({name, parse_column_kind(kind.get<std::string>())});
    }
    cfg.target = j.at("target").get<std::string>();
    cfg.task = parse_task_kind(j.at("task").get<std::string>());
    if (j.contains("positive_class") && !j.at("positive_class").is_null()) {
      cfg.positive_class = j.at("positive_class").get<std::string>();
    }
    if (j.contains("missing_tokens")) {
      cfg.missing_tokens = j.at("missing_tokens").get<std::vector<std::string>>();
    }
    const Column* target = cfg.find(cfg.target);
    if (target == nullptr) {
      throw ConfigError("schema config: target '" + cfg.target + "' is not a listed column");
    }
    const ColumnKind wanted = cfg.task == TaskKind::kClassification ? ColumnKind::kCategorical
                                                                    : ColumnKind::kContinuous;
    if (target->kind != wanted) {
      throw ConfigError("schema config: " + std::string(to_string(cfg.task)) +
                        " target '" + cfg.target + "' must be " + to_string(wanted));
    }
    return cfg;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("schema config: ") + e.what());
  }
}

SchemaConfig SchemaConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open schema config '" + path + "'");
  try {
    return from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("schema config '" + path + "': " + e.what());
  }
}

nlohmann::json SchemaConfig::to_json() const {
  nlohmann::json cols = nlohmann::json::object();
  for (const Column& c : columns) cols[c.name] = to_string(c.kind);
  nlohmann::json j{{"columns", cols},
                   {"target", target},
                   {"task", to_string(task)},
                   {"missing_tokens", missing_tokens}};
  j["positive_class"] = positive_class ? nlohmann::json(*positive_class) : nlohmann::json();
  return j;
}

std::size_t RawTable::column_index(const std::string& name) const {
  auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) throw ConfigError("column '" + name + "' not in table");
  return static_cast<std::size_t>(it - names.begin());
}

RawTable RawTable::subset(std::span<const std::size_t> indices) const {
  RawTable out;
  out.names = names;
  out.kinds = kinds;
  out.rows.reserve(indices.size());
  for (std::size_t i : indices) out.rows.push_back(rows.at(i));
  return out;
}

RawTable parse_csv(std::istream& in, const SchemaConfig& config) {
  std::vector<std::string> header;
  if (!read_record(in, header)) throw DataError("CSV has no header row");
  if (!header.empty() && header[0].rfind("\xEF\xBB\xBF", 0) == 0) header[0].erase(0, 3);

  RawTable table;
  std::vector<std::size_t> source;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (const auto* col = config.find(header[i])) {
      table.names.push_back(col->name);
      table.kinds.push_back(col->kind);
      source.push_back(i);
    }
  }
  for (const auto& col : config.columns) {
    if (std::find(table.names.begin(), table.names.end(), col.name) == table.names.end()) {
      throw ConfigError("column '" + col.name + "' named in schema config is missing from CSV");
    }
  }

  auto is_missing = [&](const std::string& s) {
    return std::find(config.missing_tokens.begin(), config.missing_tokens.end(), s) !=
           config.missing_tokens.end();
  };

  std::vector<std::string> fields;
  while (read_record(in, fields)) {
    if (fields.size() == 1 && fields[0].empty()) continue;  // blank line
    Row row;
    row.reserve(source.size());
    bool ok = true;
    for (std::size_t c = 0; c < source.size() && ok; ++c) {
      if (source[c] >= fields.size()) {
        ok = false;
        break;
      }
      const std::string& cell = fields[source[c]];
      if (is_missing(cell)) {
        ok = false;
      } else if (table.kinds[c] == ColumnKind::kContinuous) {
        auto v = parse_number(cell);
        if (v) {
          row.emplace_back(*v);
        } else {
          ok = false;
        }
      } else {
        row.emplace_back(cell);
      }
    }
    if (ok) {
      table.rows.push_back(std::move(row));
    } else {
      ++table.dropped_rows;
    }
  }
  if (table.rows.empty()) {
    throw DataError("zero rows after cleaning (" + std::to_string(table.dropped_rows) +
                    " dropped)");
  }
  return table;
}

RawTable load_csv(const std::string& path, const SchemaConfig& config) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open CSV '" + path + "'");
  return parse_csv(in, config);
}

void write_csv(std::ostream& out, const std::vector<std::string>& names,
               std::span<const Row> rows) {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (i > 0) out << ',';
    out << quote_if_needed(names[i]);
  }
  out << '\n';
  for (const Row& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i > 0) out << ',';
      if (const double* d = std::get_if<double>(&row[i])) {
        out << format_double(*d);
      } else {
        out << quote_if_needed(std::get<std::string>(row[i]));
      }
    }
    out << '\n';
  }
}

}  // namespace dsfgan
