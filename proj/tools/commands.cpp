// Copyright 2026 The dsfgan Authors
// SPDX-License-Identifier: Apache-2.0

#include "commands.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>

#include "dsfgan/errors.hpp"
#include "dsfgan/evaluation.hpp"
#include "dsfgan/feedback.hpp"
#include "dsfgan/gan.hpp"
#include "dsfgan/random.hpp"
#include "dsfgan/tabular.hpp"

namespace dsfgan::cli {
namespace {

namespace fs = std::filesystem;

struct Prepared {
  std::shared_ptr<const TableSchema> schema;
  SchemaConfig schema_config;
};

std::string number(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return {buf, res.ptr};
}

nlohmann::json read_json(const std::string& path, const char* what) {
  std::ifstream in(path);
  if (!in) throw ConfigError(std::string("cannot open ") + what + " '" + path + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string(what) + " '" + path + "': " + e.what());
  }
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  out << text;
}

void write_json(const fs::path& path, const nlohmann::json& j) { write_text(path, j.dump(2) + "\n"); }

fs::path output_dir(const RunConfig& config) {
  fs::path dir(config.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory '" + config.out + "': " + ec.message());
  return dir;
}

void require(const std::string& value, const char* flag) {
  if (value.empty()) throw ConfigError(std::string("missing required setting ") + flag);
}

Prepared load_prepared(const RunConfig& config) {
  const std::string path = config.prepared_path();
  if (!fs::exists(path)) {
    throw ConfigError("prepared schema '" + path + "' not found; run `dsfgan prepare` first");
  }
  const nlohmann::json j = read_json(path, "prepared schema");
  try {
    return {std::make_shared<const TableSchema>(TableSchema::from_json(j.at("schema"))),
            SchemaConfig::from_json(j.at("schema_config"))};
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("prepared schema '" + path + "': " + e.what());
  }
}

std::vector<std::string> variants_of(const RunConfig& config) {
  if (config.variant == "paired") return {"base", "feedback"};
  return {config.variant};
}

FeedbackConfig feedback_config(const RunConfig& config, TaskKind task) {
  FeedbackConfig f;
  f.lambda = config.lambda;
  f.fit = DownstreamFitConfig::defaults_for(task);
  return f;
}

TrainConfig train_config(const RunConfig& config) {
  TrainConfig t;
  t.epochs = config.epochs;
  t.batch_size = config.batch;
  t.seed = derive_seed(config.seed, "train");
  return t;
}

}  // namespace

void RunConfig::apply_preset(const std::string& name) {
  if (name == "adult") {
    epochs = 100;
    batch = 500;
    lambda = 1.0;
  } else if (name == "house") {
    epochs = 500;
    batch = 200;
    lambda = 1.0;
  } else {
    throw ConfigError("unknown preset '" + name + "' (expected adult|house)");
  }
  preset = name;
}

void RunConfig::merge(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("run config must be a JSON object");
  try {
    if (j.contains("preset")) apply_preset(j.at("preset").get<std::string>());
    auto take = [&j](const char* key, auto& field) {
      if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
    };
    take("data", data);
    take("schema", schema);
    take("prepared", prepared);
    take("model", model);
    take("out", out);
    take("variant", variant);
    take("epochs", epochs);
    take("batch", batch);
    take("lambda", lambda);
    take("folds", folds);
    take("reps", reps);
    take("n", n);
    take("jobs", jobs);
    take("seed", seed);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("run config: ") + e.what());
  }
}

nlohmann::json RunConfig::to_json() const {
  return {{"preset", preset}, {"data", data},       {"schema", schema}, {"prepared", prepared},
          {"model", model},   {"out", out},         {"variant", variant}, {"epochs", epochs},
          {"batch", batch},   {"lambda", lambda},   {"folds", folds},   {"reps", reps},
          {"n", n},           {"jobs", jobs},       {"seed", seed}};
}

std::string RunConfig::prepared_path() const {
  return prepared.empty() ? (fs::path(out) / "schema.json").string() : prepared;
}

RunConfig resolve_config(const std::optional<std::string>& config_path, const Overrides& flags) {
  RunConfig c;
  if (flags.preset) c.apply_preset(*flags.preset);
  if (config_path) {
    nlohmann::json j = read_json(*config_path, "run config");
    // A preset flag outranks the file's preset but the file's explicit values
    // still outrank both presets.
    if (flags.preset && j.is_object()) j.erase("preset");
    c.merge(j);
  }
  auto set = [](auto& field, const auto& flag) {
    if (flag) field = *flag;
  };
  set(c.data, flags.data);
  set(c.schema, flags.schema);
  set(c.prepared, flags.prepared);
  set(c.model, flags.model);
  set(c.out, flags.out);
  set(c.variant, flags.variant);
  set(c.epochs, flags.epochs);
  set(c.batch, flags.batch);
  set(c.lambda, flags.lambda);
  set(c.folds, flags.folds);
  set(c.reps, flags.reps);
  set(c.n, flags.n);
  set(c.jobs, flags.jobs);
  set(c.seed, flags.seed);

  if (c.variant != "base" && c.variant != "feedback" && c.variant != "paired") {
    throw ConfigError("unknown variant '" + c.variant + "' (expected base|feedback|paired)");
  }
  if (c.epochs < 1) throw ConfigError("epochs must be positive");
  if (c.batch < 1) throw ConfigError("batch must be positive");
  if (c.folds < 1) throw ConfigError("folds must be positive");
  if (c.reps < 1) throw ConfigError("reps must be positive");
  if (c.jobs < 1) throw ConfigError("jobs must be positive");
  if (!(c.lambda >= 0.0)) throw ConfigError("lambda must be non-negative");
  for (const std::string* path : {&c.data, &c.schema, &c.model}) {
    if (!path->empty() && !fs::exists(*path)) throw ConfigError("file not found: '" + *path + "'");
  }
  return c;
}

int cmd_prepare(const RunConfig& config, std::ostream& log) {
  require(config.schema, "--schema");
  require(config.data, "--data");
  const SchemaConfig sc = SchemaConfig::load(config.schema);
  const RawTable table = load_csv(config.data, sc);
  Rng rng(derive_seed(config.seed, "schema"));
  const TableSchema schema = TableSchema::fit(table, sc, GmmConfig{}, rng);

  const fs::path dir = output_dir(config);
  write_json(dir / "schema.json", {{"format_version", kFormatVersion},
                                   {"schema", schema.to_json()},
                                   {"schema_config", sc.to_json()},
                                   {"rows", table.size()},
                                   {"dropped_rows", table.dropped_rows},
                                   {"run_config", config.to_json()}});

  log << "rows: " << table.size() << " (dropped " << table.dropped_rows << ")\n";
  for (const ColumnMeta& c : schema.columns()) {
    log << "  " << c.name << ": " << to_string(c.kind);
    if (c.kind == ColumnKind::kCategorical) {
      log << ", " << c.categories.size() << " categories";
    } else {
      log << ", " << c.modes.size() << " modes, range [" << c.min << ", " << c.max << "]";
    }
    if (c.is_target) log << " (target)";
    log << "\n";
  }
  log << "wrote " << (dir / "schema.json").string() << "\n";
  return kOk;
}

int cmd_train(const RunConfig& config, std::ostream& log) {
  require(config.data, "--data");
  const Prepared prepared = load_prepared(config);
  const TableSchema& schema = *prepared.schema;
  const RawTable table = load_csv(config.data, prepared.schema_config);
  Rng encode_rng(derive_seed(config.seed, "encode"));
  const Tensor data = schema.encode(table.rows, encode_rng);
  const TrainConfig tc = train_config(config);
  const FeedbackConfig fc = feedback_config(config, schema.task());
  const fs::path dir = output_dir(config);

  for (const std::string& variant : variants_of(config)) {
    GanModel model(prepared.schema, Architecture{}, derive_seed(config.seed, "model"));
    FeedbackHook hook;
    if (variant == "feedback") hook = make_feedback_hook(fc, prepared.schema, tc.seed);
    log << "training " << variant << ": " << tc.epochs << " epochs, batch " << tc.batch_size
        << ", " << data.rows() << " rows\n";
    const auto trace = train(model, data, tc, hook);

    const nlohmann::json provenance{{"run_config", config.to_json()},
                                    {"train_config", tc.to_json()},
                                    {"variant", variant},
                                    {"feedback", variant == "feedback" ? fc.to_json() : nlohmann::json(nullptr)}};
    nlohmann::json doc = model.to_json();
    doc["provenance"] = provenance;
    write_json(dir / ("model_" + variant + ".json"), doc);

    std::string csv = "epoch,critic_loss,gen_loss,H,L_f\n";
    for (const EpochLoss& e : trace) {
      csv += std::to_string(e.epoch) + "," + number(e.critic_loss) + "," +
             number(e.generator_loss) + "," + number(e.cond_loss) + "," +
             number(e.feedback_loss) + "\n";
    }
    write_text(dir / ("loss_trace_" + variant + ".csv"), csv);
    write_json(dir / ("loss_trace_" + variant + ".json"), provenance);
    log << "wrote " << (dir / ("model_" + variant + ".json")).string() << "\n";
  }
  return kOk;
}

int cmd_sample(const RunConfig& config, std::ostream& log) {
  if (config.n == 0) throw ConfigError("sample count --n must be positive");
  std::string path = config.model;
  if (path.empty()) {
    if (config.variant == "paired") throw ConfigError("give --model or a single --variant");
    path = (fs::path(config.out) / ("model_" + config.variant + ".json")).string();
  }
  const GanModel model = GanModel::load(path);
  Rng rng(derive_seed(config.seed, "sample"));
  const std::vector<Row> rows = sample_rows(model, config.n, rng);

  const fs::path dir = output_dir(config);
  {
    std::ofstream out(dir / "samples.csv", std::ios::binary);
    if (!out) throw ConfigError("cannot write '" + (dir / "samples.csv").string() + "'");
    write_csv(out, model.schema().names(), rows);
  }
  write_json(dir / "samples.json", {{"run_config", config.to_json()},
                                    {"model", path},
                                    {"model_digest", model.parameter_digest()},
                                    {"rows", rows.size()}});
  log << "wrote " << rows.size() << " rows to " << (dir / "samples.csv").string() << "\n";
  return kOk;
}

int cmd_experiment(const RunConfig& config, std::ostream& log) {
  require(config.schema, "--schema");
  require(config.data, "--data");
  const SchemaConfig sc = SchemaConfig::load(config.schema);
  const RawTable table = load_csv(config.data, sc);

  ExperimentConfig ec;
  ec.folds = config.folds;
  ec.reps = config.reps;
  ec.seed = config.seed;
  ec.jobs = config.jobs;
  ec.train = train_config(config);
  ec.feedback = feedback_config(config, sc.task);
  log << "experiment: " << table.size() << " rows, " << ec.folds << " folds x " << ec.reps
      << " reps, " << config.epochs << " epochs, batch " << config.batch << ", lambda "
      << config.lambda << "\n";
  const PairedReport report = run_experiment(table, sc, ec);

  // Paths and concurrency do not affect results, so they stay out of the
  // report to keep reruns byte-identical.
  nlohmann::json echo = config.to_json();
  echo.erase("out");
  echo.erase("jobs");
  nlohmann::json doc = report.to_json();
  doc["run_config"] = echo;
  doc["schema_config"] = sc.to_json();

  const fs::path dir = output_dir(config);
  write_json(dir / "report.json", doc);
  const std::string table_text = report.to_table();
  write_text(dir / "report.txt", table_text);
  log << table_text << "wrote " << (dir / "report.json").string() << "\n";
  return kOk;
}

int guarded(const std::function<int()>& body, std::ostream& err) {
  try {
    return body();
  } catch (const ExperimentError& e) {
    err << "error: experiment failed: " << e.what() << "\n";
    return kFoldFailure;
  } catch (const NumericError& e) {
    err << "error: numeric failure: " << e.what() << "\n";
    return kNumeric;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kConfig;
  } catch (const DataError& e) {
    err << "error: " << e.what() << "\n";
    return kData;
  } catch (const nlohmann::json::exception& e) {
    err << "error: " << e.what() << "\n";
    return kConfig;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kInternal;
  }
}

}  // namespace dsfgan::cli
