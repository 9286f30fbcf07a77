// Copyright 2026 The dsfgan Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <thread>

#include "dsfgan/digest.hpp"
#include "dsfgan/errors.hpp"
#include "dsfgan/evaluation.hpp"
#include "dsfgan/random.hpp"

namespace dsfgan {
namespace {

constexpr int kEvalFitSteps = 1000;

DownstreamFitConfig resolve_eval_fit(const DownstreamFitConfig& fit, TaskKind task) {
  if (fit.steps > 0) return fit;
  DownstreamFitConfig d = DownstreamFitConfig::defaults_for(task);
  d.steps = kEvalFitSteps;
  return d;
}

struct Featurized {
  Tensor features;
  Tensor labels;
};

Featurized featurize(const TableSchema& schema, std::span<const Row> rows, Rng& rng) {
  DesignMatrix d = downstream_design(schema.encode(rows, rng), schema);
  for (std::size_t r = 0; r < rows.size(); ++r) d.labels(r, 0) = schema.label(rows[r]);
  return {std::move(d.features), std::move(d.labels)};
}

std::string index_digest(std::span<const std::size_t> indices) {
  return Digest().update(indices).hex();
}

std::vector<std::string> metric_names(TaskKind task) {
  if (task == TaskKind::kClassification) return {"precision", "recall"};
  return {"rmse", "r2"};
}

std::optional<double> metric_value(const MetricRecord& m, const std::string& name) {
  if (name == "precision") return m.precision;
  if (name == "recall") return m.recall;
  if (name == "rmse") return m.rmse;
  return m.r2;
}

EfficacyReport summarize(Variant variant, TaskKind task, const std::vector<FoldResult>& folds) {
  EfficacyReport report;
  report.variant = variant;
  report.task = task;
  for (const FoldResult& f : folds) report.folds.push_back(f.variant(variant).mean);
  for (const std::string& name : metric_names(task)) {
    std::vector<double> values;
    for (const MetricRecord& m : report.folds) {
      if (auto v = metric_value(m, name)) values.push_back(*v);
    }
    if (values.size() >= 2) report.summary.emplace_back(name, confidence_interval(values));
  }
  return report;
}

nlohmann::json optional_number(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

nlohmann::json variant_fold_json(const VariantFold& v) {
  nlohmann::json reps = nlohmann::json::array();
  for (const MetricRecord& m : v.reps) reps.push_back(m.to_json());
  return {{"reps", reps}, {"mean", v.mean.to_json()}, {"final_digest", v.final_digest}};
}

std::string format_interval(const Interval& i) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f±%.4f", i.mean, i.half_width);
  return buf;
}

FoldResult run_fold(std::size_t f, const std::vector<std::vector<std::size_t>>& folds,
                    const RawTable& table, const SchemaConfig& schema_config,
                    const ExperimentConfig& config) {
  const std::uint64_t seed = config.seed;
  const std::vector<std::size_t>& validation = folds[f];
  std::vector<std::size_t> training;
  for (std::size_t g = 0; g < folds.size(); ++g) {
    if (g != f) training.insert(training.end(), folds[g].begin(), folds[g].end());
  }
  std::sort(training.begin(), training.end());
  FoldGuards::check_leakage(training, validation, table.size());

  Rng schema_rng(derive_seed(seed, "schema", f));
  auto schema = std::make_shared<const TableSchema>(
      TableSchema::fit(table, schema_config, config.gmm, schema_rng, training));
  const RawTable train_table = table.subset(training);
  const RawTable validation_table = table.subset(validation);
  Rng encode_rng(derive_seed(seed, "encode", f));
  const Tensor data = schema->encode(train_table.rows, encode_rng);

  const std::uint64_t model_seed = derive_seed(seed, "model", f);
  GanModel base(schema, config.architecture, model_seed);
  GanModel feedback(schema, config.architecture, model_seed);

  FoldResult out;
  out.fold = f;
  out.train_rows = training.size();
  out.validation_rows = validation.size();
  out.train_digest = index_digest(training);
  out.validation_digest = index_digest(validation);
  out.data_digest = Digest().update(data).hex();
  out.init_digest = base.parameter_digest();
  FoldGuards::check_pairing(out.data_digest, Digest().update(data).hex(), out.init_digest,
                            feedback.parameter_digest());

  TrainConfig tc = config.train;
  tc.seed = derive_seed(seed, "train", f);
  out.base.trace = train(base, data, tc);
  out.feedback.trace =
      train(feedback, data, tc, make_feedback_hook(config.feedback, schema, tc.seed));
  out.base.final_digest = base.parameter_digest();
  out.feedback.final_digest = feedback.parameter_digest();

  const std::size_t n = config.sample_count > 0 ? config.sample_count : training.size();
  const DownstreamFitConfig fit = resolve_eval_fit(config.eval_fit, schema->task());
  for (std::size_t r = 0; r < config.reps; ++r) {
    const std::uint64_t s = derive_seed(seed, "sample", f * config.reps + r);
    out.sampling_seeds.push_back(s);
    out.base.reps.push_back(
        efficacy_eval(gan_source(base), *schema, validation_table.rows, n, s, fit));
    out.feedback.reps.push_back(
        efficacy_eval(gan_source(feedback), *schema, validation_table.rows, n, s, fit));
  }
  out.base.mean = average(out.base.reps);
  out.feedback.mean = average(out.feedback.reps);
  return out;
}

}  // namespace

nlohmann::json MetricRecord::to_json() const {
  if (task == TaskKind::kClassification) {
    return {{"precision", precision}, {"recall", recall}, {"degenerate", degenerate}};
  }
  return {{"rmse", rmse}, {"r2", optional_number(r2)}};
}

SyntheticSource gan_source(const GanModel& model) {
  return [&model](std::size_t n, Rng& rng) { return sample_rows(model, n, rng); };
}

MetricRecord efficacy_eval(const SyntheticSource& source, const TableSchema& schema,
                           std::span<const Row> validation, std::size_t n, std::uint64_t seed,
                           const DownstreamFitConfig& fit) {
  if (n == 0) throw ConfigError("efficacy_eval: sample count must be positive");
  if (validation.empty()) throw DataError("efficacy_eval: empty validation set");
  Rng sample_rng(derive_seed(seed, "synthetic"));
  Rng encode_rng(derive_seed(seed, "featurize"));
  const std::vector<Row> synthetic = source(n, sample_rng);
  if (synthetic.size() != n) throw DataError("efficacy_eval: source returned a short sample");
  const Featurized train_set = featurize(schema, synthetic, encode_rng);
  const Featurized test_set = featurize(schema, validation, encode_rng);
  const auto truth = test_set.labels.data();

  MetricRecord m;
  m.task = schema.task();
  const auto model = fit_downstream({train_set.features, train_set.labels}, schema.task(), fit);
  if (schema.task() == TaskKind::kClassification) {
    std::vector<double> predicted(validation.size());
    if (model) {
      const std::vector<double> p = predict(*model, test_set.features);
      std::transform(p.begin(), p.end(), predicted.begin(),
                     [](double v) { return v >= kDecisionThreshold ? 1.0 : 0.0; });
    } else {
      m.degenerate = true;
      std::fill(predicted.begin(), predicted.end(), train_set.labels(0, 0));
    }
    const PrecisionRecall pr = precision_recall(truth, predicted);
    m.precision = pr.precision;
    m.recall = pr.recall;
  } else {
    const std::vector<double> predicted = predict(*model, test_set.features);
    if (validation.size() >= 2) {
      const RmseR2 rr = rmse_r2(truth, predicted);
      m.rmse = rr.rmse;
      m.r2 = rr.r2;
    } else {
      m.rmse = std::abs(truth[0] - predicted[0]);
    }
  }
  return m;
}

MetricRecord efficacy_eval(const GanModel& model, std::span<const Row> validation, std::size_t n,
                           std::uint64_t seed) {
  const TaskKind task = model.schema().task();
  return efficacy_eval(gan_source(model), model.schema(), validation, n, seed,
                       resolve_eval_fit({0, 0.0}, task));
}

MetricRecord average(std::span<const MetricRecord> records) {
  if (records.empty()) throw ConfigError("average: no records");
  MetricRecord out;
  out.task = records.front().task;
  const double n = static_cast<double>(records.size());
  double r2_sum = 0.0;
  std::size_t r2_count = 0;
  for (const MetricRecord& m : records) {
    out.precision += m.precision / n;
    out.recall += m.recall / n;
    out.rmse += m.rmse / n;
    out.degenerate = out.degenerate || m.degenerate;
    if (m.r2) {
      r2_sum += *m.r2;
      ++r2_count;
    }
  }
  if (r2_count > 0) out.r2 = r2_sum / static_cast<double>(r2_count);
  return out;
}

void ExperimentConfig::validate() const {
  if (folds < 2) throw ConfigError("folds must be at least 2");
  if (reps < 1) throw ConfigError("reps must be at least 1");
  if (jobs < 1) throw ConfigError("jobs must be at least 1");
  train.validate();
  feedback.validate();
  if (eval_fit.steps < 0) throw ConfigError("evaluation fit steps must be non-negative");
  if (eval_fit.steps > 0 && !(eval_fit.learning_rate > 0.0)) {
    throw ConfigError("evaluation learning rate must be positive");
  }
}

// `jobs` is left out: it cannot change results.
nlohmann::json ExperimentConfig::to_json() const {
  return {{"folds", folds},
          {"reps", reps},
          {"seed", seed},
          {"train", train.to_json()},
          {"architecture", architecture.to_json()},
          {"feedback", feedback.to_json()},
          {"gmm",
           {{"max_modes", gmm.max_modes},
            {"max_iterations", gmm.max_iterations},
            {"tolerance", gmm.tolerance},
            {"prune_weight", gmm.prune_weight}}},
          {"eval_fit", {{"steps", eval_fit.steps}, {"learning_rate", eval_fit.learning_rate}}},
          {"sample_count", sample_count}};
}

const char* to_string(Variant v) { return v == Variant::kBase ? "base" : "feedback"; }

nlohmann::json EfficacyReport::to_json() const {
  nlohmann::json fold_records = nlohmann::json::array();
  for (const MetricRecord& m : folds) fold_records.push_back(m.to_json());
  nlohmann::json s = nlohmann::json::object();
  for (const auto& [name, iv] : summary) s[name] = {{"mean", iv.mean}, {"half_width", iv.half_width}};
  return {{"variant", to_string(variant)},
          {"task", to_string(task)},
          {"folds", fold_records},
          {"summary", s}};
}

nlohmann::json PairedReport::to_json() const {
  nlohmann::json fold_docs = nlohmann::json::array();
  for (const FoldResult& f : folds) {
    fold_docs.push_back({{"fold", f.fold},
                         {"train_rows", f.train_rows},
                         {"validation_rows", f.validation_rows},
                         {"train_digest", f.train_digest},
                         {"validation_digest", f.validation_digest},
                         {"data_digest", f.data_digest},
                         {"init_digest", f.init_digest},
                         {"sampling_seeds", f.sampling_seeds},
                         {"guards", {{"leakage", "pass"}, {"pairing", "pass"}}},
                         {"base", variant_fold_json(f.base)},
                         {"feedback", variant_fold_json(f.feedback)}});
  }
  return {{"format_version", kFormatVersion},
          {"task", to_string(task)},
          {"aggregation",
           "metrics averaged over sampling reps within each fold; mean and 95% Student-t "
           "half-width across fold-level values"},
          {"dataset_digest", dataset_digest},
          {"config_digest", config_digest},
          {"config", config.to_json()},
          {"folds", fold_docs},
          {"base", base.to_json()},
          {"feedback", feedback.to_json()}};
}

std::string PairedReport::to_table() const {
  std::string out;
  char line[160];
  std::snprintf(line, sizeof line, "%s efficacy, %zu folds x %zu reps, mean±half-width (95%% t)\n",
                to_string(task), config.folds, config.reps);
  out += line;
  std::snprintf(line, sizeof line, "%-10s %-18s %-18s\n", "metric", "base", "feedback");
  out += line;
  for (const std::string& name : metric_names(task)) {
    auto find = [&name](const EfficacyReport& r) -> std::string {
      for (const auto& [n, iv] : r.summary) {
        if (n == name) return format_interval(iv);
      }
      return "undefined";
    };
    // The "±" sign is two bytes, so widen the fields to keep columns aligned.
    std::snprintf(line, sizeof line, "%-10s %-19s %-19s\n", name.c_str(), find(base).c_str(),
                  find(feedback).c_str());
    out += line;
  }
  return out;
}

void FoldGuards::check_leakage(std::span<const std::size_t> train,
                               std::span<const std::size_t> validation, std::size_t rows) {
  std::vector<char> seen(rows, 0);
  for (std::size_t i : train) {
    if (i >= rows || seen[i]) throw DataError("leakage guard: bad training index");
    seen[i] = 1;
  }
  for (std::size_t i : validation) {
    if (i >= rows) throw DataError("leakage guard: bad validation index");
    if (seen[i]) {
      throw DataError("leakage guard: row " + std::to_string(i) + " in training and validation");
    }
    seen[i] = 2;
  }
  if (std::find(seen.begin(), seen.end(), 0) != seen.end()) {
    throw DataError("leakage guard: folds do not cover the table");
  }
}

void FoldGuards::check_pairing(const std::string& base_data, const std::string& feedback_data,
                               const std::string& base_init, const std::string& feedback_init) {
  if (base_data != feedback_data) throw DataError("pairing guard: training data differ");
  if (base_init != feedback_init) throw DataError("pairing guard: initial parameters differ");
}

std::string dataset_digest(const RawTable& table) {
  Digest d;
  for (std::size_t c = 0; c < table.names.size(); ++c) {
    d.update(table.names[c]).update(to_string(table.kinds[c]));
  }
  for (const Row& row : table.rows) {
    for (const Value& v : row) {
      if (const double* x = std::get_if<double>(&v)) {
        d.update(std::span<const double>(x, 1));
      } else {
        d.update(std::get<std::string>(v)).update(std::string_view("\x1f", 1));
      }
    }
  }
  return d.hex();
}

PairedReport run_experiment(const RawTable& table, const SchemaConfig& schema_config,
                            const ExperimentConfig& config) {
  config.validate();
  if (table.size() < config.folds) {
    throw DataError("run_experiment: fewer rows than folds");
  }
  const auto folds = kfold_split(table.size(), config.folds, derive_seed(config.seed, "folds"));
  const std::size_t k = folds.size();

  // Each worker writes only its own fold's slots.
  std::vector<std::optional<FoldResult>> results(k);
  std::vector<std::exception_ptr> errors(k);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t f = next++; f < k; f = next++) {
      try {
        results[f] = run_fold(f, folds, table, schema_config, config);
      } catch (...) {
        errors[f] = std::current_exception();
      }
    }
  };
  const std::size_t threads = std::min(config.jobs, k);
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  for (std::size_t f = 0; f < k; ++f) {
    if (!errors[f]) continue;
    try {
      std::rethrow_exception(errors[f]);
    } catch (const std::exception& e) {
      throw ExperimentError(e.what(), static_cast<int>(f));
    }
  }

  PairedReport report;
  report.config = config;
  report.dataset_digest = dataset_digest(table);
  report.config_digest =
      Digest().update(config.to_json().dump()).update(schema_config.to_json().dump()).hex();
  for (auto& r : results) report.folds.push_back(std::move(*r));
  report.task = report.folds.front().base.mean.task;
  report.base = summarize(Variant::kBase, report.task, report.folds);
  report.feedback = summarize(Variant::kFeedback, report.task, report.folds);
  return report;
}

}  // namespace dsfgan
