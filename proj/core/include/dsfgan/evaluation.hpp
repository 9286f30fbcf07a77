// Copyright 2026 The dsfgan Authors
// SPDX-License-Identifier: Apache-2.0
//
// Machine-learning efficacy: fit a downstream model on synthetic rows, score
// it on held-out real rows, and compare a base GAN with a feedback-trained one
// over k-fold cross-validation.
//
// Aggregation is two-level. Within a fold, each variant is sampled `reps`
// times with sampling seeds shared between variants and the metrics are
// averaged; across folds, the k fold-level values give a mean and a 95%
// Student-t half-width.

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "dsfgan/feedback.hpp"
#include "dsfgan/gan.hpp"
#include "dsfgan/tabular.hpp"

namespace dsfgan {

inline constexpr double kDecisionThreshold = 0.5;

// ---------------------------------------------------------------------------
// Metrics
// ---------------------------------------------------------------------------

struct PrecisionRecall {
  double precision = 0.0;
  double recall = 0.0;
};

/// Labels are 0/1. 0/0 counts as 0. Throws ShapeError on a length mismatch.
PrecisionRecall precision_recall(std::span<const double> y_true, std::span<const double> y_pred);

struct RmseR2 {
  double rmse = 0.0;
  /// nullopt when y_true is constant.
  std::optional<double> r2;
};

/// Throws ShapeError on a length mismatch or fewer than two values.
RmseR2 rmse_r2(std::span<const double> y_true, std::span<const double> y_pred);

struct Interval {
  double mean = 0.0;
  double half_width = 0.0;
};

/// mean +- t(0.975, n - 1) * sd / sqrt(n) with the sample standard deviation.
/// Throws ConfigError for fewer than two values.
Interval confidence_interval(std::span<const double> values);

// ---------------------------------------------------------------------------
// Efficacy of one synthetic sample
// ---------------------------------------------------------------------------

/// Classification fills precision/recall, regression fills rmse/r2.
struct MetricRecord {
  TaskKind task = TaskKind::kClassification;
  double precision = 0.0;
  double recall = 0.0;
  double rmse = 0.0;
  std::optional<double> r2;
  /// The synthetic sample held a single class; the constant predictor was scored.
  bool degenerate = false;

  nlohmann::json to_json() const;
};

/// Produces n decoded rows from its rng.
using SyntheticSource = std::function<std::vector<Row>(std::size_t n, Rng& rng)>;

SyntheticSource gan_source(const GanModel& model);

/// Draws n rows from `source`, fits the downstream model on them and scores
/// it on `validation`. Features are the encoded row minus the target segment;
/// labels come from the raw rows. Throws ConfigError when n == 0.
MetricRecord efficacy_eval(const SyntheticSource& source, const TableSchema& schema,
                           std::span<const Row> validation, std::size_t n, std::uint64_t seed,
                           const DownstreamFitConfig& fit);

/// Same, with the downstream defaults for the schema's task.
MetricRecord efficacy_eval(const GanModel& model, std::span<const Row> validation, std::size_t n,
                           std::uint64_t seed);

/// Mean of each metric over records of one task; r2 is the mean of the
/// defined values (nullopt when none is).
MetricRecord average(std::span<const MetricRecord> records);

// ---------------------------------------------------------------------------
// Paired experiment
// ---------------------------------------------------------------------------

struct ExperimentConfig {
  std::size_t folds = 5;
  std::size_t reps = 5;
  std::uint64_t seed = 0;
  /// Folds run concurrently, at most this many at a time.
  std::size_t jobs = 1;
  TrainConfig train{};  // the seed field is replaced per fold
  Architecture architecture{};
  FeedbackConfig feedback{};
  GmmConfig gmm{};
  /// Downstream fit for scoring; steps 0 picks the task defaults.
  DownstreamFitConfig eval_fit{0, 0.0};
  /// Synthetic rows per evaluation; 0 means the training-fold size.
  std::size_t sample_count = 0;

  /// Throws ConfigError on folds < 2, reps < 1, jobs < 1 or invalid sub-configs.
  void validate() const;
  nlohmann::json to_json() const;
};

enum class Variant { kBase, kFeedback };
const char* to_string(Variant v);

struct VariantFold {
  std::vector<MetricRecord> reps;
  MetricRecord mean;
  std::string final_digest;
  std::vector<EpochLoss> trace;
};

struct FoldResult {
  std::size_t fold = 0;
  std::size_t train_rows = 0;
  std::size_t validation_rows = 0;
  std::string train_digest;       // training row indices
  std::string validation_digest;  // validation row indices
  std::string data_digest;        // encoded training tensor
  std::string init_digest;        // initial parameters shared by both variants
  std::vector<std::uint64_t> sampling_seeds;
  VariantFold base;
  VariantFold feedback;

  const VariantFold& variant(Variant v) const { return v == Variant::kBase ? base : feedback; }
};

/// Per-metric mean and half-width across fold-level values of one variant.
struct EfficacyReport {
  Variant variant = Variant::kBase;
  TaskKind task = TaskKind::kClassification;
  std::vector<MetricRecord> folds;
  std::vector<std::pair<std::string, Interval>> summary;

  nlohmann::json to_json() const;
};

struct PairedReport {
  TaskKind task = TaskKind::kClassification;
  ExperimentConfig config;
  std::string dataset_digest;
  std::string config_digest;
  std::vector<FoldResult> folds;
  EfficacyReport base;
  EfficacyReport feedback;

  /// Deterministic document; equal inputs give byte-identical dumps.
  nlohmann::json to_json() const;
  /// "metric  base  feedback" rows formatted as mean±half-width.
  std::string to_table() const;
};

/// Checked on every fold before training; a failure aborts the experiment.
struct FoldGuards {
  /// Training and validation index sets are disjoint and cover the table.
  static void check_leakage(std::span<const std::size_t> train,
                            std::span<const std::size_t> validation, std::size_t rows);
  /// Both variants start from the same data and parameters.
  static void check_pairing(const std::string& base_data, const std::string& feedback_data,
                            const std::string& base_init, const std::string& feedback_init);
};

std::string dataset_digest(const RawTable& table);

/// Runs k folds x {base, feedback}. Any fold failure is rethrown as
/// ExperimentError naming the lowest failing fold.
PairedReport run_experiment(const RawTable& table, const SchemaConfig& schema_config,
                            const ExperimentConfig& config);

}  // namespace dsfgan
