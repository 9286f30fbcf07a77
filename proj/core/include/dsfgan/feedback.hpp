// Copyright 2026 The dsfgan Authors
// SPDX-License-Identifier: Apache-2.0
//
// Downstream-task feedback for generator training.
//
// After the warmup epochs, every generator step:
//   1. draws a detached synthetic sample and fits a logistic (classification)
//      or linear (regression) model h on it from zero initialization;
//   2. draws a live synthetic batch on the generator's tape and evaluates the
//      downstream loss L_f of the frozen h on it, using the batch's own
//      generated labels;
//   3. adds lambda * L_f to the generator loss.
// Gradients reach the generator through both the features and the labels of
// the live batch; h's parameters sit behind a detach and receive none.
//
// L_f is the mean log-loss -(y log p + (1 - y) log(1 - p)) with p clamped to
// [1e-7, 1 - 1e-7], or the RMSE sqrt(mean((h(x) - y)^2)) for regression.

#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>

#include <nlohmann/json.hpp>

#include "dsfgan/autodiff.hpp"
#include "dsfgan/gan.hpp"
#include "dsfgan/tabular.hpp"

namespace dsfgan {

inline constexpr double kProbabilityClamp = 1e-7;

/// Logistic or linear model over the encoded row minus the target segment.
struct DownstreamModel {
  TaskKind task = TaskKind::kClassification;
  Tensor weights;  // (features, 1)
  double bias = 0.0;
};

struct DownstreamFitConfig {
  int steps = 200;
  double learning_rate = 0.1;

  /// 200 steps at lr 0.1 (classification) or 0.05 (regression).
  static DownstreamFitConfig defaults_for(TaskKind task);
};

struct FeedbackConfig {
  double lambda = 1.0;
  DownstreamFitConfig fit{};
  /// Rows drawn for each refit; 0 means the GAN batch size.
  std::size_t fit_samples = 0;

  /// Throws ConfigError when lambda is negative or not finite.
  void validate() const;
  nlohmann::json to_json() const;
};

/// Number of warmup epochs without feedback: floor(N / 2).
int warmup_epochs(int total_epochs);
/// True iff epoch (1-based) > floor(total_epochs / 2).
bool feedback_active(int epoch, int total_epochs);

/// Features and hard labels (class 1/0 or min-max scaled target) of encoded rows.
struct DesignMatrix {
  Tensor features;  // (rows, width - target width)
  Tensor labels;    // (rows, 1)
};

DesignMatrix downstream_design(const Tensor& encoded, const TableSchema& schema);

/// Encoded columns minus the target segment, on the tape.
Var downstream_features(Var encoded, const TableSchema& schema);
/// Differentiable labels of a generated batch: the generated probability of
/// the positive class, or the soft-decoded min-max scaled target
/// (mode-probability-weighted alpha * 4 sigma + mu).
Var downstream_labels(Var encoded, const TableSchema& schema);

/// Full-batch gradient descent from zero on log-loss or mean squared error.
/// Returns nullopt for a classification design whose labels are all one
/// class (nothing to learn).
std::optional<DownstreamModel> fit_downstream(const DesignMatrix& design, TaskKind task,
                                              const DownstreamFitConfig& config);

/// P(positive) for classification, the predicted value for regression.
std::vector<double> predict(const DownstreamModel& model, const Tensor& features);

struct FeedbackLoss {
  Var loss;
  /// h's parameters as bound on the tape (behind a detach).
  Var weights;
  Var bias;
};

/// L_f of the frozen `model` on a live generated batch.
FeedbackLoss feedback_loss(const DownstreamModel& model, Var live_batch, const TableSchema& schema);

/// Mean log-loss of probabilities against labels; both (n, 1).
Var log_loss(Var probabilities, Var labels);
/// sqrt(mean((predictions - labels)^2)); both (n, 1).
Var rmse_loss(Var predictions, Var labels);

/// lambda * L_f.
Var feedback_term(Var loss, double lambda);

/// Counters a hook updates while training; handy for tests and logging.
struct FeedbackStats {
  std::size_t activations = 0;
  std::size_t refits = 0;
  std::size_t skipped_refits = 0;
};

/// Hook for train(). Draws from its own stream derive_seed(seed, "feedback"),
/// so the GAN's own random draws are the same with or without it.
FeedbackHook make_feedback_hook(const FeedbackConfig& config,
                                std::shared_ptr<const TableSchema> schema, std::uint64_t seed,
                                std::shared_ptr<FeedbackStats> stats = nullptr);

}  // namespace dsfgan
