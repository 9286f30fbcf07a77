// Copyright 2026 The dsfgan Authors
// SPDX-License-Identifier: Apache-2.0
//
// Conditional tabular GAN with a Wasserstein critic.
//
// Generator input is [z | cond], critic input is [row | cond], where cond
// one-hot selects a category of one categorical column. Per training step the
// critic takes `critic_steps` Adam updates on mean(f_fake) - mean(f_real),
// each followed by clipping every critic weight into [-clip, clip]; the
// generator then takes one update on
//
//   -mean(f_fake) + H + feedback
//
// where H is the cross-entropy of the conditioned category and `feedback` is
// whatever the optional FeedbackHook contributes (nothing during warmup).

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dsfgan/adam.hpp"
#include "dsfgan/autodiff.hpp"
#include "dsfgan/mlp.hpp"
#include "dsfgan/tabular.hpp"

namespace dsfgan {

struct Architecture {
  std::size_t noise_dim = 128;
  std::vector<std::size_t> generator_hidden{256, 256};
  std::vector<std::size_t> critic_hidden{256, 256};
  double critic_leaky_slope = 0.2;
  double gumbel_tau = 0.2;

  nlohmann::json to_json() const;
  static Architecture from_json(const nlohmann::json& j);
};

struct TrainConfig {
  int epochs = 100;
  std::size_t batch_size = 500;
  AdamConfig generator_optimizer{};
  AdamConfig critic_optimizer{};
  int critic_steps = 1;
  double clip = 0.01;
  std::uint64_t seed = 0;

  /// Throws ConfigError unless epochs >= 2, batch_size >= 2, clip > 0 and
  /// critic_steps >= 1.
  void validate() const;
  nlohmann::json to_json() const;
};

// ---------------------------------------------------------------------------
// Conditions
// ---------------------------------------------------------------------------

/// One condition: a 0/1 vector over all categorical segments with a single 1
/// inside the selected column's segment. Empty when the schema has no
/// categorical columns.
struct CondVector {
  std::vector<double> vector;
  std::size_t segment = 0;   // index into TableSchema::categorical_segments()
  std::size_t category = 0;  // index within that column's categories

  bool empty() const noexcept { return vector.empty(); }
};

enum class CondSampling {
  /// Column uniform, category proportional to log(1 + count): rare
  /// categories still get drawn during training.
  kTraining,
  /// Column uniform, category proportional to its count. Used when sampling
  /// from a trained model so outputs follow the data's marginals.
  kEmpirical,
};

CondVector sample_cond_vector(const TableSchema& schema, Rng& rng,
                              CondSampling mode = CondSampling::kTraining);

struct CondBatch {
  Tensor vectors;  // (batch, cond_width)
  std::vector<std::size_t> segments;
  std::vector<std::size_t> categories;
};

CondBatch sample_cond_batch(const TableSchema& schema, std::size_t batch, Rng& rng,
                            CondSampling mode = CondSampling::kTraining);

// ---------------------------------------------------------------------------
// Model
// ---------------------------------------------------------------------------

class GanModel {
 public:
  GanModel() = default;
  /// Fresh parameters drawn from derive_seed(seed, "init").
  GanModel(std::shared_ptr<const TableSchema> schema, Architecture arch, std::uint64_t seed);

  const TableSchema& schema() const { return *schema_; }
  std::shared_ptr<const TableSchema> schema_ptr() const { return schema_; }
  const Architecture& architecture() const noexcept { return arch_; }
  std::uint64_t seed() const noexcept { return seed_; }
  int epochs_trained() const noexcept { return epochs_trained_; }
  void set_epochs_trained(int e) noexcept { epochs_trained_ = e; }

  Mlp& generator() noexcept { return generator_; }
  const Mlp& generator() const noexcept { return generator_; }
  Mlp& critic() noexcept { return critic_; }
  const Mlp& critic() const noexcept { return critic_; }

  /// FNV-1a over every generator and critic parameter bit pattern.
  std::string parameter_digest() const;

  nlohmann::json to_json() const;
  /// Throws ConfigError on malformed documents.
  static GanModel from_json(const nlohmann::json& j);
  void save(const std::string& path) const;
  static GanModel load(const std::string& path);

 private:
  std::shared_ptr<const TableSchema> schema_;
  Architecture arch_;
  std::uint64_t seed_ = 0;
  int epochs_trained_ = 0;
  Mlp generator_;
  Mlp critic_;
};

struct GeneratedBatch {
  /// Activated rows in encoded layout: tanh on alpha scalars, gumbel-softmax
  /// on every one-hot segment.
  Var rows;
  /// Plain softmax of the categorical logits, laid out like the condition
  /// vector. Feeds the conditional loss.
  Var cond_probs;
};

/// Binds generator parameters on `tape`; pass the result to generate() so
/// several generator passes share (and accumulate into) the same leaves.
std::vector<Var> bind_generator(Tape& tape, const GanModel& model, bool trainable);
std::vector<Var> bind_critic(Tape& tape, const GanModel& model, bool trainable);

/// Draws z ~ N(0, I) and runs the generator on [z | cond]. `cond` must be
/// (batch, cond_width).
GeneratedBatch generate(const GanModel& model, std::span<const Var> generator_params,
                        const Tensor& cond, std::size_t batch, Rng& rng);

/// Critic scores (batch, 1) for [rows | cond].
Var critic_scores(const GanModel& model, std::span<const Var> critic_params, Var rows, Var cond);

/// mean(f_fake) - mean(f_real).
Var critic_loss(Var f_real, Var f_fake);
/// Batch mean of -log p(conditioned category); 0 when the condition is empty.
Var cond_loss(Var cond_probs, const Tensor& cond);
/// -mean(f_fake) + cond_term (+ feedback_term when given).
Var generator_loss(Var f_fake, Var cond_term, std::optional<Var> feedback_term = std::nullopt);

/// Rows from a trained model in encoded layout, conditions drawn empirically.
Tensor sample_encoded(const GanModel& model, std::size_t n, Rng& rng);
std::vector<Row> sample_rows(const GanModel& model, std::size_t n, Rng& rng);

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

/// What a feedback hook sees on each generator step. The sampling callbacks
/// draw fresh conditions and noise from the rng they are given.
struct FeedbackContext {
  Tape& tape;
  int epoch;  // 1-based
  int total_epochs;
  std::size_t batch_size;
  /// `n` generator rows with no path back to the parameters.
  std::function<Tensor(std::size_t n, Rng&)> sample_detached;
  /// Generator output on `tape`, differentiable w.r.t. the bound parameters.
  std::function<Var(Rng&)> sample_live;
};

struct FeedbackOutput {
  Var term;     // added to the generator loss
  double loss;  // un-scaled downstream loss, for the trace
};

/// Returns the term to add for this generator step, or nullopt for none.
using FeedbackHook = std::function<std::optional<FeedbackOutput>(FeedbackContext&)>;

struct EpochLoss {
  int epoch = 0;
  double critic_loss = 0.0;
  double generator_loss = 0.0;
  double cond_loss = 0.0;
  double feedback_loss = 0.0;
};

/// Called after every epoch with the 1-based epoch index.
using EpochCallback = std::function<void(int epoch, const GanModel& model)>;

/// Trains `model` in place on encoded rows. Deterministic in (data, config,
/// model init). Throws TrainingAborted on a non-finite value.
std::vector<EpochLoss> train(GanModel& model, const Tensor& data, const TrainConfig& config,
                             const FeedbackHook& hook = {}, const EpochCallback& on_epoch = {});

}  // namespace dsfgan
