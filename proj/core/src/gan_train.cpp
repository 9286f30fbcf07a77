// Copyright 2026 The dsfgan Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>

#include "dsfgan/errors.hpp"
#include "dsfgan/gan.hpp"
#include "dsfgan/random.hpp"

namespace dsfgan {
namespace {

// Row indices grouped by the category each row holds, per categorical segment.
using CategoryIndex = std::vector<std::vector<std::vector<std::size_t>>>;

CategoryIndex index_categories(const TableSchema& schema, const Tensor& data) {
  CategoryIndex index;
  for (const CategoricalSegment& seg : schema.categorical_segments()) {
    std::vector<std::vector<std::size_t>> by_category(seg.width);
    for (std::size_t r = 0; r < data.rows(); ++r) {
      const auto s = data.row_span(r).subspan(seg.encoded_offset, seg.width);
      const auto cat = static_cast<std::size_t>(std::max_element(s.begin(), s.end()) - s.begin());
      by_category[cat].push_back(r);
    }
    index.push_back(std::move(by_category));
  }
  return index;
}

// Real rows matching each row's condition; uniform when the condition is
// empty or no training row holds the conditioned category.
Tensor gather_real(const Tensor& data, const CategoryIndex& index, const CondBatch& cb,
                   std::size_t batch, Rng& rng) {
  Tensor out(batch, data.cols());
  for (std::size_t r = 0; r < batch; ++r) {
    std::size_t src = 0;
    if (cb.segments.empty()) {
      src = rng.index(data.rows());
    } else {
      const auto& matching = index[cb.segments[r]][cb.categories[r]];
      src = matching.empty() ? rng.index(data.rows()) : matching[rng.index(matching.size())];
    }
    const auto row = data.row_span(src);
    std::copy(row.begin(), row.end(), out.row_span(r).begin());
  }
  return out;
}

std::vector<Tensor> collect_grads(const Tape& tape, const std::vector<Var>& params) {
  std::vector<Tensor> grads;
  grads.reserve(params.size());
  for (const Var& p : params) grads.push_back(tape.grad(p));
  return grads;
}

void clip_weights(Mlp& critic, double bound) {
  for (Tensor* t : critic.parameters()) {
    for (double& w : t->data()) w = std::clamp(w, -bound, bound);
  }
}

}  // namespace

std::vector<EpochLoss> train(GanModel& model, const Tensor& data, const TrainConfig& config,
                             const FeedbackHook& hook, const EpochCallback& on_epoch) {
  config.validate();
  const TableSchema& schema = model.schema();
  if (data.cols() != schema.width()) {
    throw ShapeError("train: data width " + std::to_string(data.cols()) + ", schema width " +
                     std::to_string(schema.width()));
  }
  if (data.rows() == 0) throw DataError("train: no training rows");

  const std::size_t batch = config.batch_size;
  const std::size_t steps = std::max<std::size_t>(1, data.rows() / batch);
  const CategoryIndex index = index_categories(schema, data);
  Rng rng(derive_seed(config.seed, "train"));
  AdamState generator_opt{config.generator_optimizer, {}, {}, 0};
  AdamState critic_opt{config.critic_optimizer, {}, {}, 0};

  std::vector<EpochLoss> trace;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    EpochLoss sums;
    sums.epoch = epoch;
    try {
      for (std::size_t step = 0; step < steps; ++step) {
        for (int k = 0; k < config.critic_steps; ++k) {
          Tape tape;
          CondBatch cb = sample_cond_batch(schema, batch, rng);
          Tensor real = gather_real(data, index, cb, batch, rng);
          auto frozen_g = bind_generator(tape, model, false);
          GeneratedBatch fake = generate(model, frozen_g, cb.vectors, batch, rng);
          auto critic_params = bind_critic(tape, model, true);
          Var cond = tape.constant(cb.vectors);
          Var f_real = critic_scores(model, critic_params, tape.constant(std::move(real)), cond);
          Var f_fake = critic_scores(model, critic_params, detach(fake.rows), cond);
          Var loss = critic_loss(f_real, f_fake);
          tape.backward(loss);
          auto grads = collect_grads(tape, critic_params);
          adam_step(model.critic().parameters(), grads, critic_opt);
          clip_weights(model.critic(), config.clip);
          sums.critic_loss += loss.value().item();
        }

        Tape tape;
        CondBatch cb = sample_cond_batch(schema, batch, rng);
        auto gen_params = bind_generator(tape, model, true);
        GeneratedBatch gen = generate(model, gen_params, cb.vectors, batch, rng);
        auto frozen_c = bind_critic(tape, model, false);
        Var f_fake = critic_scores(model, frozen_c, gen.rows, tape.constant(cb.vectors));
        Var h = cond_loss(gen.cond_probs, cb.vectors);

        std::optional<Var> feedback_term;
        if (hook) {
          FeedbackContext ctx{
              tape, epoch, config.epochs, batch,
              [&model, &schema](std::size_t n, Rng& r) {
                Tape local;
                auto p = bind_generator(local, model, false);
                CondBatch c = sample_cond_batch(schema, n, r);
                return generate(model, p, c.vectors, n, r).rows.value();
              },
              [&model, &schema, &gen_params, batch](Rng& r) {
                CondBatch c = sample_cond_batch(schema, batch, r);
                return generate(model, gen_params, c.vectors, batch, r).rows;
              }};
          if (auto out = hook(ctx)) {
            feedback_term = out->term;
            sums.feedback_loss += out->loss;
          }
        }
        Var loss = generator_loss(f_fake, h, feedback_term);
        tape.backward(loss);
        auto grads = collect_grads(tape, gen_params);
        adam_step(model.generator().parameters(), grads, generator_opt);
        sums.generator_loss += loss.value().item();
        sums.cond_loss += h.value().item();
      }
    } catch (const NumericError& e) {
      throw TrainingAborted(e.what(), epoch);
    }
    const double s = static_cast<double>(steps);
    sums.critic_loss /= s * static_cast<double>(config.critic_steps);
    sums.generator_loss /= s;
    sums.cond_loss /= s;
    sums.feedback_loss /= s;
    trace.push_back(sums);
    model.set_epochs_trained(epoch);
    if (on_epoch) on_epoch(epoch, model);
  }
  return trace;
}

}  // namespace dsfgan
