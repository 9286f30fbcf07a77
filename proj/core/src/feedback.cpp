// Copyright 2026 The dsfgan Authors
// SPDX-License-Identifier: Apache-2.0

#include "dsfgan/feedback.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>

#include "dsfgan/errors.hpp"
#include "dsfgan/random.hpp"

namespace dsfgan {
namespace {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Eigen::Map<const RowMajor> as_matrix(const Tensor& t) {
  return {t.data().data(), static_cast<Eigen::Index>(t.rows()),
          static_cast<Eigen::Index>(t.cols())};
}

double stable_sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

DownstreamFitConfig DownstreamFitConfig::defaults_for(TaskKind task) {
  return {200, task == TaskKind::kClassification ? 0.1 : 0.05};
}

void FeedbackConfig::validate() const {
  if (!std::isfinite(lambda) || lambda < 0.0) throw ConfigError("lambda must be non-negative");
  if (fit.steps < 1) throw ConfigError("downstream fit steps must be positive");
  if (!(fit.learning_rate > 0.0)) throw ConfigError("downstream learning rate must be positive");
}

nlohmann::json FeedbackConfig::to_json() const {
  return {{"lambda", lambda},
          {"fit_steps", fit.steps},
          {"fit_learning_rate", fit.learning_rate},
          {"fit_samples", fit_samples}};
}

int warmup_epochs(int total_epochs) { return total_epochs / 2; }

bool feedback_active(int epoch, int total_epochs) { return epoch > warmup_epochs(total_epochs); }

DesignMatrix downstream_design(const Tensor& encoded, const TableSchema& schema) {
  if (encoded.cols() != schema.width()) {
    throw ShapeError("downstream_design: width " + std::to_string(encoded.cols()) +
                     ", schema width " + std::to_string(schema.width()));
  }
  const ColumnLayout& t = schema.target_layout();
  const ColumnMeta& target = schema.target();
  DesignMatrix d{Tensor(encoded.rows(), encoded.cols() - t.width), Tensor(encoded.rows(), 1)};
  for (std::size_t r = 0; r < encoded.rows(); ++r) {
    const auto row = encoded.row_span(r);
    auto out = d.features.row_span(r);
    std::copy(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(t.offset), out.begin());
    std::copy(row.begin() + static_cast<std::ptrdiff_t>(t.offset + t.width), row.end(),
              out.begin() + static_cast<std::ptrdiff_t>(t.offset));
    const auto seg = row.subspan(t.offset, t.width);
    if (schema.task() == TaskKind::kClassification) {
      const auto cls = static_cast<std::size_t>(std::max_element(seg.begin(), seg.end()) - seg.begin());
      d.labels(r, 0) = cls == schema.positive_index() ? 1.0 : 0.0;
    } else {
      const auto modes = seg.subspan(1);
      const auto k = static_cast<std::size_t>(std::max_element(modes.begin(), modes.end()) -
                                              modes.begin());
      const MixtureMode& m = target.modes[k];
      d.labels(r, 0) = schema.scale_target(seg[0] * 4.0 * m.stddev + m.mean);
    }
  }
  return d;
}

Var downstream_features(Var encoded, const TableSchema& schema) {
  const ColumnLayout& t = schema.target_layout();
  const std::size_t tail = schema.width() - t.offset - t.width;
  std::vector<Var> parts;
  if (t.offset > 0) parts.push_back(slice_cols(encoded, 0, t.offset));
  if (tail > 0) parts.push_back(slice_cols(encoded, t.offset + t.width, tail));
  if (parts.empty()) throw ShapeError("downstream_features: schema has no feature columns");
  return parts.size() == 1 ? parts.front() : concat_cols(parts);
}

Var downstream_labels(Var encoded, const TableSchema& schema) {
  const ColumnLayout& t = schema.target_layout();
  if (schema.task() == TaskKind::kClassification) {
    return slice_cols(encoded, t.offset + schema.positive_index(), 1);
  }
  const ColumnMeta& target = schema.target();
  Tape& tape = encoded.tape();
  std::vector<double> four_sigma;
  std::vector<double> mu;
  for (const MixtureMode& m : target.modes) {
    four_sigma.push_back(4.0 * m.stddev);
    mu.push_back(m.mean);
  }
  Var alpha = slice_cols(encoded, t.offset, 1);
  Var mode_probs = slice_cols(encoded, t.offset + 1, t.width - 1);
  Var spread = matmul(mode_probs, tape.constant(Tensor::column(std::move(four_sigma))));
  Var centre = matmul(mode_probs, tape.constant(Tensor::column(std::move(mu))));
  Var value = add(mul(alpha, spread), centre);
  const double range = target.max - target.min;
  if (!(range > 0.0)) return affine(value, 0.0, 0.0);
  return affine(value, 1.0 / range, -target.min / range);
}

std::optional<DownstreamModel> fit_downstream(const DesignMatrix& design, TaskKind task,
                                              const DownstreamFitConfig& config) {
  const Tensor& x = design.features;
  const Tensor& y = design.labels;
  if (y.rows() != x.rows() || y.cols() != 1) {
    throw ShapeError("fit_downstream: labels " + y.shape_string() + " for features " +
                     x.shape_string());
  }
  if (x.rows() == 0) return std::nullopt;
  if (task == TaskKind::kClassification) {
    const auto labels = y.data();
    const bool one_class =
        std::all_of(labels.begin(), labels.end(), [&](double v) { return v == labels[0]; });
    if (one_class) return std::nullopt;
  }

  const auto X = as_matrix(x);
  const Eigen::Map<const Eigen::VectorXd> Y(y.data().data(), static_cast<Eigen::Index>(y.rows()));
  const double m = static_cast<double>(x.rows());
  Eigen::VectorXd w = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(x.cols()));
  double b = 0.0;
  Eigen::VectorXd residual(Y.size());
  for (int step = 0; step < config.steps; ++step) {
    residual.noalias() = X * w;
    residual.array() += b;
    if (task == TaskKind::kClassification) {
      residual = residual.unaryExpr([](double z) { return stable_sigmoid(z); });
      residual -= Y;  // gradient of mean log-loss w.r.t. the logits, times m
    } else {
      residual -= Y;
      residual *= 2.0;  // gradient of mean squared error, times m
    }
    w.noalias() -= (config.learning_rate / m) * (X.transpose() * residual);
    b -= config.learning_rate * residual.sum() / m;
  }

  DownstreamModel model;
  model.task = task;
  model.weights = Tensor(x.cols(), 1, std::vector<double>(w.data(), w.data() + w.size()));
  model.bias = b;
  if (!model.weights.all_finite() || !std::isfinite(b)) {
    throw NumericError("fit_downstream: parameters diverged");
  }
  return model;
}

std::vector<double> predict(const DownstreamModel& model, const Tensor& features) {
  if (features.cols() != model.weights.rows()) {
    throw ShapeError("predict: " + std::to_string(features.cols()) + " features, model expects " +
                     std::to_string(model.weights.rows()));
  }
  std::vector<double> out(features.rows());
  const auto w = model.weights.data();
  for (std::size_t r = 0; r < features.rows(); ++r) {
    const auto row = features.row_span(r);
    double z = model.bias;
    for (std::size_t c = 0; c < row.size(); ++c) z += row[c] * w[c];
    out[r] = model.task == TaskKind::kClassification ? stable_sigmoid(z) : z;
  }
  return out;
}

Var log_loss(Var probabilities, Var labels) {
  Var p = clamp(probabilities, kProbabilityClamp, 1.0 - kProbabilityClamp);
  Var pos = mul(labels, log(p));
  Var neg_part = mul(affine(labels, -1.0, 1.0), log(affine(p, -1.0, 1.0)));
  return neg(mean(add(pos, neg_part)));
}

Var rmse_loss(Var predictions, Var labels) { return sqrt(mean(square(sub(predictions, labels)))); }

FeedbackLoss feedback_loss(const DownstreamModel& model, Var live_batch, const TableSchema& schema) {
  Tape& tape = live_batch.tape();
  FeedbackLoss out;
  out.weights = tape.parameter(model.weights);
  out.bias = tape.parameter(Tensor::scalar(model.bias));
  Var features = downstream_features(live_batch, schema);
  Var labels = downstream_labels(live_batch, schema);
  Var z = add_bias(matmul(features, detach(out.weights)), detach(out.bias));
  out.loss = model.task == TaskKind::kClassification ? log_loss(sigmoid(z), labels)
                                                     : rmse_loss(z, labels);
  return out;
}

Var feedback_term(Var loss, double lambda) {
  if (!(lambda >= 0.0)) throw ConfigError("lambda must be non-negative");
  return scale(loss, lambda);
}

FeedbackHook make_feedback_hook(const FeedbackConfig& config,
                                std::shared_ptr<const TableSchema> schema, std::uint64_t seed,
                                std::shared_ptr<FeedbackStats> stats) {
  config.validate();
  struct State {
    FeedbackConfig config;
    std::shared_ptr<const TableSchema> schema;
    Rng rng;
    std::optional<DownstreamModel> last;
    std::shared_ptr<FeedbackStats> stats;
  };
  auto state = std::make_shared<State>(
      State{config, std::move(schema), Rng(derive_seed(seed, "feedback")), std::nullopt,
            stats ? std::move(stats) : std::make_shared<FeedbackStats>()});

  return [state](FeedbackContext& ctx) -> std::optional<FeedbackOutput> {
    if (!feedback_active(ctx.epoch, ctx.total_epochs)) return std::nullopt;
    State& s = *state;
    ++s.stats->activations;
    const std::size_t n = s.config.fit_samples > 0 ? s.config.fit_samples : ctx.batch_size;
    const Tensor synthetic = ctx.sample_detached(n, s.rng);
    if (auto fitted = fit_downstream(downstream_design(synthetic, *s.schema), s.schema->task(),
                                     s.config.fit)) {
      s.last = std::move(fitted);
      ++s.stats->refits;
    } else {
      ++s.stats->skipped_refits;
    }
    if (!s.last) return std::nullopt;
    Var live = ctx.sample_live(s.rng);
    FeedbackLoss fl = feedback_loss(*s.last, live, *s.schema);
    return FeedbackOutput{feedback_term(fl.loss, s.config.lambda), fl.loss.value().item()};
  };
}

}  // namespace dsfgan
