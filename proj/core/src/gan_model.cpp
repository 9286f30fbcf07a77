// Copyright 2026 The dsfgan Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <fstream>

#include "dsfgan/digest.hpp"
#include "dsfgan/errors.hpp"
#include "dsfgan/gan.hpp"
#include "dsfgan/random.hpp"

namespace dsfgan {
namespace {

constexpr std::size_t kSampleChunk = 500;

nlohmann::json mlp_to_json(const Mlp& mlp) {
  nlohmann::json layers = nlohmann::json::array();
  for (const Dense& d : mlp.layers()) {
    layers.push_back({{"in", d.weight.rows()},
                      {"out", d.weight.cols()},
                      {"weight", d.weight.values()},
                      {"bias", d.bias.values()}});
  }
  return layers;
}

Mlp mlp_from_json(const nlohmann::json& j, Activation act, double slope) {
  std::vector<Dense> layers;
  for (const auto& jl : j) {
    const auto in = jl.at("in").get<std::size_t>();
    const auto out = jl.at("out").get<std::size_t>();
    layers.push_back({Tensor(in, out, jl.at("weight").get<std::vector<double>>()),
                      Tensor(1, out, jl.at("bias").get<std::vector<double>>())});
  }
  return Mlp(std::move(layers), act, slope);
}

std::vector<std::size_t> widths(std::size_t in, const std::vector<std::size_t>& hidden,
                                std::size_t out) {
  std::vector<std::size_t> w{in};
  w.insert(w.end(), hidden.begin(), hidden.end());
  w.push_back(out);
  return w;
}

}  // namespace

nlohmann::json Architecture::to_json() const {
  return {{"noise_dim", noise_dim},
          {"generator_hidden", generator_hidden},
          {"critic_hidden", critic_hidden},
          {"critic_leaky_slope", critic_leaky_slope},
          {"gumbel_tau", gumbel_tau}};
}

Architecture Architecture::from_json(const nlohmann::json& j) {
  Architecture a;
  a.noise_dim = j.at("noise_dim").get<std::size_t>();
  a.generator_hidden = j.at("generator_hidden").get<std::vector<std::size_t>>();
  a.critic_hidden = j.at("critic_hidden").get<std::vector<std::size_t>>();
  a.critic_leaky_slope = j.at("critic_leaky_slope").get<double>();
  a.gumbel_tau = j.at("gumbel_tau").get<double>();
  return a;
}

void TrainConfig::validate() const {
  if (epochs < 2) throw ConfigError("epochs must be at least 2");
  if (batch_size < 2) throw ConfigError("batch size must be at least 2");
  if (!(clip > 0.0)) throw ConfigError("clip bound must be positive");
  if (critic_steps < 1) throw ConfigError("critic steps must be at least 1");
}

nlohmann::json TrainConfig::to_json() const {
  auto adam = [](const AdamConfig& a) {
    return nlohmann::json{{"learning_rate", a.learning_rate},
                          {"beta1", a.beta1},
                          {"beta2", a.beta2},
                          {"epsilon", a.epsilon}};
  };
  return {{"epochs", epochs},
          {"batch_size", batch_size},
          {"generator_optimizer", adam(generator_optimizer)},
          {"critic_optimizer", adam(critic_optimizer)},
          {"critic_steps", critic_steps},
          {"clip", clip},
          {"seed", seed}};
}

CondVector sample_cond_vector(const TableSchema& schema, Rng& rng, CondSampling mode) {
  const auto& segments = schema.categorical_segments();
  CondVector cv;
  if (segments.empty()) return cv;
  cv.vector.assign(schema.cond_width(), 0.0);
  cv.segment = rng.index(segments.size());
  const CategoricalSegment& seg = segments[cv.segment];
  const ColumnMeta& col = schema.columns()[seg.column];

  std::vector<double> weights(seg.width, 1.0);
  if (col.category_counts.size() == seg.width) {
    for (std::size_t c = 0; c < seg.width; ++c) {
      const double n = static_cast<double>(col.category_counts[c]);
      weights[c] = mode == CondSampling::kTraining ? std::log1p(n) : n;
    }
    if (std::all_of(weights.begin(), weights.end(), [](double w) { return w == 0.0; })) {
      std::fill(weights.begin(), weights.end(), 1.0);
    }
  }
  cv.category = rng.categorical(weights);
  cv.vector[seg.cond_offset + cv.category] = 1.0;
  return cv;
}

CondBatch sample_cond_batch(const TableSchema& schema, std::size_t batch, Rng& rng,
                            CondSampling mode) {
  CondBatch out;
  out.vectors = Tensor(batch, schema.cond_width());
  if (schema.cond_width() == 0) return out;
  out.segments.reserve(batch);
  out.categories.reserve(batch);
  for (std::size_t r = 0; r < batch; ++r) {
    CondVector cv = sample_cond_vector(schema, rng, mode);
    std::copy(cv.vector.begin(), cv.vector.end(), out.vectors.row_span(r).begin());
    out.segments.push_back(cv.segment);
    out.categories.push_back(cv.category);
  }
  return out;
}

GanModel::GanModel(std::shared_ptr<const TableSchema> schema, Architecture arch,
                   std::uint64_t seed)
    : schema_(std::move(schema)), arch_(std::move(arch)), seed_(seed) {
  if (!schema_) throw ConfigError("GanModel: null schema");
  Rng rng(derive_seed(seed, "init"));
  const std::size_t w = schema_->width();
  const std::size_t cw = schema_->cond_width();
  generator_ = Mlp(widths(arch_.noise_dim + cw, arch_.generator_hidden, w), Activation::kRelu, 0.0,
                   rng);
  critic_ = Mlp(widths(w + cw, arch_.critic_hidden, 1), Activation::kLeakyRelu,
                arch_.critic_leaky_slope, rng);
}

std::string GanModel::parameter_digest() const {
  Digest d;
  for (const Tensor* t : generator_.parameters()) d.update(*t);
  d.update("|critic|");
  for (const Tensor* t : critic_.parameters()) d.update(*t);
  return d.hex();
}

nlohmann::json GanModel::to_json() const {
  return {{"format_version", kFormatVersion},
          {"schema", schema_->to_json()},
          {"architecture", arch_.to_json()},
          {"seed", seed_},
          {"epochs_trained", epochs_trained_},
          {"generator", mlp_to_json(generator_)},
          {"critic", mlp_to_json(critic_)}};
}

GanModel GanModel::from_json(const nlohmann::json& j) {
  try {
    if (j.at("format_version").get<int>() != kFormatVersion) {
      throw ConfigError("model: unsupported format_version");
    }
    GanModel m;
    m.schema_ = std::make_shared<const TableSchema>(TableSchema::from_json(j.at("schema")));
    m.arch_ = Architecture::from_json(j.at("architecture"));
    m.seed_ = j.at("seed").get<std::uint64_t>();
    m.epochs_trained_ = j.at("epochs_trained").get<int>();
    m.generator_ = mlp_from_json(j.at("generator"), Activation::kRelu, 0.0);
    m.critic_ = mlp_from_json(j.at("critic"), Activation::kLeakyRelu, m.arch_.critic_leaky_slope);
    const std::size_t w = m.schema_->width();
    const std::size_t cw = m.schema_->cond_width();
    if (m.generator_.input_width() != m.arch_.noise_dim + cw || m.generator_.output_width() != w ||
        m.critic_.input_width() != w + cw || m.critic_.output_width() != 1) {
      throw ConfigError("model: layer widths do not match schema and architecture");
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed model document: ") + e.what());
  } catch (const ShapeError& e) {
    throw ConfigError(std::string("malformed model document: ") + e.what());
  }
}

void GanModel::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write model file '" + path + "'");
  out << to_json().dump() << '\n';
}

GanModel GanModel::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open model file '" + path + "'");
  try {
    return from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("model file '" + path + "': " + e.what());
  }
}

std::vector<Var> bind_generator(Tape& tape, const GanModel& model, bool trainable) {
  return model.generator().bind(tape, trainable);
}

std::vector<Var> bind_critic(Tape& tape, const GanModel& model, bool trainable) {
  return model.critic().bind(tape, trainable);
}

GeneratedBatch generate(const GanModel& model, std::span<const Var> generator_params,
                        const Tensor& cond, std::size_t batch, Rng& rng) {
  if (generator_params.empty()) throw ShapeError("generate: no bound generator parameters");
  const TableSchema& schema = model.schema();
  if (cond.rows() != batch || cond.cols() != schema.cond_width()) {
    throw ShapeError("generate: condition " + cond.shape_string() + " for batch " +
                     std::to_string(batch) + ", cond width " +
                     std::to_string(schema.cond_width()));
  }
  Tape& tape = generator_params.front().tape();
  Tensor z(batch, model.architecture().noise_dim);
  for (double& v : z.data()) v = rng.normal();
  Var input = tape.constant(std::move(z));
  if (schema.cond_width() > 0) input = concat_cols({input, tape.constant(cond)});
  Var raw = model.generator().apply(input, generator_params);

  const double tau = model.architecture().gumbel_tau;
  std::vector<Var> parts;
  std::vector<Var> cond_parts;
  for (std::size_t c = 0; c < schema.columns().size(); ++c) {
    const ColumnLayout& lay = schema.layout()[c];
    if (schema.columns()[c].kind == ColumnKind::kContinuous) {
      parts.push_back(tanh(slice_cols(raw, lay.offset, 1)));
      parts.push_back(gumbel_softmax(slice_cols(raw, lay.offset + 1, lay.width - 1), tau, rng));
    } else {
      Var logits = slice_cols(raw, lay.offset, lay.width);
      parts.push_back(gumbel_softmax(logits, tau, rng));
      cond_parts.push_back(softmax(logits));
    }
  }
  GeneratedBatch out;
  out.rows = concat_cols(parts);
  out.cond_probs = cond_parts.empty() ? tape.constant(Tensor(batch, 0)) : concat_cols(cond_parts);
  return out;
}

Var critic_scores(const GanModel& model, std::span<const Var> critic_params, Var rows, Var cond) {
  Var input = cond.cols() > 0 ? concat_cols({rows, cond}) : rows;
  return model.critic().apply(input, critic_params);
}

Var critic_loss(Var f_real, Var f_fake) {
  if (f_real.rows() != f_fake.rows()) {
    throw ShapeError("critic_loss: real batch " + std::to_string(f_real.rows()) +
                     " vs fake batch " + std::to_string(f_fake.rows()));
  }
  return sub(mean(f_fake), mean(f_real));
}

Var cond_loss(Var cond_probs, const Tensor& cond) {
  Tape& tape = cond_probs.tape();
  if (cond.cols() == 0) return tape.constant(Tensor::scalar(0.0));
  if (!cond.same_shape(cond_probs.value())) {
    throw ShapeError("cond_loss: probabilities " + cond_probs.value().shape_string() +
                     " vs condition " + cond.shape_string());
  }
  Var picked = row_sum(mul(cond_probs, tape.constant(cond)));
  return neg(mean(log(clamp(picked, 1e-300, 1.0))));
}

Var generator_loss(Var f_fake, Var cond_term, std::optional<Var> feedback_term) {
  Var loss = add(neg(mean(f_fake)), cond_term);
  if (feedback_term) loss = add(loss, *feedback_term);
  return loss;
}

Tensor sample_encoded(const GanModel& model, std::size_t n, Rng& rng) {
  const TableSchema& schema = model.schema();
  Tensor out(n, schema.width());
  for (std::size_t start = 0; start < n; start += kSampleChunk) {
    const std::size_t batch = std::min(kSampleChunk, n - start);
    Tape tape;
    auto params = bind_generator(tape, model, false);
    CondBatch cb = sample_cond_batch(schema, batch, rng, CondSampling::kEmpirical);
    GeneratedBatch gen = generate(model, params, cb.vectors, batch, rng);
    const Tensor& v = gen.rows.value();
    std::copy(v.data().begin(), v.data().end(),
              out.data().begin() + static_cast<std::ptrdiff_t>(start * schema.width()));
  }
  return out;
}

std::vector<Row> sample_rows(const GanModel& model, std::size_t n, Rng& rng) {
  return model.schema().decode(sample_encoded(model, n, rng));
}

}  // namespace dsfgan
