// Copyright 2026 The dsfgan Authors
// SPDX-License-Identifier: Apache-2.0

#include "dsfgan/mlp.hpp"

#include <cmath>

#include "dsfgan/errors.hpp"
#include "dsfgan/random.hpp"

namespace dsfgan {

Mlp::Mlp(const std::vector<std::size_t>& widths, Activation hidden, double leaky_slope, Rng& rng)
    : hidden_(hidden), slope_(leaky_slope) {
  if (widths.size() < 2) throw ShapeError("Mlp: need at least input and output widths");
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    const std::size_t in = widths[l];
    const std::size_t out = widths[l + 1];
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    Dense layer{Tensor(in, out), Tensor(1, out)};
    for (double& w : layer.weight.data()) w = (2.0 * rng.uniform() - 1.0) * bound;
    for (double& b : layer.bias.data()) b = (2.0 * rng.uniform() - 1.0) * bound;
    layers_.push_back(std::move(layer));
  }
}

Mlp::Mlp(std::vector<Dense> layers, Activation hidden, double leaky_slope)
    : layers_(std::move(layers)), hidden_(hidden), slope_(leaky_slope) {
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const Dense& d = layers_[l];
    if (d.bias.rows() != 1 || d.bias.cols() != d.weight.cols()) {
      throw ShapeError("Mlp: bias shape " + d.bias.shape_string() + " for weight " +
                       d.weight.shape_string());
    }
    if (l > 0 && layers_[l - 1].weight.cols() != d.weight.rows()) {
      throw ShapeError("Mlp: layer " + std::to_string(l) + " input width mismatch");
    }
  }
}

Var Mlp::forward(Tape& tape, Var input, bool trainable, std::vector<Var>* bound) const {
  std::vector<Var> params = bind(tape, trainable);
  Var out = apply(input, params);
  if (bound != nullptr) bound->insert(bound->end(), params.begin(), params.end());
  return out;
}

std::vector<Var> Mlp::bind(Tape& tape, bool trainable) const {
  std::vector<Var> params;
  params.reserve(2 * layers_.size());
  for (const Dense& d : layers_) {
    params.push_back(tape.leaf(d.weight, trainable));
    params.push_back(tape.leaf(d.bias, trainable));
  }
  return params;
}

Var Mlp::apply(Var input, std::span<const Var> params) const {
  if (params.size() != 2 * layers_.size()) {
    throw ShapeError("Mlp::apply: " + std::to_string(params.size()) + " bound tensors for " +
                     std::to_string(layers_.size()) + " layers");
  }
  if (input.cols() != input_width()) {
    throw ShapeError("Mlp::apply: input width " + std::to_string(input.cols()) + ", expected " +
                     std::to_string(input_width()));
  }
  Var h = input;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    h = add_bias(matmul(h, params[2 * l]), params[2 * l + 1]);
    if (l + 1 == layers_.size()) break;
    switch (hidden_) {
      case Activation::kRelu: h = relu(h); break;
      case Activation::kLeakyRelu: h = leaky_relu(h, slope_); break;
      case Activation::kTanh: h = tanh(h); break;
    }
  }
  return h;
}

std::vector<Tensor*> Mlp::parameters() {
  std::vector<Tensor*> out;
  for (Dense& d : layers_) {
    out.push_back(&d.weight);
    out.push_back(&d.bias);
  }
  return out;
}

std::vector<const Tensor*> Mlp::parameters() const {
  std::vector<const Tensor*> out;
  for (const Dense& d : layers_) {
    out.push_back(&d.weight);
    out.push_back(&d.bias);
  }
  return out;
}

std::size_t Mlp::input_width() const { return layers_.empty() ? 0 : layers_.front().weight.rows(); }
std::size_t Mlp::output_width() const { return layers_.empty() ? 0 : layers_.back().weight.cols(); }

}  // namespace dsfgan
