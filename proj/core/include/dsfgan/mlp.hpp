// Copyright 2026 The dsfgan Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "dsfgan/autodiff.hpp"
#include "dsfgan/tensor.hpp"

namespace dsfgan {

class Rng;

/// Fully connected layer: y = x * weight + bias, weight (in, out), bias (1, out).
struct Dense {
  Tensor weight;
  Tensor bias;
};

enum class Activation { kRelu, kLeakyRelu, kTanh };

/// Stack of dense layers with a shared hidden activation and a linear output.
class Mlp {
 public:
  Mlp() = default;
  /// `widths` = {input, hidden..., output}. Weights and biases are drawn
  /// uniformly from +-1/sqrt(fan_in).
  Mlp(const std::vector<std::size_t>& widths, Activation hidden, double leaky_slope, Rng& rng);
  Mlp(std::vector<Dense> layers, Activation hidden, double leaky_slope);

  /// Binds the parameters onto `tape` (as tracked leaves when `trainable`,
  /// constants otherwise) and returns the output node. Bound leaves are
  /// appended to `bound` in parameters() order when it is non-null.
  Var forward(Tape& tape, Var input, bool trainable, std::vector<Var>* bound = nullptr) const;

  /// Parameters as leaves on `tape`, ordered weight0, bias0, weight1, ...
  std::vector<Var> bind(Tape& tape, bool trainable) const;
  /// Forward pass through previously bound parameters.
  Var apply(Var input, std::span<const Var> params) const;

  std::vector<Tensor*> parameters();
  std::vector<const Tensor*> parameters() const;

  const std::vector<Dense>& layers() const noexcept { return layers_; }
  Activation hidden_activation() const noexcept { return hidden_; }
  double leaky_slope() const noexcept { return slope_; }
  std::size_t input_width() const;
  std::size_t output_width() const;

 private:
  std::vector<Dense> layers_;
  Activation hidden_ = Activation::kRelu;
  double slope_ = 0.2;
};

}  // namespace dsfgan
