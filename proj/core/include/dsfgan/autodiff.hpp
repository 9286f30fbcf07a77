// Copyright 2026 The dsfgan Authors
// SPDX-License-Identifier: Apache-2.0
//
// Reverse-mode automatic differentiation over 2-D tensors.
//
// The tape is eager: each op computes its forward value immediately, checks it
// for NaN/Inf, and records a backward closure. `Tape::backward` replays the
// closures in reverse creation order, which is a reverse topological order
// because every node's inputs were created before it.
//
//   Tape tape;
//   Var w = tape.parameter(Tensor::scalar(3.0));
//   Var loss = mul(w, w);
//   tape.backward(loss);
//   tape.grad(w).item();  // 6

#pragma once

#include <cstddef>
#include <deque>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "dsfgan/tensor.hpp"

namespace dsfgan {

class Rng;
class Tape;

enum class OpKind {
  kLeaf,
  kMatmul,
  kAdd,
  kSub,
  kMul,
  kAddBias,
  kAffine,
  kLeakyRelu,
  kTanh,
  kSigmoid,
  kSoftmax,
  kLog,
  kSqrt,
  kSquare,
  kClamp,
  kMean,
  kSum,
  kRowSum,
  kConcat,
  kSlice,
  kDetach,
};

const char* op_name(OpKind op);

/// Handle to a node on a tape. Cheap to copy; valid while the tape lives.
class Var {
 public:
  Var() = default;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  bool valid() const noexcept { return tape_ != nullptr; }
  Tape& tape() const;
  std::size_t id() const noexcept { return id_; }
  const Tensor& value() const;
  std::size_t rows() const { return value().rows(); }
  std::size_t cols() const { return value().cols(); }

 private:
  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

struct TapeNode {
  /// Receives the tape and this node (whose `grad` holds the upstream gradient).
  using BackwardFn = std::function<void(Tape&, const TapeNode& self)>;

  OpKind op = OpKind::kLeaf;
  std::vector<std::size_t> inputs;
  Tensor value;
  Tensor grad;  // empty until backward reaches the node
  bool requires_grad = false;
  BackwardFn backward;
};

class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  /// Leaf whose gradient is tracked.
  Var parameter(Tensor value) { return leaf(std::move(value), true); }
  /// Leaf that never receives gradient.
  Var constant(Tensor value) { return leaf(std::move(value), false); }
  Var leaf(Tensor value, bool requires_grad);

  /// Appends an op node. Throws NumericError if `value` is not finite.
  Var record(OpKind op, std::vector<std::size_t> inputs, Tensor value,
             TapeNode::BackwardFn backward);

  /// Runs reverse accumulation from a 1x1 output. Gradients from any earlier
  /// backward call are cleared first, so repeated calls give identical results.
  void backward(Var output);

  /// Gradient of the last backward output w.r.t. `v`; zeros if none reached it.
  Tensor grad(Var v) const;

  const TapeNode& node(std::size_t id) const { return nodes_.at(id); }
  std::size_t size() const noexcept { return nodes_.size(); }
  bool requires_grad(std::size_t id) const { return nodes_.at(id).requires_grad; }

  /// Adds `g` into the gradient accumulator of node `id` (no-op for nodes
  /// that do not require grad). Used by backward closures.
  void accumulate(std::size_t id, const Tensor& g);
  /// Mutable accumulator, allocated to zeros on first use.
  Tensor& grad_buffer(std::size_t id);

 private:
  // A deque keeps references from Var::value() valid as the tape grows.
  std::deque<TapeNode> nodes_;
};

// ---------------------------------------------------------------------------
// Ops. Shape rules are stated per op; violations throw ShapeError. All inputs
// of a multi-input op must live on the same tape.
// ---------------------------------------------------------------------------

/// (n,k) x (k,m) -> (n,m).
Var matmul(Var a, Var b);
/// Elementwise; identical shapes.
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
/// (n,m) + (1,m) broadcast over rows.
Var add_bias(Var a, Var bias);
/// scale * a + shift.
Var affine(Var a, double scale, double shift = 0.0);
inline Var scale(Var a, double s) { return affine(a, s, 0.0); }
inline Var neg(Var a) { return affine(a, -1.0, 0.0); }

Var leaky_relu(Var a, double slope);
inline Var relu(Var a) { return leaky_relu(a, 0.0); }
Var tanh(Var a);
Var sigmoid(Var a);
/// Row-wise softmax over all columns. Apply per categorical segment via
/// slice_cols / concat_cols.
Var softmax(Var a);
Var log(Var a);
/// Elementwise sqrt; the derivative at exactly 0 is taken as 0.
Var sqrt(Var a);
Var square(Var a);
/// Clamps into [lo, hi]; gradient passes only where lo <= a <= hi.
Var clamp(Var a, double lo, double hi);

/// Mean of all entries -> (1,1).
Var mean(Var a);
/// Sum of all entries -> (1,1).
Var sum(Var a);
/// Per-row sum (n,m) -> (n,1).
Var row_sum(Var a);

/// Concatenate along the feature (column) axis; all parts share row count.
Var concat_cols(std::span<const Var> parts);
Var concat_cols(std::initializer_list<Var> parts);
/// Columns [offset, offset + width).
Var slice_cols(Var a, std::size_t offset, std::size_t width);

/// Same value, no gradient flows back through it.
Var detach(Var a);

/// softmax((logits + g) / tau) with g ~ Gumbel(0, 1) drawn from `rng`.
Var gumbel_softmax(Var logits, double tau, Rng& rng);

}  // namespace dsfgan
