// Copyright 2026 The dsfgan Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>

#include "dsfgan/autodiff.hpp"
#include "dsfgan/errors.hpp"

namespace dsfgan {

const char* op_name(OpKind op) {
  switch (op) {
    case OpKind::kLeaf: return "leaf";
    case OpKind::kMatmul: return "matmul";
    case OpKind::kAdd: return "add";
    case OpKind::kSub: return "sub";
    case OpKind::kMul: return "mul";
    case OpKind::kAddBias: return "add_bias";
    case OpKind::kAffine: return "affine";
    case OpKind::kLeakyRelu: return "leaky_relu";
    case OpKind::kTanh: return "tanh";
    case OpKind::kSigmoid: return "sigmoid";
    case OpKind::kSoftmax: return "softmax";
    case OpKind::kLog: return "log";
    case OpKind::kSqrt: return "sqrt";
    case OpKind::kSquare: return "square";
    case OpKind::kClamp: return "clamp";
    case OpKind::kMean: return "mean";
    case OpKind::kSum: return "sum";
    case OpKind::kRowSum: return "row_sum";
    case OpKind::kConcat: return "concat_cols";
    case OpKind::kSlice: return "slice_cols";
    case OpKind::kDetach: return "detach";
  }
  return "unknown";
}

Tape& Var::tape() const {
  if (tape_ == nullptr) throw ShapeError("Var: use of an unbound variable (no forward value)");
  return *tape_;
}

const Tensor& Var::value() const { return tape().node(id_).value; }

Var Tape::leaf(Tensor value, bool requires_grad) {
  if (!value.all_finite()) throw NumericError("non-finite value in leaf " + value.shape_string());
  TapeNode node;
  node.op = OpKind::kLeaf;
  node.value = std::move(value);
  node.requires_grad = requires_grad;
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

Var Tape::record(OpKind op, std::vector<std::size_t> inputs, Tensor value,
                 TapeNode::BackwardFn backward) {
  if (!value.all_finite()) {
    throw NumericError(std::string("non-finite value produced by ") + op_name(op) + " " +
                       value.shape_string());
  }
  TapeNode node;
  node.op = op;
  node.requires_grad = std::any_of(inputs.begin(), inputs.end(),
                                   [this](std::size_t i) { return nodes_[i].requires_grad; });
  node.inputs = std::move(inputs);
  node.value = std::move(value);
  if (node.requires_grad) node.backward = std::move(backward);
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

void Tape::backward(Var output) {
  if (&output.tape() != this) throw ShapeError("backward: output belongs to another tape");
  const std::size_t out = output.id();
  if (out >= nodes_.size()) throw ShapeError("backward: output was never computed on this tape");
  const Tensor& v = nodes_[out].value;
  if (v.rows() != 1 || v.cols() != 1) {
    throw ShapeError("backward: output must be scalar, got " + v.shape_string());
  }
  for (auto& node : nodes_) node.grad = Tensor();
  nodes_[out].grad = Tensor(1, 1, 1.0);
  for (std::size_t id = out + 1; id-- > 0;) {
    const TapeNode& node = nodes_[id];
    if (!node.requires_grad || node.grad.size() == 0 || !node.backward) continue;
    node.backward(*this, node);
  }
}

Tensor Tape::grad(Var v) const {
  const TapeNode& n = nodes_.at(v.id());
  if (n.grad.size() == 0) return Tensor(n.value.rows(), n.value.cols(), 0.0);
  return n.grad;
}

Tensor& Tape::grad_buffer(std::size_t id) {
  TapeNode& n = nodes_[id];
  if (n.grad.size() == 0) n.grad = Tensor(n.value.rows(), n.value.cols(), 0.0);
  return n.grad;
}

void Tape::accumulate(std::size_t id, const Tensor& g) {
  if (!nodes_[id].requires_grad) return;
  Tensor& buf = grad_buffer(id);
  if (!buf.same_shape(g)) {
    throw ShapeError("gradient shape " + g.shape_string() + " does not match value " +
                     buf.shape_string());
  }
  auto dst = buf.data();
  auto src = g.data();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
}

}  // namespace dsfgan
