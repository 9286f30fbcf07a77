// Copyright 2026 The dsfgan Authors
// SPDX-License-Identifier: Apache-2.0

#include <Eigen/Core>
#include <algorithm>
#include <cmath>

#include "dsfgan/autodiff.hpp"
#include "dsfgan/errors.hpp"
#include "dsfgan/random.hpp"

namespace dsfgan {
namespace {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMajor>;
using MutMap = Eigen::Map<RowMajor>;

ConstMap as_matrix(const Tensor& t) {
  return ConstMap(t.data().data(), static_cast<Eigen::Index>(t.rows()),
                  static_cast<Eigen::Index>(t.cols()));
}
MutMap as_matrix(Tensor& t) {
  return MutMap(t.data().data(), static_cast<Eigen::Index>(t.rows()),
                static_cast<Eigen::Index>(t.cols()));
}

Tape& common_tape(Var a, Var b, const char* op) {
  Tape& t = a.tape();
  if (&b.tape() != &t) throw ShapeError(std::string(op) + ": operands live on different tapes");
  return t;
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (!a.same_shape(b)) {
    throw ShapeError(std::string(op) + ": shape mismatch " + a.shape_string() + " vs " +
                     b.shape_string());
  }
}

// Elementwise unary op whose derivative is expressed through the input x and
// output y: d/dx = deriv(x, y).
template <typename Fwd, typename Deriv>
Var unary(Var a, OpKind op, Fwd fwd, Deriv deriv) {
  Tape& tape = a.tape();
  const Tensor& x = a.value();
  Tensor y(x.rows(), x.cols());
  auto xs = x.data();
  auto ys = y.data();
  for (std::size_t i = 0; i < xs.size(); ++i) ys[i] = fwd(xs[i]);
  return tape.record(op, {a.id()}, std::move(y), [deriv](Tape& t, const TapeNode& self) {
    const std::size_t in = self.inputs[0];
    if (!t.requires_grad(in)) return;
    const Tensor& xv = t.node(in).value;
    Tensor& g = t.grad_buffer(in);
    auto gx = g.data();
    auto go = self.grad.data();
    auto xv_s = xv.data();
    auto yv_s = self.value.data();
    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += go[i] * deriv(xv_s[i], yv_s[i]);
  });
}

}  // namespace

Var matmul(Var a, Var b) {
  Tape& tape = common_tape(a, b, "matmul");
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  if (av.cols() != bv.rows()) {
    throw ShapeError("matmul: inner dimensions differ " + av.shape_string() + " x " +
                     bv.shape_string());
  }
  Tensor out(av.rows(), bv.cols());
  as_matrix(out).noalias() = as_matrix(av) * as_matrix(bv);
  return tape.record(OpKind::kMatmul, {a.id(), b.id()}, std::move(out),
                     [](Tape& t, const TapeNode& self) {
                       const std::size_t ia = self.inputs[0];
                       const std::size_t ib = self.inputs[1];
                       const auto g = as_matrix(self.grad);
                       if (t.requires_grad(ia)) {
                         as_matrix(t.grad_buffer(ia)).noalias() +=
                             g * as_matrix(t.node(ib).value).transpose();
                       }
                       if (t.requires_grad(ib)) {
                         as_matrix(t.grad_buffer(ib)).noalias() +=
                             as_matrix(t.node(ia).value).transpose() * g;
                       }
                     });
}

Var add(Var a, Var b) {
  Tape& tape = common_tape(a, b, "add");
  require_same_shape(a.value(), b.value(), "add");
  Tensor out = a.value();
  as_matrix(out) += as_matrix(b.value());
  return tape.record(OpKind::kAdd, {a.id(), b.id()}, std::move(out),
                     [](Tape& t, const TapeNode& self) {
                       t.accumulate(self.inputs[0], self.grad);
                       t.accumulate(self.inputs[1], self.grad);
                     });
}

Var sub(Var a, Var b) {
  Tape& tape = common_tape(a, b, "sub");
  require_same_shape(a.value(), b.value(), "sub");
  Tensor out = a.value();
  as_matrix(out) -= as_matrix(b.value());
  return tape.record(OpKind::kSub, {a.id(), b.id()}, std::move(out),
                     [](Tape& t, const TapeNode& self) {
                       t.accumulate(self.inputs[0], self.grad);
                       if (t.requires_grad(self.inputs[1])) {
                         as_matrix(t.grad_buffer(self.inputs[1])) -= as_matrix(self.grad);
                       }
                     });
}

Var mul(Var a, Var b) {
  Tape& tape = common_tape(a, b, "mul");
  require_same_shape(a.value(), b.value(), "mul");
  Tensor out(a.rows(), a.cols());
  as_matrix(out) = as_matrix(a.value()).cwiseProduct(as_matrix(b.value()));
  return tape.record(OpKind::kMul, {a.id(), b.id()}, std::move(out),
                     [](Tape& t, const TapeNode& self) {
                       const std::size_t ia = self.inputs[0];
                       const std::size_t ib = self.inputs[1];
                       const auto g = as_matrix(self.grad);
                       if (t.requires_grad(ia)) {
                         as_matrix(t.grad_buffer(ia)) += g.cwiseProduct(as_matrix(t.node(ib).value));
                       }
                       if (t.requires_grad(ib)) {
                         as_matrix(t.grad_buffer(ib)) += g.cwiseProduct(as_matrix(t.node(ia).value));
                       }
                     });
}

Var add_bias(Var a, Var bias) {
  Tape& tape = common_tape(a, bias, "add_bias");
  const Tensor& av = a.value();
  const Tensor& bv = bias.value();
  if (bv.rows() != 1 || bv.cols() != av.cols()) {
    throw ShapeError("add_bias: bias " + bv.shape_string() + " does not fit " + av.shape_string());
  }
  Tensor out = av;
  as_matrix(out).rowwise() += as_matrix(bv).row(0);
  return tape.record(OpKind::kAddBias, {a.id(), bias.id()}, std::move(out),
                     [](Tape& t, const TapeNode& self) {
                       t.accumulate(self.inputs[0], self.grad);
                       if (t.requires_grad(self.inputs[1])) {
                         as_matrix(t.grad_buffer(self.inputs[1])) +=
                             as_matrix(self.grad).colwise().sum();
                       }
                     });
}

Var affine(Var a, double scale, double shift) {
  return unary(
      a, OpKind::kAffine, [scale, shift](double x) { return scale * x + shift; },
      [scale](double, double) { return scale; });
}

Var leaky_relu(Var a, double slope) {
  return unary(
      a, OpKind::kLeakyRelu, [slope](double x) { return x > 0.0 ? x : slope * x; },
      [slope](double x, double) { return x > 0.0 ? 1.0 : slope; });
}

Var tanh(Var a) {
  return unary(
      a, OpKind::kTanh, [](double x) { return std::tanh(x); },
      [](double, double y) { return 1.0 - y * y; });
}

Var sigmoid(Var a) {
  return unary(
      a, OpKind::kSigmoid,
      [](double x) {
        if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
        const double e = std::exp(x);
        return e / (1.0 + e);
      },
      [](double, double y) { return y * (1.0 - y); });
}

Var log(Var a) {
  return unary(
      a, OpKind::kLog, [](double x) { return std::log(x); },
      [](double x, double) { return 1.0 / x; });
}

Var sqrt(Var a) {
  return unary(
      a, OpKind::kSqrt, [](double x) { return std::sqrt(x); },
      [](double, double y) { return y > 0.0 ? 0.5 / y : 0.0; });
}

Var square(Var a) {
  return unary(
      a, OpKind::kSquare, [](double x) { return x * x; },
      [](double x, double) { return 2.0 * x; });
}

Var clamp(Var a, double lo, double hi) {
  if (!(lo <= hi)) throw ShapeError("clamp: lo > hi");
  return unary(
      a, OpKind::kClamp, [lo, hi](double x) { return std::clamp(x, lo, hi); },
      [lo, hi](double x, double) { return (x >= lo && x <= hi) ? 1.0 : 0.0; });
}

Var softmax(Var a) {
  Tape& tape = a.tape();
  const Tensor& x = a.value();
  if (x.cols() == 0) throw ShapeError("softmax: zero-width input");
  Tensor y(x.rows(), x.cols());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    auto in = x.row_span(r);
    auto out = y.row_span(r);
    const double mx = *std::max_element(in.begin(), in.end());
    double total = 0.0;
    for (std::size_t c = 0; c < in.size(); ++c) {
      out[c] = std::exp(in[c] - mx);
      total += out[c];
    }
    for (double& v : out) v /= total;
  }
  return tape.record(OpKind::kSoftmax, {a.id()}, std::move(y), [](Tape& t, const TapeNode& self) {
    const std::size_t in = self.inputs[0];
    if (!t.requires_grad(in)) return;
    Tensor& g = t.grad_buffer(in);
    for (std::size_t r = 0; r < self.value.rows(); ++r) {
      auto yr = self.value.row_span(r);
      auto gr = self.grad.row_span(r);
      double dot = 0.0;
      for (std::size_t c = 0; c < yr.size(); ++c) dot += gr[c] * yr[c];
      auto gx = g.row_span(r);
      for (std::size_t c = 0; c < yr.size(); ++c) gx[c] += yr[c] * (gr[c] - dot);
    }
  });
}

Var mean(Var a) {
  Tape& tape = a.tape();
  const Tensor& x = a.value();
  if (x.size() == 0) throw ShapeError("mean: empty tensor");
  const double n = static_cast<double>(x.size());
  Tensor out = Tensor::scalar(as_matrix(x).sum() / n);
  return tape.record(OpKind::kMean, {a.id()}, std::move(out), [n](Tape& t, const TapeNode& self) {
    const std::size_t in = self.inputs[0];
    if (!t.requires_grad(in)) return;
    const double g = self.grad.item() / n;
    as_matrix(t.grad_buffer(in)).array() += g;
  });
}

Var sum(Var a) {
  Tape& tape = a.tape();
  Tensor out = Tensor::scalar(as_matrix(a.value()).sum());
  return tape.record(OpKind::kSum, {a.id()}, std::move(out), [](Tape& t, const TapeNode& self) {
    const std::size_t in = self.inputs[0];
    if (!t.requires_grad(in)) return;
    as_matrix(t.grad_buffer(in)).array() += self.grad.item();
  });
}

Var row_sum(Var a) {
  Tape& tape = a.tape();
  const Tensor& x = a.value();
  Tensor out(x.rows(), 1);
  as_matrix(out) = as_matrix(x).rowwise().sum();
  return tape.record(OpKind::kRowSum, {a.id()}, std::move(out), [](Tape& t, const TapeNode& self) {
    const std::size_t in = self.inputs[0];
    if (!t.requires_grad(in)) return;
    as_matrix(t.grad_buffer(in)).colwise() += as_matrix(self.grad).col(0);
  });
}

Var concat_cols(std::span<const Var> parts) {
  if (parts.empty()) throw ShapeError("concat_cols: no inputs");
  Tape& tape = parts.front().tape();
  const std::size_t rows = parts.front().rows();
  std::size_t width = 0;
  std::vector<std::size_t> ids;
  std::vector<std::size_t> offsets;
  for (const Var& p : parts) {
    if (&p.tape() != &tape) throw ShapeError("concat_cols: operands live on different tapes");
    if (p.rows() != rows) {
      throw ShapeError("concat_cols: row count " + std::to_string(p.rows()) + " vs " +
                       std::to_string(rows));
    }
    ids.push_back(p.id());
    offsets.push_back(width);
    width += p.cols();
  }
  Tensor out(rows, width);
  for (std::size_t i = 0; i < parts.size(); ++i) {
    const Tensor& v = parts[i].value();
    as_matrix(out).middleCols(static_cast<Eigen::Index>(offsets[i]),
                              static_cast<Eigen::Index>(v.cols())) = as_matrix(v);
  }
  return tape.record(OpKind::kConcat, std::move(ids), std::move(out),
                     [offsets](Tape& t, const TapeNode& self) {
                       const auto g = as_matrix(self.grad);
                       for (std::size_t i = 0; i < self.inputs.size(); ++i) {
                         const std::size_t in = self.inputs[i];
                         if (!t.requires_grad(in)) continue;
                         Tensor& buf = t.grad_buffer(in);
                         as_matrix(buf) += g.middleCols(static_cast<Eigen::Index>(offsets[i]),
                                                        static_cast<Eigen::Index>(buf.cols()));
                       }
                     });
}

Var concat_cols(std::initializer_list<Var> parts) {
  return concat_cols(std::span<const Var>(parts.begin(), parts.size()));
}

Var slice_cols(Var a, std::size_t offset, std::size_t width) {
  Tape& tape = a.tape();
  const Tensor& x = a.value();
  if (offset + width > x.cols()) {
    throw ShapeError("slice_cols: [" + std::to_string(offset) + ", " +
                     std::to_string(offset + width) + ") outside " + x.shape_string());
  }
  Tensor out(x.rows(), width);
  as_matrix(out) = as_matrix(x).middleCols(static_cast<Eigen::Index>(offset),
                                           static_cast<Eigen::Index>(width));
  return tape.record(OpKind::kSlice, {a.id()}, std::move(out),
                     [offset, width](Tape& t, const TapeNode& self) {
                       const std::size_t in = self.inputs[0];
                       if (!t.requires_grad(in)) return;
                       as_matrix(t.grad_buffer(in))
                           .middleCols(static_cast<Eigen::Index>(offset),
                                       static_cast<Eigen::Index>(width)) += as_matrix(self.grad);
                     });
}

Var detach(Var a) {
  // Recorded as an op with no inputs so nothing upstream is reachable.
  return a.tape().record(OpKind::kDetach, {}, a.value(), nullptr);
}

Var gumbel_softmax(Var logits, double tau, Rng& rng) {
  if (!(tau > 0.0)) throw ShapeError("gumbel_softmax: tau must be positive");
  Tensor noise(logits.rows(), logits.cols());
  for (double& g : noise.data()) g = -std::log(-std::log(rng.uniform()));
  Var noisy = add(logits, logits.tape().constant(std::move(noise)));
  return softmax(scale(noisy, 1.0 / tau));
}

}  // namespace dsfgan
