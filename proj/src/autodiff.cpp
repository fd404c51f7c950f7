// Copyright 2026 The TAN Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "tan/autodiff.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace tanet::ad {

std::string_view op_name(OpKind kind) {
  switch (kind) {
    case OpKind::kConstant: return "constant";
    case OpKind::kParameter: return "parameter";
    case OpKind::kMatMul: return "matmul";
    case OpKind::kAddBias: return "add_bias";
    case OpKind::kAdd: return "add";
    case OpKind::kSub: return "sub";
    case OpKind::kMul: return "mul";
    case OpKind::kScale: return "scale";
    case OpKind::kShift: return "shift";
    case OpKind::kTanh: return "tanh";
    case OpKind::kSigmoid: return "sigmoid";
    case OpKind::kRelu: return "relu";
    case OpKind::kSoftplus: return "softplus";
    case OpKind::kLog: return "log";
    case OpKind::kClamp: return "clamp";
    case OpKind::kSoftmaxRows: return "softmax_rows";
    case OpKind::kSum: return "sum";
    case OpKind::kMean: return "mean";
    case OpKind::kPairwiseSqDist: return "pairwise_sq_dist";
    case OpKind::kFlatten: return "flatten";
    case OpKind::kGradientReversal: return "gradient_reversal";
    case OpKind::kPickColumns: return "pick_columns";
    case OpKind::kRowMeans: return "row_means";
    case OpKind::kColMeans: return "col_means";
    case OpKind::kMinAll: return "min_all";
    case OpKind::kMaxAll: return "max_all";
    case OpKind::kSortValues: return "sort_values";
    case OpKind::kConcat: return "concat";
  }
  return "unknown";
}

Var Graph::constant(Tensor value) {
  nodes_.push_back(Node{OpKind::kConstant, std::move(value), {}, false, {}, {}, false});
  return Var(this, nodes_.size() - 1);
}

Var Graph::parameter(Tensor value) {
  nodes_.push_back(Node{OpKind::kParameter, std::move(value), {}, true, {}, {}, false});
  return Var(this, nodes_.size() - 1);
}

Var Graph::record(OpKind kind, Tensor value, std::span<const Var> inputs, BackwardFn backward) {
  Node node{kind, std::move(value), {}, false, std::move(backward), {}, false};
  node.inputs.reserve(inputs.size());
  for (const Var& in : inputs) {
    if (in.graph_ != this) {
      throw std::invalid_argument(std::string(op_name(kind)) + ": input belongs to another graph");
    }
    node.inputs.push_back(in.id_);
    node.requires_grad = node.requires_grad || nodes_[in.id_].requires_grad;
  }
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

Tensor& Graph::grad_slot(std::size_t id) {
  Node& node = nodes_[id];
  if (!node.has_grad) {
    node.grad = Tensor(node.value.shape());
    node.has_grad = true;
  }
  return node.grad;
}

void Graph::backward(Var loss) {
  if (loss.graph_ != this) throw std::invalid_argument("backward: loss belongs to another graph");
  if (!nodes_[loss.id_].value.is_scalar()) {
    throw ShapeError("backward: loss must be scalar, got shape " +
                     to_string(nodes_[loss.id_].value.shape()));
  }
  for (Node& node : nodes_) {
    node.has_grad = false;
    node.grad = Tensor();
  }
  grad_slot(loss.id_)[0] = 1.0;

  std::vector<const Tensor*> in_values;
  std::vector<Tensor*> in_grads;
  for (std::size_t i = loss.id_ + 1; i-- > 0;) {
    Node& node = nodes_[i];
    if (!node.requires_grad || !node.has_grad || !node.backward) continue;
    in_values.clear();
    in_grads.clear();
    for (std::size_t in : node.inputs) {
      in_values.push_back(&nodes_[in].value);
      in_grads.push_back(nodes_[in].requires_grad ? &grad_slot(in) : nullptr);
    }
    // grad_slot may not reallocate nodes_, so the references stay valid.
    node.backward(BackwardArgs{node.value, node.grad, in_values, in_grads});
  }
}

Tensor Graph::grad(Var v) const {
  const Node& node = nodes_[v.id()];
  return node.has_grad ? node.grad : Tensor(node.value.shape());
}

namespace {

void require_2d(const Tensor& t, std::string_view op) {
  if (t.shape().size() != 2) {
    throw ShapeError(std::string(op) + ": expected a matrix, got shape " + to_string(t.shape()));
  }
}

[[noreturn]] void mismatch(std::string_view op, const Tensor& a, const Tensor& b) {
  throw ShapeError(std::string(op) + ": shape mismatch " + to_string(a.shape()) + " vs " +
                   to_string(b.shape()));
}

void require_same(std::string_view op, const Tensor& a, const Tensor& b) {
  if (!a.same_shape(b)) mismatch(op, a, b);
}

Var unary(OpKind kind, Var x, Tensor out, BackwardFn fn) {
  const std::array<Var, 1> in{x};
  return x.graph().record(kind, std::move(out), in, std::move(fn));
}

Var binary(OpKind kind, Var a, Var b, Tensor out, BackwardFn fn) {
  if (&a.graph() != &b.graph()) {
    throw std::invalid_argument(std::string(op_name(kind)) + ": operands from different graphs");
  }
  const std::array<Var, 2> in{a, b};
  return a.graph().record(kind, std::move(out), in, std::move(fn));
}

/// Elementwise map whose derivative is expressed through input x and output y.
template <typename Fwd, typename Deriv>
Var pointwise(OpKind kind, Var x, Fwd fwd, Deriv deriv) {
  const Tensor& in = x.value();
  Tensor out(in.shape());
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = fwd(in[i]);
  return unary(kind, x, std::move(out), [deriv](const BackwardArgs& a) {
    if (!a.input_grads[0]) return;
    Tensor& g = *a.input_grads[0];
    const Tensor& xv = *a.inputs[0];
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += a.output_grad[i] * deriv(xv[i], a.output[i]);
  });
}

double stable_sigmoid(double v) {
  if (v >= 0) return 1.0 / (1.0 + std::exp(-v));
  const double e = std::exp(v);
  return e / (1.0 + e);
}

}  // namespace

Var matmul(Var a, Var b) {
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  require_2d(av, "matmul");
  require_2d(bv, "matmul");
  if (av.cols() != bv.rows()) mismatch("matmul", av, bv);
  const std::size_t n = av.rows(), k = av.cols(), m = bv.cols();
  Tensor out({n, m});
  for (std::size_t i = 0; i < n; ++i) {
    double* orow = &out(i, 0);
    for (std::size_t p = 0; p < k; ++p) {
      const double s = av(i, p);
      if (s == 0.0) continue;
      const double* brow = &bv(p, 0);
      for (std::size_t j = 0; j < m; ++j) orow[j] += s * brow[j];
    }
  }
  return binary(OpKind::kMatMul, a, b, std::move(out), [n, k, m](const BackwardArgs& args) {
    const Tensor& A = *args.inputs[0];
    const Tensor& B = *args.inputs[1];
    const Tensor& G = args.output_grad;
    if (Tensor* dA = args.input_grads[0]) {
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t p = 0; p < k; ++p) {
          double acc = 0.0;
          for (std::size_t j = 0; j < m; ++j) acc += G(i, j) * B(p, j);
          (*dA)(i, p) += acc;
        }
      }
    }
    if (Tensor* dB = args.input_grads[1]) {
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t p = 0; p < k; ++p) {
          const double s = A(i, p);
          if (s == 0.0) continue;
          double* drow = &(*dB)(p, 0);
          const double* grow = &G(i, 0);
          for (std::size_t j = 0; j < m; ++j) drow[j] += s * grow[j];
        }
      }
    }
  });
}

Var add_bias(Var x, Var bias) {
  const Tensor& xv = x.value();
  const Tensor& bv = bias.value();
  require_2d(xv, "add_bias");
  if (bv.rows() != 1 || bv.cols() != xv.cols()) mismatch("add_bias", xv, bv);
  Tensor out = xv;
  const std::size_t n = xv.rows(), m = xv.cols();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) out(i, j) += bv[j];
  return binary(OpKind::kAddBias, x, bias, std::move(out), [n, m](const BackwardArgs& a) {
    const Tensor& G = a.output_grad;
    if (Tensor* dx = a.input_grads[0])
      for (std::size_t i = 0; i < G.size(); ++i) (*dx)[i] += G[i];
    if (Tensor* db = a.input_grads[1])
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j) (*db)[j] += G(i, j);
  });
}

Var add(Var a, Var b) {
  require_same("add", a.value(), b.value());
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += b.value()[i];
  return binary(OpKind::kAdd, a, b, std::move(out), [](const BackwardArgs& args) {
    for (Tensor* d : args.input_grads)
      if (d)
        for (std::size_t i = 0; i < d->size(); ++i) (*d)[i] += args.output_grad[i];
  });
}

Var sub(Var a, Var b) {
  require_same("sub", a.value(), b.value());
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= b.value()[i];
  return binary(OpKind::kSub, a, b, std::move(out), [](const BackwardArgs& args) {
    if (Tensor* d = args.input_grads[0])
      for (std::size_t i = 0; i < d->size(); ++i) (*d)[i] += args.output_grad[i];
    if (Tensor* d = args.input_grads[1])
      for (std::size_t i = 0; i < d->size(); ++i) (*d)[i] -= args.output_grad[i];
  });
}

Var mul(Var a, Var b) {
  require_same("mul", a.value(), b.value());
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= b.value()[i];
  return binary(OpKind::kMul, a, b, std::move(out), [](const BackwardArgs& args) {
    const Tensor& av = *args.inputs[0];
    const Tensor& bv = *args.inputs[1];
    if (Tensor* d = args.input_grads[0])
      for (std::size_t i = 0; i < d->size(); ++i) (*d)[i] += args.output_grad[i] * bv[i];
    if (Tensor* d = args.input_grads[1])
      for (std::size_t i = 0; i < d->size(); ++i) (*d)[i] += args.output_grad[i] * av[i];
  });
}

Var scale(Var x, double factor) {
  return pointwise(
      OpKind::kScale, x, [factor](double v) { return factor * v; },
      [factor](double, double) { return factor; });
}

Var shift(Var x, double offset) {
  return pointwise(
      OpKind::kShift, x, [offset](double v) { return v + offset; },
      [](double, double) { return 1.0; });
}

Var tanh(Var x) {
  return pointwise(
      OpKind::kTanh, x, [](double v) { return std::tanh(v); },
      [](double, double y) { return 1.0 - y * y; });
}

Var sigmoid(Var x) {
  return pointwise(OpKind::kSigmoid, x, stable_sigmoid,
                   [](double, double y) { return y * (1.0 - y); });
}

Var relu(Var x) {
  return pointwise(
      OpKind::kRelu, x, [](double v) { return v > 0.0 ? v : 0.0; },
      [](double v, double) { return v > 0.0 ? 1.0 : 0.0; });
}

Var softplus(Var x) {
  return pointwise(
      OpKind::kSoftplus, x,
      [](double v) { return std::max(v, 0.0) + std::log1p(std::exp(-std::abs(v))); },
      [](double v, double) { return stable_sigmoid(v); });
}

Var log(Var x) {
  return pointwise(
      OpKind::kLog, x, [](double v) { return std::log(v); },
      [](double v, double) { return 1.0 / v; });
}

Var clamp(Var x, double lo, double hi) {
  if (!(lo <= hi)) throw std::invalid_argument("clamp: lower bound exceeds upper bound");
  return pointwise(
      OpKind::kClamp, x, [lo, hi](double v) { return std::clamp(v, lo, hi); },
      [lo, hi](double v, double) { return (v >= lo && v <= hi) ? 1.0 : 0.0; });
}

Var softmax_rows(Var x) {
  const Tensor& xv = x.value();
  require_2d(xv, "softmax_rows");
  const std::size_t n = xv.rows(), m = xv.cols();
  Tensor out(xv.shape());
  for (std::size_t i = 0; i < n; ++i) {
    double mx = xv(i, 0);
    for (std::size_t j = 1; j < m; ++j) mx = std::max(mx, xv(i, j));
    double z = 0.0;
    for (std::size_t j = 0; j < m; ++j) z += (out(i, j) = std::exp(xv(i, j) - mx));
    for (std::size_t j = 0; j < m; ++j) out(i, j) /= z;
  }
  return unary(OpKind::kSoftmaxRows, x, std::move(out), [n, m](const BackwardArgs& a) {
    Tensor* d = a.input_grads[0];
    if (!d) return;
    const Tensor& y = a.output;
    const Tensor& G = a.output_grad;
    for (std::size_t i = 0; i < n; ++i) {
      double dot = 0.0;
      for (std::size_t j = 0; j < m; ++j) dot += G(i, j) * y(i, j);
      for (std::size_t j = 0; j < m; ++j) (*d)(i, j) += y(i, j) * (G(i, j) - dot);
    }
  });
}

Var sum(Var x) {
  const Tensor& xv = x.value();
  double s = 0.0;
  for (double v : xv.values()) s += v;
  return unary(OpKind::kSum, x, Tensor::scalar(s), [](const BackwardArgs& a) {
    if (Tensor* d = a.input_grads[0])
      for (std::size_t i = 0; i < d->size(); ++i) (*d)[i] += a.output_grad[0];
  });
}

Var mean(Var x) {
  const Tensor& xv = x.value();
  if (xv.size() == 0) throw ShapeError("mean: empty tensor");
  double s = 0.0;
  for (double v : xv.values()) s += v;
  const double n = static_cast<double>(xv.size());
  return unary(OpKind::kMean, x, Tensor::scalar(s / n), [n](const BackwardArgs& a) {
    if (Tensor* d = a.input_grads[0])
      for (std::size_t i = 0; i < d->size(); ++i) (*d)[i] += a.output_grad[0] / n;
  });
}

Var row_means(Var x) {
  const Tensor& xv = x.value();
  require_2d(xv, "row_means");
  const std::size_t n = xv.rows(), m = xv.cols();
  Tensor out({n, 1});
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < m; ++j) s += xv(i, j);
    out[i] = s / static_cast<double>(m);
  }
  return unary(OpKind::kRowMeans, x, std::move(out), [n, m](const BackwardArgs& a) {
    if (Tensor* d = a.input_grads[0])
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j)
          (*d)(i, j) += a.output_grad[i] / static_cast<double>(m);
  });
}

Var col_means(Var x) {
  const Tensor& xv = x.value();
  require_2d(xv, "col_means");
  const std::size_t n = xv.rows(), m = xv.cols();
  Tensor out({1, m});
  for (std::size_t j = 0; j < m; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += xv(i, j);
    out[j] = s / static_cast<double>(n);
  }
  return unary(OpKind::kColMeans, x, std::move(out), [n, m](const BackwardArgs& a) {
    if (Tensor* d = a.input_grads[0])
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j)
          (*d)(i, j) += a.output_grad[j] / static_cast<double>(n);
  });
}

namespace {

Var extreme(OpKind kind, Var x, bool want_max) {
  const Tensor& xv = x.value();
  if (xv.size() == 0) throw ShapeError(std::string(op_name(kind)) + ": empty tensor");
  std::size_t best = 0;
  for (std::size_t i = 1; i < xv.size(); ++i) {
    if (want_max ? xv[i] > xv[best] : xv[i] < xv[best]) best = i;
  }
  return unary(kind, x, Tensor::scalar(xv[best]), [best](const BackwardArgs& a) {
    if (Tensor* d = a.input_grads[0]) (*d)[best] += a.output_grad[0];
  });
}

}  // namespace

Var min_all(Var x) { return extreme(OpKind::kMinAll, x, false); }
Var max_all(Var x) { return extreme(OpKind::kMaxAll, x, true); }

Var pairwise_sq_dist(Var a, Var b) {
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  require_2d(av, "pairwise_sq_dist");
  require_2d(bv, "pairwise_sq_dist");
  if (av.cols() != bv.cols()) mismatch("pairwise_sq_dist", av, bv);
  const std::size_t n = av.rows(), k = bv.rows(), d = av.cols();
  Tensor out({n, k});
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      double s = 0.0;
      for (std::size_t l = 0; l < d; ++l) {
        const double diff = av(i, l) - bv(j, l);
        s += diff * diff;
      }
      out(i, j) = s;
    }
  }
  return binary(OpKind::kPairwiseSqDist, a, b, std::move(out), [n, k, d](const BackwardArgs& args) {
    const Tensor& A = *args.inputs[0];
    const Tensor& B = *args.inputs[1];
    const Tensor& G = args.output_grad;
    Tensor* dA = args.input_grads[0];
    Tensor* dB = args.input_grads[1];
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < k; ++j) {
        const double g2 = 2.0 * G(i, j);
        if (g2 == 0.0) continue;
        for (std::size_t l = 0; l < d; ++l) {
          const double t = g2 * (A(i, l) - B(j, l));
          if (dA) (*dA)(i, l) += t;
          if (dB) (*dB)(j, l) -= t;
        }
      }
    }
  });
}

Var flatten(Var x) {
  const Tensor& xv = x.value();
  Tensor out({1, xv.size()}, std::vector<double>(xv.values().begin(), xv.values().end()));
  return unary(OpKind::kFlatten, x, std::move(out), [](const BackwardArgs& a) {
    if (Tensor* d = a.input_grads[0])
      for (std::size_t i = 0; i < d->size(); ++i) (*d)[i] += a.output_grad[i];
  });
}

Var sort_values(Var x) {
  const Tensor& xv = x.value();
  std::vector<std::size_t> order(xv.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&xv](std::size_t l, std::size_t r) { return xv[l] < xv[r]; });
  Tensor out({1, xv.size()});
  for (std::size_t i = 0; i < order.size(); ++i) out[i] = xv[order[i]];
  return unary(OpKind::kSortValues, x, std::move(out),
               [order = std::move(order)](const BackwardArgs& a) {
                 if (Tensor* d = a.input_grads[0])
                   for (std::size_t i = 0; i < order.size(); ++i) (*d)[order[i]] += a.output_grad[i];
               });
}

Var concat(std::span<const Var> parts) {
  if (parts.empty()) throw ShapeError("concat: no inputs");
  Graph& g = parts.front().graph();
  std::vector<double> values;
  std::vector<std::size_t> offsets;
  for (const Var& p : parts) {
    offsets.push_back(values.size());
    values.insert(values.end(), p.value().values().begin(), p.value().values().end());
  }
  const std::size_t total = values.size();
  return g.record(OpKind::kConcat, Tensor({1, total}, std::move(values)), parts,
                  [offsets = std::move(offsets)](const BackwardArgs& a) {
                    for (std::size_t p = 0; p < a.input_grads.size(); ++p) {
                      Tensor* d = a.input_grads[p];
                      if (!d) continue;
                      for (std::size_t i = 0; i < d->size(); ++i)
                        (*d)[i] += a.output_grad[offsets[p] + i];
                    }
                  });
}

Var pick_columns(Var x, std::span<const std::size_t> columns) {
  const Tensor& xv = x.value();
  require_2d(xv, "pick_columns");
  if (columns.size() != xv.rows()) {
    throw ShapeError("pick_columns: " + std::to_string(columns.size()) + " indices for shape " +
                     to_string(xv.shape()));
  }
  const std::size_t n = xv.rows();
  Tensor out({n, 1});
  for (std::size_t i = 0; i < n; ++i) {
    if (columns[i] >= xv.cols()) {
      throw std::out_of_range("pick_columns: column " + std::to_string(columns[i]) +
                              " out of range for shape " + to_string(xv.shape()));
    }
    out[i] = xv(i, columns[i]);
  }
  std::vector<std::size_t> cols(columns.begin(), columns.end());
  return unary(OpKind::kPickColumns, x, std::move(out), [cols = std::move(cols)](const BackwardArgs& a) {
    if (Tensor* d = a.input_grads[0])
      for (std::size_t i = 0; i < cols.size(); ++i) (*d)(i, cols[i]) += a.output_grad[i];
  });
}

Var gradient_reversal(Var x) {
  return unary(OpKind::kGradientReversal, x, x.value(), [](const BackwardArgs& a) {
    if (Tensor* d = a.input_grads[0])
      for (std::size_t i = 0; i < d->size(); ++i) (*d)[i] -= a.output_grad[i];
  });
}

}  // namespace tanet::ad
