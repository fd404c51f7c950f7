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

#ifndef TAN_AUTODIFF_HPP
#define TAN_AUTODIFF_HPP

#include <cstddef>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include "tan/tensor.hpp"

/// Define-by-run reverse-mode differentiation over dense 2-D tensors.
///
/// A Graph is a tape: every primitive appends a node holding its output
/// value, so node inputs always precede the node itself. backward() walks
/// the tape once in reverse, summing contributions when a node feeds more
/// than one consumer. Graphs are cheap and meant to be rebuilt for every
/// forward pass.
namespace tanet::ad {

enum class OpKind {
  kConstant,
  kParameter,
  kMatMul,
  kAddBias,
  kAdd,
  kSub,
  kMul,
  kScale,
  kShift,
  kTanh,
  kSigmoid,
  kRelu,
  kSoftplus,
  kLog,
  kClamp,
  kSoftmaxRows,
  kSum,
  kMean,
  kPairwiseSqDist,
  kFlatten,
  kGradientReversal,
  kPickColumns,
  kRowMeans,
  kColMeans,
  kMinAll,
  kMaxAll,
  kSortValues,
  kConcat,
};

std::string_view op_name(OpKind kind);

class Graph;

/// Handle to a node of a Graph. Cheap to copy; valid while its Graph lives.
class Var {
 public:
  Var() = default;

  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
  Graph& graph() const { return *graph_; }
  std::size_t id() const { return id_; }
  bool valid() const { return graph_ != nullptr; }

 private:
  friend class Graph;
  Var(Graph* graph, std::size_t id) : graph_(graph), id_(id) {}

  Graph* graph_ = nullptr;
  std::size_t id_ = 0;
};

/// Everything a primitive's reverse rule may read or write.
/// `input_grads[i]` is null when input i does not need a gradient.
struct BackwardArgs {
  const Tensor& output;
  const Tensor& output_grad;
  std::span<const Tensor* const> inputs;
  std::span<Tensor* const> input_grads;
};

using BackwardFn = std::function<void(const BackwardArgs&)>;

class Graph {
 public:
  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  /// Leaf that never receives a gradient.
  Var constant(Tensor value);
  /// Leaf whose gradient is collected by backward().
  Var parameter(Tensor value);

  /// Appends a node. Used by the primitives; inputs must belong to this graph.
  Var record(OpKind kind, Tensor value, std::span<const Var> inputs, BackwardFn backward);

  /// Reverse sweep from a scalar node. Clears gradients of any earlier sweep.
  void backward(Var loss);

  /// Gradient accumulated at `v` by the last backward(); zeros if none reached it.
  Tensor grad(Var v) const;

  const Tensor& value(Var v) const { return nodes_[v.id()].value; }
  OpKind kind(Var v) const { return nodes_[v.id()].kind; }
  bool requires_grad(Var v) const { return nodes_[v.id()].requires_grad; }
  std::span<const std::size_t> inputs(Var v) const { return nodes_[v.id()].inputs; }
  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    OpKind kind;
    Tensor value;
    std::vector<std::size_t> inputs;
    bool requires_grad = false;
    BackwardFn backward;
    Tensor grad;
    bool has_grad = false;
  };

  Tensor& grad_slot(std::size_t id);

  std::vector<Node> nodes_;
};

inline const Tensor& Var::value() const { return graph_->value(*this); }

// Primitives. All shapes are (rows, cols); a scalar is 1x1.

/// (n x k) * (k x m) -> (n x m)
Var matmul(Var a, Var b);
/// Adds a 1 x m row to every row of an n x m matrix.
Var add_bias(Var x, Var bias);
Var add(Var a, Var b);
Var sub(Var a, Var b);
/// Elementwise product.
Var mul(Var a, Var b);
Var scale(Var x, double factor);
/// x + offset, elementwise.
Var shift(Var x, double offset);

Var tanh(Var x);
Var sigmoid(Var x);
Var relu(Var x);
Var softplus(Var x);
Var log(Var x);
/// Clamps into [lo, hi]; gradient is zero where the bound is active.
Var clamp(Var x, double lo, double hi);
Var softmax_rows(Var x);

Var sum(Var x);
Var mean(Var x);
Var row_means(Var x);
Var col_means(Var x);
Var min_all(Var x);
Var max_all(Var x);

/// G[i][j] = |a_i - b_j|^2 for rows of a (n x d) and b (k x d).
Var pairwise_sq_dist(Var a, Var b);
/// n x m -> 1 x (n*m), row-major.
Var flatten(Var x);
/// All values, flattened, sorted ascending (stable on ties) into a row.
Var sort_values(Var x);
/// Row-major flattening of each part, concatenated into one row.
Var concat(std::span<const Var> parts);
/// y[i] = x[i][columns[i]], giving an n x 1 column.
Var pick_columns(Var x, std::span<const std::size_t> columns);

/// Identity forward; backward negates the incoming gradient.
Var gradient_reversal(Var x);

}  // namespace tanet::ad

#endif  // TAN_AUTODIFF_HPP
