// Copyright 2026 The SegGraph Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Reverse-mode differentiation over dense row-major matrices.
//
// A Tape records every operation as a node holding its forward value and a
// closure that pushes the node's gradient to its inputs. backward() replays
// the closures in reverse creation order, which is a valid topological order
// because a node can only consume nodes created before it.
//
// Index spans passed to gather/scatter/grouped ops are captured by reference
// and must outlive the tape.

#pragma once

#include "seggraph/nn/tensor.hpp"

#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <vector>

namespace seggraph::nn {

struct Var {
  uint32_t id = std::numeric_limits<uint32_t>::max();
  bool valid() const { return id != std::numeric_limits<uint32_t>::max(); }
};

/// Per-group, per-channel maximum with the routing of each output to the
/// row that produced it (lowest row on ties).
template <typename Real>
struct SegmentedMax {
  Tensor<Real> values;            // groups x C
  std::vector<uint32_t> argmax;   // groups x C, row index into the input
};

template <typename Real>
SegmentedMax<Real> segmented_max(const Tensor<Real>& x, std::span<const uint32_t> segment_of,
                                 std::size_t groups);

/// Max-subtracted softmax within each group, independently per column.
/// Groups without members produce nothing.
template <typename Real>
Tensor<Real> grouped_softmax(const Tensor<Real>& x, std::span<const uint32_t> group_of,
                             std::size_t groups);

template <typename Real>
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Tensor<Real> value);
  Var variable(Tensor<Real> value);

  const Tensor<Real>& value(Var v) const { return nodes_.at(v.id).value; }
  /// Gradient of the last backward() target; zeros when none flowed here.
  Tensor<Real> grad(Var v) const;
  bool requires_grad(Var v) const { return nodes_.at(v.id).requires_grad; }
  std::size_t size() const { return nodes_.size(); }

  /// Seeds d(loss)/d(loss) = 1 for a 1x1 node and runs the reverse sweep.
  void backward(Var loss);

  Var matmul(Var a, Var b);
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);
  Var scale(Var a, Real s);
  /// a (n x m) + bias (1 x m) broadcast over rows.
  Var add_bias(Var a, Var bias);
  /// Scales row r of a (n x m) by w(r) for w (n x 1).
  Var mul_rows(Var a, Var w);
  Var concat_cols(Var a, Var b);
  Var gather_rows(Var a, std::span<const uint32_t> index);
  Var scatter_add_rows(Var a, std::span<const uint32_t> index, std::size_t rows);
  Var relu(Var a);
  Var leaky_relu(Var a, Real slope);
  Var tanh(Var a);
  Var sum(Var a);
  /// z (E x C) with C split into `heads` equal blocks; out(e, h) is the dot
  /// product of block h of z's row e with block h of a (1 x C).
  Var head_dot(Var z, Var a, int heads);
  /// x (E x C) with block h of row e scaled by alpha(e, h), alpha (E x heads).
  Var head_scale(Var x, Var alpha, int heads);
  Var grouped_softmax(Var x, std::span<const uint32_t> group_of, std::size_t groups);
  Var segmented_maxpool(Var x, std::span<const uint32_t> segment_of, std::size_t groups);
  /// Mean over labels != -1 of -log softmax(logits)[label].
  Var cross_entropy(Var logits, std::span<const int32_t> labels);

 private:
  struct Node {
    Tensor<Real> value;
    Tensor<Real> grad;
    bool requires_grad = false;
    std::function<void()> backward;
  };

  Var push(Tensor<Real> value, bool requires_grad, std::function<void()> backward = {});
  bool needs(Var v) const { return nodes_[v.id].requires_grad; }
  /// Gradient buffer of v, zero-initialized on first access.
  Tensor<Real>& grad_buffer(Var v);
  const Tensor<Real>& upstream(Var out) const { return nodes_[out.id].grad; }
  void check(Var v) const;

  std::vector<Node> nodes_;
};

extern template class Tape<float>;
extern template class Tape<double>;
extern template class Tape<long double>;

}  // namespace seggraph::nn
