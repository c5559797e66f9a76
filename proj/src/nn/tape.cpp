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

#include "seggraph/nn/tape.hpp"

#include <algorithm>
#include <cmath>

namespace seggraph::nn {

namespace {

template <typename Real>
[[noreturn]] void shape_mismatch(const char* op, const Tensor<Real>& a, const Tensor<Real>& b) {
  throw ShapeError(std::string(op) + ": incompatible shapes " + a.shape_string() + " and " +
                   b.shape_string());
}

void check_index(std::span<const uint32_t> index, std::size_t limit, const char* op) {
  for (uint32_t i : index) {
    if (i >= limit) {
      throw ShapeError(std::string(op) + ": index " + std::to_string(i) + " out of range " +
                       std::to_string(limit));
    }
  }
}

}  // namespace

template <typename Real>
SegmentedMax<Real> segmented_max(const Tensor<Real>& x, std::span<const uint32_t> segment_of,
                                 std::size_t groups) {
  const std::size_t rows = x.rows();
  const std::size_t cols = x.cols();
  if (segment_of.size() != rows) {
    throw ShapeError("segmented_maxpool: " + std::to_string(segment_of.size()) +
                     " segment ids for input " + x.shape_string());
  }
  check_index(segment_of, groups, "segmented_maxpool");
  SegmentedMax<Real> out;
  out.values = Tensor<Real>::matrix(groups, cols);
  out.argmax.assign(groups * cols, std::numeric_limits<uint32_t>::max());
  for (std::size_t r = 0; r < rows; ++r) {
    const std::size_t g = segment_of[r];
    for (std::size_t c = 0; c < cols; ++c) {
      uint32_t& best = out.argmax[g * cols + c];
      const Real v = x(r, c);
      if (best == std::numeric_limits<uint32_t>::max() || v > out.values(g, c)) {
        best = static_cast<uint32_t>(r);
        out.values(g, c) = v;
      }
    }
  }
  for (std::size_t g = 0; g < groups; ++g) {
    if (cols > 0 && out.argmax[g * cols] == std::numeric_limits<uint32_t>::max()) {
      throw ContractError("segmented_maxpool: group " + std::to_string(g) + " is empty");
    }
  }
  return out;
}

template <typename Real>
Tensor<Real> grouped_softmax(const Tensor<Real>& x, std::span<const uint32_t> group_of,
                             std::size_t groups) {
  const std::size_t rows = x.rows();
  const std::size_t cols = x.cols();
  if (group_of.size() != rows) {
    throw ShapeError("grouped_softmax: " + std::to_string(group_of.size()) +
                     " group ids for input " + x.shape_string());
  }
  check_index(group_of, groups, "grouped_softmax");
  std::vector<Real> peak(groups * cols, -std::numeric_limits<Real>::infinity());
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      Real& m = peak[group_of[r] * cols + c];
      m = std::max(m, x(r, c));
    }
  }
  Tensor<Real> out(x.dims());
  std::vector<Real> total(groups * cols, Real(0));
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      const std::size_t k = group_of[r] * cols + c;
      const Real e = std::exp(x(r, c) - peak[k]);
      out(r, c) = e;
      total[k] += e;
    }
  }
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) out(r, c) /= total[group_of[r] * cols + c];
  }
  return out;
}

template <typename Real>
Var Tape<Real>::push(Tensor<Real> value, bool requires_grad, std::function<void()> backward) {
  Node node;
  node.value = std::move(value);
  node.requires_grad = requires_grad;
  if (requires_grad) node.backward = std::move(backward);
  nodes_.push_back(std::move(node));
  return Var{static_cast<uint32_t>(nodes_.size() - 1)};
}

template <typename Real>
void Tape<Real>::check(Var v) const {
  if (!v.valid() || v.id >= nodes_.size()) throw ContractError("variable does not belong to tape");
}

template <typename Real>
Tensor<Real>& Tape<Real>::grad_buffer(Var v) {
  Node& node = nodes_[v.id];
  if (node.grad.size() != node.value.size()) node.grad = Tensor<Real>(node.value.dims());
  return node.grad;
}

template <typename Real>
Var Tape<Real>::constant(Tensor<Real> value) {
  return push(std::move(value), false);
}

template <typename Real>
Var Tape<Real>::variable(Tensor<Real> value) {
  return push(std::move(value), true, [] {});
}

template <typename Real>
Tensor<Real> Tape<Real>::grad(Var v) const {
  check(v);
  const Node& node = nodes_[v.id];
  if (node.grad.size() == node.value.size()) return node.grad;
  return Tensor<Real>(node.value.dims());
}

template <typename Real>
void Tape<Real>::backward(Var loss) {
  check(loss);
  if (nodes_[loss.id].value.size() != 1) {
    throw ShapeError("backward target must be a scalar, got " +
                     nodes_[loss.id].value.shape_string());
  }
  for (Node& node : nodes_) node.grad = Tensor<Real>();
  grad_buffer(loss)[0] = Real(1);
  for (std::size_t i = loss.id + 1; i-- > 0;) {
    Node& node = nodes_[i];
    if (node.requires_grad && node.backward && node.grad.size() == node.value.size()) {
      node.backward();
    }
  }
}

template <typename Real>
Var Tape<Real>::matmul(Var a, Var b) {
  check(a);
  check(b);
  const auto& va = value(a);
  const auto& vb = value(b);
  if (va.cols() != vb.rows()) shape_mismatch("matmul", va, vb);
  Tensor<Real> out = Tensor<Real>::matrix(va.rows(), vb.cols());
  out.mat().noalias() = va.mat() * vb.mat();
  const auto id = static_cast<uint32_t>(nodes_.size());
  return push(std::move(out), needs(a) || needs(b), [this, a, b, id] {
    const auto& g = upstream(Var{id});
    if (needs(a)) grad_buffer(a).mat().noalias() += g.mat() * value(b).mat().transpose();
    if (needs(b)) grad_buffer(b).mat().noalias() += value(a).mat().transpose() * g.mat();
  });
}

template <typename Real>
Var Tape<Real>::add(Var a, Var b) {
  check(a);
  check(b);
  if (value(a).size() != value(b).size() || value(a).rows() != value(b).rows()) {
    shape_mismatch("add", value(a), value(b));
  }
  Tensor<Real> out = value(a);
  out.mat() += value(b).mat();
  const auto id = static_cast<uint32_t>(nodes_.size());
  return push(std::move(out), needs(a) || needs(b), [this, a, b, id] {
    const auto& g = upstream(Var{id});
    if (needs(a)) grad_buffer(a).mat() += g.mat();
    if (needs(b)) grad_buffer(b).mat() += g.mat();
  });
}

template <typename Real>
Var Tape<Real>::sub(Var a, Var b) {
  check(a);
  check(b);
  if (value(a).size() != value(b).size() || value(a).rows() != value(b).rows()) {
    shape_mismatch("sub", value(a), value(b));
  }
  Tensor<Real> out = value(a);
  out.mat() -= value(b).mat();
  const auto id = static_cast<uint32_t>(nodes_.size());
  return push(std::move(out), needs(a) || needs(b), [this, a, b, id] {
    const auto& g = upstream(Var{id});
    if (needs(a)) grad_buffer(a).mat() += g.mat();
    if (needs(b)) grad_buffer(b).mat() -= g.mat();
  });
}

template <typename Real>
Var Tape<Real>::mul(Var a, Var b) {
  check(a);
  check(b);
  if (value(a).size() != value(b).size() || value(a).rows() != value(b).rows()) {
    shape_mismatch("mul", value(a), value(b));
  }
  Tensor<Real> out = value(a);
  out.mat().array() *= value(b).mat().array();
  const auto id = static_cast<uint32_t>(nodes_.size());
  return push(std::move(out), needs(a) || needs(b), [this, a, b, id] {
    const auto& g = upstream(Var{id});
    if (needs(a)) grad_buffer(a).mat().array() += g.mat().array() * value(b).mat().array();
    if (needs(b)) grad_buffer(b).mat().array() += g.mat().array() * value(a).mat().array();
  });
}

template <typename Real>
Var Tape<Real>::scale(Var a, Real s) {
  check(a);
  Tensor<Real> out = value(a);
  out.mat() *= s;
  const auto id = static_cast<uint32_t>(nodes_.size());
  return push(std::move(out), needs(a), [this, a, s, id] {
    grad_buffer(a).mat() += s * upstream(Var{id}).mat();
  });
}

template <typename Real>
Var Tape<Real>::add_bias(Var a, Var bias) {
  check(a);
  check(bias);
  const auto& va = value(a);
  const auto& vb = value(bias);
  if (vb.size() != va.cols()) shape_mismatch("add_bias", va, vb);
  Tensor<Real> out = va;
  out.mat().rowwise() +=
      Eigen::Map<const Eigen::Matrix<Real, 1, Eigen::Dynamic>>(vb.vec().data(), vb.size());
  const auto id = static_cast<uint32_t>(nodes_.size());
  return push(std::move(out), needs(a) || needs(bias), [this, a, bias, id] {
    const auto& g = upstream(Var{id});
    if (needs(a)) grad_buffer(a).mat() += g.mat();
    if (needs(bias)) {
      auto& gb = grad_buffer(bias);
      Eigen::Map<Eigen::Matrix<Real, 1, Eigen::Dynamic>>(gb.vec().data(), gb.size()) +=
          g.mat().colwise().sum();
    }
  });
}

template <typename Real>
Var Tape<Real>::mul_rows(Var a, Var w) {
  check(a);
  check(w);
  const auto& va = value(a);
  const auto& vw = value(w);
  if (vw.size() != va.rows()) shape_mismatch("mul_rows", va, vw);
  Tensor<Real> out = va;
  for (std::size_t r = 0; r < va.rows(); ++r) out.mat().row(r) *= vw[r];
  const auto id = static_cast<uint32_t>(nodes_.size());
  return push(std::move(out), needs(a) || needs(w), [this, a, w, id] {
    const auto& g = upstream(Var{id});
    const auto& va = value(a);
    const auto& vw = value(w);
    if (needs(a)) {
      auto& ga = grad_buffer(a);
      for (std::size_t r = 0; r < va.rows(); ++r) ga.mat().row(r) += vw[r] * g.mat().row(r);
    }
    if (needs(w)) {
      auto& gw = grad_buffer(w);
      for (std::size_t r = 0; r < va.rows(); ++r) gw[r] += g.mat().row(r).dot(va.mat().row(r));
    }
  });
}

template <typename Real>
Var Tape<Real>::concat_cols(Var a, Var b) {
  check(a);
  check(b);
  const auto& va = value(a);
  const auto& vb = value(b);
  if (va.rows() != vb.rows()) shape_mismatch("concat_cols", va, vb);
  const std::size_t ca = va.cols();
  const std::size_t cb = vb.cols();
  Tensor<Real> out = Tensor<Real>::matrix(va.rows(), ca + cb);
  out.mat().leftCols(ca) = va.mat();
  out.mat().rightCols(cb) = vb.mat();
  const auto id = static_cast<uint32_t>(nodes_.size());
  return push(std::move(out), needs(a) || needs(b), [this, a, b, ca, cb, id] {
    const auto& g = upstream(Var{id});
    if (needs(a)) grad_buffer(a).mat() += g.mat().leftCols(ca);
    if (needs(b)) grad_buffer(b).mat() += g.mat().rightCols(cb);
  });
}

template <typename Real>
Var Tape<Real>::gather_rows(Var a, std::span<const uint32_t> index) {
  check(a);
  const auto& va = value(a);
  check_index(index, va.rows(), "gather_rows");
  const std::size_t cols = va.cols();
  Tensor<Real> out = Tensor<Real>::matrix(index.size(), cols);
  for (std::size_t r = 0; r < index.size(); ++r) {
    std::copy_n(va.data() + index[r] * cols, cols, out.data() + r * cols);
  }
  const auto id = static_cast<uint32_t>(nodes_.size());
  return push(std::move(out), needs(a), [this, a, index, cols, id] {
    const auto& g = upstream(Var{id});
    auto& ga = grad_buffer(a);
    for (std::size_t r = 0; r < index.size(); ++r) {
      Real* dst = ga.data() + index[r] * cols;
      const Real* src = g.data() + r * cols;
      for (std::size_t c = 0; c < cols; ++c) dst[c] += src[c];
    }
  });
}

template <typename Real>
Var Tape<Real>::scatter_add_rows(Var a, std::span<const uint32_t> index, std::size_t rows) {
  check(a);
  const auto& va = value(a);
  if (index.size() != va.rows()) {
    throw ShapeError("scatter_add_rows: " + std::to_string(index.size()) + " indices for input " +
                     va.shape_string());
  }
  check_index(index, rows, "scatter_add_rows");
  const std::size_t cols = va.cols();
  Tensor<Real> out = Tensor<Real>::matrix(rows, cols);
  for (std::size_t r = 0; r < index.size(); ++r) {
    Real* dst = out.data() + index[r] * cols;
    const Real* src = va.data() + r * cols;
    for (std::size_t c = 0; c < cols; ++c) dst[c] += src[c];
  }
  const auto id = static_cast<uint32_t>(nodes_.size());
  return push(std::move(out), needs(a), [this, a, index, cols, id] {
    const auto& g = upstream(Var{id});
    auto& ga = grad_buffer(a);
    for (std::size_t r = 0; r < index.size(); ++r) {
      Real* dst = ga.data() + r * cols;
      const Real* src = g.data() + index[r] * cols;
      for (std::size_t c = 0; c < cols; ++c) dst[c] += src[c];
    }
  });
}

template <typename Real>
Var Tape<Real>::relu(Var a) {
  return leaky_relu(a, Real(0));
}

template <typename Real>
Var Tape<Real>::leaky_relu(Var a, Real slope) {
  check(a);
  Tensor<Real> out = value(a);
  for (Real& x : out.vec()) x = x > Real(0) ? x : slope * x;
  const auto id = static_cast<uint32_t>(nodes_.size());
  return push(std::move(out), needs(a), [this, a, slope, id] {
    const auto& g = upstream(Var{id});
    const auto& x = value(a);
    auto& ga = grad_buffer(a);
    for (std::size_t i = 0; i < x.size(); ++i) ga[i] += x[i] > Real(0) ? g[i] : slope * g[i];
  });
}

template <typename Real>
Var Tape<Real>::tanh(Var a) {
  check(a);
  Tensor<Real> out = value(a);
  for (Real& x : out.vec()) x = std::tanh(x);
  const auto id = static_cast<uint32_t>(nodes_.size());
  return push(std::move(out), needs(a), [this, a, id] {
    const auto& g = upstream(Var{id});
    const auto& y = value(Var{id});
    auto& ga = grad_buffer(a);
    for (std::size_t i = 0; i < y.size(); ++i) ga[i] += g[i] * (Real(1) - y[i] * y[i]);
  });
}

template <typename Real>
Var Tape<Real>::sum(Var a) {
  check(a);
  Tensor<Real> out = Tensor<Real>::matrix(1, 1);
  out[0] = value(a).mat().sum();
  const auto id = static_cast<uint32_t>(nodes_.size());
  return push(std::move(out), needs(a), [this, a, id] {
    grad_buffer(a).mat().array() += upstream(Var{id})[0];
  });
}

template <typename Real>
Var Tape<Real>::head_dot(Var z, Var a, int heads) {
  check(z);
  check(a);
  const auto& vz = value(z);
  const auto& va = value(a);
  const std::size_t cols = vz.cols();
  if (heads <= 0 || cols % heads != 0 || va.size() != cols) shape_mismatch("head_dot", vz, va);
  const std::size_t dim = cols / heads;
  const std::size_t rows = vz.rows();
  Tensor<Real> out = Tensor<Real>::matrix(rows, heads);
  for (std::size_t e = 0; e < rows; ++e) {
    for (int h = 0; h < heads; ++h) {
      Real acc = 0;
      for (std::size_t d = h * dim; d < (h + 1) * dim; ++d) acc += vz(e, d) * va[d];
      out(e, h) = acc;
    }
  }
  const auto id = static_cast<uint32_t>(nodes_.size());
  return push(std::move(out), needs(z) || needs(a), [this, z, a, heads, dim, rows, id] {
    const auto& g = upstream(Var{id});
    const auto& vz = value(z);
    const auto& va = value(a);
    Tensor<Real>* gz = needs(z) ? &grad_buffer(z) : nullptr;
    Tensor<Real>* ga = needs(a) ? &grad_buffer(a) : nullptr;
    for (std::size_t e = 0; e < rows; ++e) {
      for (int h = 0; h < heads; ++h) {
        const Real ge = g(e, h);
        for (std::size_t d = h * dim; d < (h + 1) * dim; ++d) {
          if (gz) (*gz)(e, d) += ge * va[d];
          if (ga) (*ga)[d] += ge * vz(e, d);
        }
      }
    }
  });
}

template <typename Real>
Var Tape<Real>::head_scale(Var x, Var alpha, int heads) {
  check(x);
  check(alpha);
  const auto& vx = value(x);
  const auto& va = value(alpha);
  const std::size_t cols = vx.cols();
  if (heads <= 0 || cols % heads != 0 || va.rows() != vx.rows() ||
      va.cols() != static_cast<std::size_t>(heads)) {
    shape_mismatch("head_scale", vx, va);
  }
  const std::size_t dim = cols / heads;
  const std::size_t rows = vx.rows();
  Tensor<Real> out = vx;
  for (std::size_t e = 0; e < rows; ++e) {
    for (std::size_t d = 0; d < cols; ++d) out(e, d) *= va(e, d / dim);
  }
  const auto id = static_cast<uint32_t>(nodes_.size());
  return push(std::move(out), needs(x) || needs(alpha), [this, x, alpha, dim, rows, cols, id] {
    const auto& g = upstream(Var{id});
    const auto& vx = value(x);
    const auto& va = value(alpha);
    Tensor<Real>* gx = needs(x) ? &grad_buffer(x) : nullptr;
    Tensor<Real>* galpha = needs(alpha) ? &grad_buffer(alpha) : nullptr;
    for (std::size_t e = 0; e < rows; ++e) {
      for (std::size_t d = 0; d < cols; ++d) {
        if (gx) (*gx)(e, d) += g(e, d) * va(e, d / dim);
        if (galpha) (*galpha)(e, d / dim) += g(e, d) * vx(e, d);
      }
    }
  });
}

template <typename Real>
Var Tape<Real>::grouped_softmax(Var x, std::span<const uint32_t> group_of, std::size_t groups) {
  check(x);
  Tensor<Real> out = nn::grouped_softmax(value(x), group_of, groups);
  const auto id = static_cast<uint32_t>(nodes_.size());
  return push(std::move(out), needs(x), [this, x, group_of, groups, id] {
    const auto& g = upstream(Var{id});
    const auto& y = value(Var{id});
    const std::size_t rows = y.rows();
    const std::size_t cols = y.cols();
    std::vector<Real> dot(groups * cols, Real(0));
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t c = 0; c < cols; ++c) dot[group_of[r] * cols + c] += y(r, c) * g(r, c);
    }
    auto& gx = grad_buffer(x);
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t c = 0; c < cols; ++c) {
        gx(r, c) += y(r, c) * (g(r, c) - dot[group_of[r] * cols + c]);
      }
    }
  });
}

template <typename Real>
Var Tape<Real>::segmented_maxpool(Var x, std::span<const uint32_t> segment_of,
                                  std::size_t groups) {
  check(x);
  SegmentedMax<Real> pooled = segmented_max(value(x), segment_of, groups);
  const auto id = static_cast<uint32_t>(nodes_.size());
  const std::size_t cols = value(x).cols();
  return push(std::move(pooled.values), needs(x),
              [this, x, cols, id, argmax = std::move(pooled.argmax)] {
                const auto& g = upstream(Var{id});
                auto& gx = grad_buffer(x);
                for (std::size_t k = 0; k < argmax.size(); ++k) {
                  gx(argmax[k], k % cols) += g[k];
                }
              });
}

template <typename Real>
Var Tape<Real>::cross_entropy(Var logits, std::span<const int32_t> labels) {
  check(logits);
  const auto& z = value(logits);
  const std::size_t rows = z.rows();
  const std::size_t classes = z.cols();
  if (labels.size() != rows) {
    throw ShapeError("cross_entropy: " + std::to_string(labels.size()) + " labels for logits " +
                     z.shape_string());
  }
  std::size_t count = 0;
  for (int32_t label : labels) {
    if (label < -1 || label >= static_cast<int32_t>(classes)) {
      throw ShapeError("cross_entropy: label " + std::to_string(label) + " outside [-1, " +
                       std::to_string(classes) + ")");
    }
    if (label >= 0) ++count;
  }
  if (count == 0) throw NumericError("cross_entropy: every label is ignored, loss undefined");

  Tensor<Real> probs(z.dims());
  Real total = 0;
  for (std::size_t r = 0; r < rows; ++r) {
    if (labels[r] < 0) continue;
    Real peak = z(r, 0);
    for (std::size_t c = 1; c < classes; ++c) peak = std::max(peak, z(r, c));
    Real denom = 0;
    for (std::size_t c = 0; c < classes; ++c) {
      probs(r, c) = std::exp(z(r, c) - peak);
      denom += probs(r, c);
    }
    for (std::size_t c = 0; c < classes; ++c) probs(r, c) /= denom;
    total += std::log(denom) + peak - z(r, labels[r]);
  }
  Tensor<Real> out = Tensor<Real>::matrix(1, 1);
  out[0] = total / static_cast<Real>(count);
  const auto id = static_cast<uint32_t>(nodes_.size());
  return push(std::move(out), needs(logits),
              [this, logits, labels, count, id, probs = std::move(probs)] {
                const Real g = upstream(Var{id})[0] / static_cast<Real>(count);
                auto& gz = grad_buffer(logits);
                for (std::size_t r = 0; r < labels.size(); ++r) {
                  if (labels[r] < 0) continue;
                  for (std::size_t c = 0; c < gz.cols(); ++c) gz(r, c) += g * probs(r, c);
                  gz(r, labels[r]) -= g;
                }
              });
}

template SegmentedMax<float> segmented_max(const Tensor<float>&, std::span<const uint32_t>,
                                           std::size_t);
template SegmentedMax<double> segmented_max(const Tensor<double>&, std::span<const uint32_t>,
                                            std::size_t);
template Tensor<float> grouped_softmax(const Tensor<float>&, std::span<const uint32_t>,
                                       std::size_t);
template Tensor<double> grouped_softmax(const Tensor<double>&, std::span<const uint32_t>,
                                        std::size_t);
template class Tape<float>;
template class Tape<double>;
template SegmentedMax<long double> segmented_max(const Tensor<long double>&,
                                                 std::span<const uint32_t>, std::size_t);
template Tensor<long double> grouped_softmax(const Tensor<long double>&,
                                             std::span<const uint32_t>, std::size_t);
template class Tape<long double>;

}  // namespace seggraph::nn
