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

#include "seggraph/model.hpp"

#include "seggraph/errors.hpp"

#include <cmath>
#include <memory>
#include <random>

namespace seggraph {

using nn::BoundParams;
using nn::ParamStore;
using nn::Tape;
using nn::Tensor;
using nn::Var;

std::string AblationFlags::describe() const {
  if (!use_segments) return "mlp-baseline";
  std::string s;
  s += segment_encoder ? "SE" : "AVE";
  s += quality_unpool ? "+VQ" : "+AVE";
  s += overlap_edges ? "+Eo" : "";
  s += adjacency_edges ? "+Ea" : "";
  return s;
}

void ModelConfig::validate() const {
  if (input_channels <= 0 || channels <= 0) throw ConfigError("channel counts must be positive");
  if (num_classes <= 0) throw ConfigError("num_classes must be positive");
  if (heads <= 0 || channels % heads != 0) {
    throw ConfigError("channels (" + std::to_string(channels) + ") must split evenly into " +
                      std::to_string(heads) + " heads");
  }
  if (gat_layers < 0 || quality_hidden <= 0) throw ConfigError("invalid layer sizes");
}

std::vector<Vec3> relative_normalize(const PointCloud& cloud, const Segment& segment) {
  if (segment.point_ids.empty()) throw ContractError("relative_normalize on an empty segment");
  Vec3 lo = cloud.positions[segment.point_ids.front()];
  Vec3 hi = lo;
  Vec3 centroid = Vec3::Zero();
  for (uint32_t id : segment.point_ids) {
    lo = lo.cwiseMin(cloud.positions[id]);
    hi = hi.cwiseMax(cloud.positions[id]);
    centroid += cloud.positions[id];
  }
  centroid /= static_cast<double>(segment.point_ids.size());
  const Vec3 extent = (hi - lo).cwiseMax(Vec3::Constant(kExtentEpsilon));
  std::vector<Vec3> out;
  out.reserve(segment.point_ids.size());
  for (uint32_t id : segment.point_ids) {
    out.push_back((cloud.positions[id] - centroid).cwiseQuotient(extent));
  }
  return out;
}

double view_quality(const Vec3& normal, const Vec3& point, const Vec3& camera_position) {
  const Vec3 ray = point - camera_position;
  const double len = ray.norm();
  if (!(len > 0.0)) throw GeometryError("point coincides with the camera position");
  return std::abs(normal.dot(ray) / len);
}

void expand_edges(const std::vector<Edge>& edges, uint32_t nodes, std::vector<uint32_t>& source,
                  std::vector<uint32_t>& target) {
  source.clear();
  target.clear();
  source.reserve(nodes + 2 * edges.size());
  target.reserve(nodes + 2 * edges.size());
  for (uint32_t i = 0; i < nodes; ++i) {
    source.push_back(i);
    target.push_back(i);
  }
  for (const auto& [a, b] : edges) {
    if (a >= nodes || b >= nodes) {
      throw GraphError("edge (" + std::to_string(a) + ", " + std::to_string(b) +
                       ") outside a graph of " + std::to_string(nodes) + " nodes");
    }
    source.push_back(a);
    target.push_back(b);
    source.push_back(b);
    target.push_back(a);
  }
}

template <typename Real>
ModelInput<Real> prepare_input(const ShapeArtifacts& shape) {
  const PointCloud& cloud = shape.cloud;
  const SegmentSet& segs = shape.segments;
  const std::size_t n = cloud.size();
  if (shape.features.num_points != n) {
    throw ConfigError(shape.name + ": feature bank has " +
                      std::to_string(shape.features.num_points) + " rows for " +
                      std::to_string(n) + " points");
  }
  if (segs.point_memberships.size() != n && segs.size() > 0) {
    throw ConfigError(shape.name + ": segment memberships do not match the point cloud");
  }

  ModelInput<Real> in;
  in.num_points = n;
  in.num_segments = segs.size();
  const int cin = shape.features.channels;
  in.point_features = Tensor<Real>::matrix(n, cin);
  for (std::size_t k = 0; k < shape.features.features.size(); ++k) {
    in.point_features[k] = static_cast<Real>(shape.features.features[k]);
  }

  std::size_t members = 0;
  for (const Segment& s : segs.segments) members += s.point_ids.size();
  in.member_segment.reserve(members);
  in.member_point.reserve(members);
  in.geometry = Tensor<Real>::matrix(members, 6);
  in.view_quality = Tensor<Real>::matrix(members, 1);
  in.uniform_weight = Tensor<Real>::matrix(members, 1);
  in.mean_weight = Tensor<Real>::matrix(members, 1);
  std::size_t m = 0;
  for (std::size_t s = 0; s < segs.size(); ++s) {
    const Segment& seg = segs.segments[s];
    const std::vector<Vec3> rel = relative_normalize(cloud, seg);
    for (std::size_t k = 0; k < seg.point_ids.size(); ++k, ++m) {
      const uint32_t j = seg.point_ids[k];
      in.member_segment.push_back(static_cast<uint32_t>(s));
      in.member_point.push_back(j);
      const Vec3& nrm = cloud.normals[j];
      for (int c = 0; c < 3; ++c) {
        in.geometry(m, c) = static_cast<Real>(nrm[c]);
        in.geometry(m, 3 + c) = static_cast<Real>(rel[k][c]);
      }
      in.view_quality[m] =
          static_cast<Real>(view_quality(nrm, cloud.positions[j], seg.camera_position));
      in.uniform_weight[m] = static_cast<Real>(1.0 / segs.point_memberships[j].size());
      in.mean_weight[m] = static_cast<Real>(1.0 / seg.point_ids.size());
    }
  }
  const auto nodes = static_cast<uint32_t>(segs.size());
  if (shape.graph.node_count != nodes) {
    throw ConfigError(shape.name + ": graph has " + std::to_string(shape.graph.node_count) +
                      " nodes for " + std::to_string(nodes) + " segments");
  }
  expand_edges(shape.graph.overlap_edges, nodes, in.overlap_source, in.overlap_target);
  expand_edges(shape.graph.adjacency_edges, nodes, in.adjacency_source, in.adjacency_target);
  in.labels = cloud.labels;
  return in;
}

namespace {

template <typename Real>
void add_linear(ParamStore<Real>& store, std::mt19937_64& rng, const std::string& prefix,
                std::size_t in, std::size_t out, bool bias = true) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(in));
  std::uniform_real_distribution<double> dist(-bound, bound);
  Tensor<Real> w = Tensor<Real>::matrix(in, out);
  for (Real& x : w.vec()) x = static_cast<Real>(dist(rng));
  store.add(prefix + ".weight", std::move(w));
  if (bias) {
    Tensor<Real> b = Tensor<Real>::matrix(1, out);
    for (Real& x : b.vec()) x = static_cast<Real>(dist(rng));
    store.add(prefix + ".bias", std::move(b));
  }
}

template <typename Real>
void add_glorot(ParamStore<Real>& store, std::mt19937_64& rng, const std::string& name,
                std::size_t rows, std::size_t cols, std::size_t fan_in, std::size_t fan_out) {
  const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::uniform_real_distribution<double> dist(-bound, bound);
  Tensor<Real> w = Tensor<Real>::matrix(rows, cols);
  for (Real& x : w.vec()) x = static_cast<Real>(dist(rng));
  store.add(name, std::move(w));
}

std::string gat_prefix(int layer, char edge_type) {
  return "gat" + std::to_string(layer) + "." + edge_type;
}

}  // namespace

template <typename Real>
ParamStore<Real> init_model_params(const ModelConfig& config, uint64_t seed) {
  config.validate();
  std::mt19937_64 rng(seed);
  const std::size_t c = config.channels;
  const std::size_t head_dim = c / config.heads;
  ParamStore<Real> store;
  add_linear(store, rng, "proj", config.input_channels, c, false);
  add_linear(store, rng, "geom.l1", 6, c);
  add_linear(store, rng, "geom.l2", c, c);
  add_glorot(store, rng, "attn.w_point", c, c, c, c);
  add_glorot(store, rng, "attn.w_segment", c, c, c, c);
  add_glorot(store, rng, "attn.score", c, 1, c, 1);
  for (int layer = 1; layer <= config.gat_layers; ++layer) {
    for (char type : {'o', 'a'}) {
      const std::string prefix = gat_prefix(layer, type);
      add_glorot(store, rng, prefix + ".w_source", c, c, c, c);
      add_glorot(store, rng, prefix + ".w_target", c, c, c, c);
      add_glorot(store, rng, prefix + ".attn", 1, c, head_dim, 1);
    }
    add_linear(store, rng, "fuse" + std::to_string(layer) + ".l1", 2 * c, c);
    add_linear(store, rng, "fuse" + std::to_string(layer) + ".l2", c, c);
  }
  add_linear(store, rng, "quality.l1", 1, config.quality_hidden);
  add_linear(store, rng, "quality.l2", config.quality_hidden, 1);
  add_linear(store, rng, "head.l1", c, c);
  add_linear(store, rng, "head.l2", c, config.num_classes);
  return store;
}

template <typename Real>
void check_model_params(const ModelConfig& config, const ParamStore<Real>& params) {
  const ParamStore<Real> expected = init_model_params<Real>(config, 0);
  if (expected.size() != params.size()) {
    throw ConfigError("checkpoint has " + std::to_string(params.size()) + " tensors, model needs " +
                      std::to_string(expected.size()));
  }
  for (const auto& e : expected.params()) {
    if (!params.contains(e.name)) throw ConfigError("checkpoint is missing parameter " + e.name);
    const auto& got = params.at(e.name);
    if (got.value.dims() != e.value.dims()) {
      throw ConfigError("parameter " + e.name + " has shape " + got.value.shape_string() +
                        ", model needs " + e.value.shape_string());
    }
  }
}

template <typename Real>
Var linear(Tape<Real>& tape, const BoundParams<Real>& p, const std::string& prefix, Var x) {
  return tape.add_bias(tape.matmul(x, p[prefix + ".weight"]), p[prefix + ".bias"]);
}

template <typename Real>
Var encode_segments(Tape<Real>& tape, const BoundParams<Real>& p, const ModelConfig& config,
                    const ModelInput<Real>& input, Var point_features) {
  const std::size_t groups = input.num_segments;
  const Var member_features = tape.gather_rows(point_features, input.member_point);
  if (!config.ablation.segment_encoder) {
    const Var weights = tape.constant(input.mean_weight);
    return tape.scatter_add_rows(tape.mul_rows(member_features, weights), input.member_segment,
                                 groups);
  }
  const Var geometry = tape.constant(input.geometry);
  const Var local = linear(tape, p, "geom.l2", tape.relu(linear(tape, p, "geom.l1", geometry)));
  const Var pooled = tape.segmented_maxpool(local, input.member_segment, groups);
  const Var key = tape.matmul(local, p["attn.w_point"]);
  const Var query =
      tape.gather_rows(tape.matmul(pooled, p["attn.w_segment"]), input.member_segment);
  const Var scores = tape.matmul(tape.tanh(tape.add(key, query)), p["attn.score"]);
  const Var alpha = tape.grouped_softmax(scores, input.member_segment, groups);
  const Var attended =
      tape.scatter_add_rows(tape.mul_rows(member_features, alpha), input.member_segment, groups);
  return tape.add(pooled, attended);
}

template <typename Real>
Var gatv2_layer(Tape<Real>& tape, const BoundParams<Real>& p, const std::string& prefix,
                const ModelConfig& config, Var nodes, std::span<const uint32_t> source,
                std::span<const uint32_t> target) {
  const std::size_t count = tape.value(nodes).rows();
  const Var xs = tape.matmul(nodes, p[prefix + ".w_source"]);
  const Var xt = tape.matmul(nodes, p[prefix + ".w_target"]);
  const Var src = tape.gather_rows(xs, source);
  const Var hidden = tape.leaky_relu(tape.add(tape.gather_rows(xt, target), src),
                                     static_cast<Real>(config.leaky_slope));
  const Var logits = tape.head_dot(hidden, p[prefix + ".attn"], config.heads);
  const Var alpha = tape.grouped_softmax(logits, target, count);
  return tape.scatter_add_rows(tape.head_scale(src, alpha, config.heads), target, count);
}

template <typename Real>
Var propagate_graph(Tape<Real>& tape, const BoundParams<Real>& p, const ModelConfig& config,
                    const ModelInput<Real>& input, Var nodes) {
  const AblationFlags& flags = config.ablation;
  if (!flags.propagates()) return nodes;
  const std::size_t count = tape.value(nodes).rows();
  const std::size_t c = tape.value(nodes).cols();
  Var h = nodes;
  for (int layer = 1; layer <= config.gat_layers; ++layer) {
    const Var zeros = tape.constant(Tensor<Real>::matrix(count, c));
    const Var h_o = flags.overlap_edges
                        ? gatv2_layer(tape, p, gat_prefix(layer, 'o'), config, h,
                                      input.overlap_source, input.overlap_target)
                        : zeros;
    const Var h_a = flags.adjacency_edges
                        ? gatv2_layer(tape, p, gat_prefix(layer, 'a'), config, h,
                                      input.adjacency_source, input.adjacency_target)
                        : zeros;
    const std::string fuse = "fuse" + std::to_string(layer);
    const Var mixed = linear(tape, p, fuse + ".l2",
                             tape.relu(linear(tape, p, fuse + ".l1", tape.concat_cols(h_o, h_a))));
    h = tape.add(h, mixed);
  }
  return h;
}

template <typename Real>
Var fusion_weights(Tape<Real>& tape, const BoundParams<Real>& p, const ModelConfig& config,
                   const ModelInput<Real>& input) {
  if (!config.ablation.quality_unpool) return tape.constant(input.uniform_weight);
  const Var raw = tape.constant(input.view_quality);
  const Var logits =
      linear(tape, p, "quality.l2", tape.relu(linear(tape, p, "quality.l1", raw)));
  return tape.grouped_softmax(logits, input.member_point, input.num_points);
}

template <typename Real>
ForwardResult<Real> forward_model(Tape<Real>& tape, const BoundParams<Real>& p,
                                  const ModelConfig& config, const ModelInput<Real>& input) {
  if (static_cast<int>(input.point_features.cols()) != config.input_channels) {
    throw ConfigError("shape features have " + std::to_string(input.point_features.cols()) +
                      " channels, model expects " + std::to_string(config.input_channels));
  }
  ForwardResult<Real> out;
  const Var raw = tape.constant(input.point_features);
  out.point_features = tape.matmul(raw, p["proj.weight"]);
  out.fused = out.point_features;
  if (config.ablation.use_segments && input.num_segments > 0) {
    out.segment_features = encode_segments(tape, p, config, input, out.point_features);
    out.propagated = propagate_graph(tape, p, config, input, out.segment_features);
    out.fusion_weights = fusion_weights(tape, p, config, input);
    const Var member = tape.gather_rows(out.propagated, input.member_segment);
    const Var weighted = tape.mul_rows(member, out.fusion_weights);
    out.fused = tape.add(out.point_features,
                         tape.scatter_add_rows(weighted, input.member_point, input.num_points));
  }
  out.logits = linear(tape, p, "head.l2", tape.relu(linear(tape, p, "head.l1", out.fused)));
  return out;
}

nn::ScalarFunction model_loss_function(const ModelConfig& config, const ShapeArtifacts& shape,
                                       const ParamStore<double>& layout) {
  auto input = std::make_shared<const ModelInput<double>>(prepare_input<double>(shape));
  if (input->labels.empty()) throw ConfigError("model gradient check needs a labeled shape");
  std::vector<std::string> names;
  for (const auto& param : layout.params()) names.push_back(param.name);
  return [config, input, names](const std::vector<Tensor<double>>& values,
                                std::vector<Tensor<double>>* grads) {
    ParamStore<double> store;
    for (std::size_t i = 0; i < names.size(); ++i) store.add(names[i], values[i]);
    Tape<double> tape;
    const BoundParams<double> bound(tape, store);
    const auto result = forward_model(tape, bound, config, *input);
    const Var loss = tape.cross_entropy(result.logits, input->labels);
    const double value = tape.value(loss)[0];
    if (grads != nullptr) {
      tape.backward(loss);
      bound.accumulate(tape, store);
      grads->clear();
      for (const auto& param : store.params()) grads->push_back(param.grad);
    }
    return value;
  };
}

nn::ReferenceFunction model_reference_loss(const ModelConfig& config, const ShapeArtifacts& shape,
                                           const ParamStore<double>& layout) {
  using Ext = long double;
  auto input = std::make_shared<const ModelInput<Ext>>(prepare_input<Ext>(shape));
  if (input->labels.empty()) throw ConfigError("model gradient check needs a labeled shape");
  std::vector<std::string> names;
  for (const auto& param : layout.params()) names.push_back(param.name);
  return [config, input, names](const std::vector<Tensor<double>>& values) {
    ParamStore<Ext> store;
    for (std::size_t i = 0; i < names.size(); ++i) {
      Tensor<Ext> t(values[i].dims());
      std::copy(values[i].vec().begin(), values[i].vec().end(), t.vec().begin());
      store.add(names[i], std::move(t));
    }
    Tape<Ext> tape;
    const BoundParams<Ext> bound(tape, store);
    const auto result = forward_model(tape, bound, config, *input);
    return tape.value(tape.cross_entropy(result.logits, input->labels))[0];
  };
}

#define SEGGRAPH_INSTANTIATE(Real)                                                               \
  template ModelInput<Real> prepare_input<Real>(const ShapeArtifacts&);                          \
  template ParamStore<Real> init_model_params<Real>(const ModelConfig&, uint64_t);               \
  template void check_model_params<Real>(const ModelConfig&, const ParamStore<Real>&);           \
  template Var linear<Real>(Tape<Real>&, const BoundParams<Real>&, const std::string&, Var);     \
  template Var encode_segments<Real>(Tape<Real>&, const BoundParams<Real>&, const ModelConfig&,  \
                                     const ModelInput<Real>&, Var);                              \
  template Var gatv2_layer<Real>(Tape<Real>&, const BoundParams<Real>&, const std::string&,      \
                                 const ModelConfig&, Var, std::span<const uint32_t>,             \
                                 std::span<const uint32_t>);                                     \
  template Var propagate_graph<Real>(Tape<Real>&, const BoundParams<Real>&, const ModelConfig&,  \
                                     const ModelInput<Real>&, Var);                              \
  template Var fusion_weights<Real>(Tape<Real>&, const BoundParams<Real>&, const ModelConfig&,   \
                                    const ModelInput<Real>&);                                    \
  template ForwardResult<Real> forward_model<Real>(Tape<Real>&, const BoundParams<Real>&,        \
                                                   const ModelConfig&, const ModelInput<Real>&);

SEGGRAPH_INSTANTIATE(float)
SEGGRAPH_INSTANTIATE(double)
SEGGRAPH_INSTANTIATE(long double)

#undef SEGGRAPH_INSTANTIATE

}  // namespace seggraph
