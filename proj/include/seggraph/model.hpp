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

// The segment-graph network:
//
//   point features (C_in) --proj--> F^p (C)
//   per segment: geometric MLP on [normal ; relative position], max-pooled,
//                refined by additive attention over member F^p      -> F^s
//   three dual-edge GATv2 layers over overlap / adjacency edges     -> H
//   per point: F' = F^p + sum over containing segments of w * H_s,
//              w = softmax over segments of an MLP on the view-quality score
//   logits = head(F')
//
// Row-vector convention throughout: a linear layer computes X * W + b with
// W stored in x out.

#pragma once

#include "seggraph/feature_pool.hpp"
#include "seggraph/geometry.hpp"
#include "seggraph/masks.hpp"
#include "seggraph/nn/gradcheck.hpp"
#include "seggraph/nn/params.hpp"
#include "seggraph/segment_graph.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace seggraph {

/// Switches for the ablation rows. The default is the full model.
struct AblationFlags {
  bool use_segments = true;     // false: point-MLP baseline, head on projected features
  bool segment_encoder = true;  // false: segment feature = mean of member point features
  bool quality_unpool = true;   // false: uniform average over containing segments
  bool overlap_edges = true;
  bool adjacency_edges = true;

  bool propagates() const { return use_segments && (overlap_edges || adjacency_edges); }
  std::string describe() const;
  bool operator==(const AblationFlags&) const = default;
};

struct ModelConfig {
  int input_channels = 96;
  int channels = 96;
  int num_classes = 2;
  int heads = 4;
  int gat_layers = 3;
  int quality_hidden = 16;
  double leaky_slope = 0.2;
  AblationFlags ablation;

  void validate() const;
};

/// Everything preprocessing produces for one shape.
struct ShapeArtifacts {
  std::string name;
  PointCloud cloud;
  std::vector<CameraView> cameras;
  SegmentSet segments;
  SegmentGraph graph;
  PointFeatureBank features;
};

inline constexpr double kExtentEpsilon = 1e-6;

/// Per-member relative position: (p - centroid) / max(extent, 1e-6) per axis.
std::vector<Vec3> relative_normalize(const PointCloud& cloud, const Segment& segment);

/// |n . (p - c) / |p - c||. Throws GeometryError when p coincides with c.
double view_quality(const Vec3& normal, const Vec3& point, const Vec3& camera_position);

/// Constant per-shape model inputs. Memberships are (segment, point) pairs in
/// segment-major order; edge lists are directed, both directions plus one
/// self loop per node.
template <typename Real>
struct ModelInput {
  std::size_t num_points = 0;
  std::size_t num_segments = 0;
  nn::Tensor<Real> point_features;  // N x C_in
  std::vector<uint32_t> member_segment;
  std::vector<uint32_t> member_point;
  nn::Tensor<Real> geometry;        // M x 6: normal, relative position
  nn::Tensor<Real> view_quality;    // M x 1 raw quality score
  nn::Tensor<Real> uniform_weight;  // M x 1: 1 / #segments containing the point
  nn::Tensor<Real> mean_weight;     // M x 1: 1 / segment size
  std::vector<uint32_t> overlap_source, overlap_target;
  std::vector<uint32_t> adjacency_source, adjacency_target;
  std::vector<int32_t> labels;      // empty when unlabeled
};

template <typename Real>
ModelInput<Real> prepare_input(const ShapeArtifacts& shape);

/// Directed edge list with self loops from an undirected edge set.
void expand_edges(const std::vector<Edge>& edges, uint32_t nodes, std::vector<uint32_t>& source,
                  std::vector<uint32_t>& target);

template <typename Real>
nn::ParamStore<Real> init_model_params(const ModelConfig& config, uint64_t seed);

/// Checks that `params` carries every tensor the config needs, with the
/// right shapes.
template <typename Real>
void check_model_params(const ModelConfig& config, const nn::ParamStore<Real>& params);

template <typename Real>
struct ForwardResult {
  nn::Var point_features;     // N x C (projected F^p)
  nn::Var segment_features;   // G x C before propagation (invalid without segments)
  nn::Var propagated;         // G x C after propagation
  nn::Var fusion_weights;     // M x 1 (invalid without segments)
  nn::Var fused;              // N x C
  nn::Var logits;             // N x K
};

template <typename Real>
nn::Var linear(nn::Tape<Real>& tape, const nn::BoundParams<Real>& p, const std::string& prefix,
               nn::Var x);

/// Segment features: max-pooled geometric encoding refined by additive
/// attention over member point features, or the plain member mean when the
/// encoder is ablated.
template <typename Real>
nn::Var encode_segments(nn::Tape<Real>& tape, const nn::BoundParams<Real>& p,
                        const ModelConfig& config, const ModelInput<Real>& input,
                        nn::Var point_features);

/// One multi-head GATv2 layer over a directed edge list (self loops included).
template <typename Real>
nn::Var gatv2_layer(nn::Tape<Real>& tape, const nn::BoundParams<Real>& p,
                    const std::string& prefix, const ModelConfig& config, nn::Var nodes,
                    std::span<const uint32_t> source, std::span<const uint32_t> target);

/// Three residual layers, each fusing an overlap branch and an adjacency
/// branch with a per-layer MLP. Disabled edge types contribute zeros.
template <typename Real>
nn::Var propagate_graph(nn::Tape<Real>& tape, const nn::BoundParams<Real>& p,
                        const ModelConfig& config, const ModelInput<Real>& input, nn::Var nodes);

/// Per-membership fusion weights, normalized over each point's segments.
template <typename Real>
nn::Var fusion_weights(nn::Tape<Real>& tape, const nn::BoundParams<Real>& p,
                       const ModelConfig& config, const ModelInput<Real>& input);

template <typename Real>
ForwardResult<Real> forward_model(nn::Tape<Real>& tape, const nn::BoundParams<Real>& p,
                                  const ModelConfig& config, const ModelInput<Real>& input);

/// Mean cross-entropy of the model on one labeled shape as a function of
/// all parameters, in parameter-store order, for gradient checking.
nn::ScalarFunction model_loss_function(const ModelConfig& config, const ShapeArtifacts& shape,
                                       const nn::ParamStore<double>& layout);

/// The same loss evaluated in extended precision, as a finite-difference
/// reference.
nn::ReferenceFunction model_reference_loss(const ModelConfig& config, const ShapeArtifacts& shape,
                                           const nn::ParamStore<double>& layout);

}  // namespace seggraph
