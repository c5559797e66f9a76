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

// Seeded synthetic benchmark: composite primitive shapes (a body, a lid and
// small attachments), per-view part masks with split/merge corruption, and
// prototype-plus-noise patch features standing in for a foundation model.

#pragma once

#include "seggraph/feature_pool.hpp"
#include "seggraph/geometry.hpp"
#include "seggraph/masks.hpp"

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace seggraph {

struct SynthConfig {
  uint64_t seed = 0;
  int num_shapes = 28;
  int train_shapes = 8;
  int parts_per_shape = 4;  // body, lid, handle, button
  int points_per_shape = 1000;
  double feature_noise = 1.0;
  double prototype_separation = 1.0;
  double split_rate = 0.3;
  double merge_rate = 0.5;
  int input_channels = 96;
  int num_views = kDefaultNumViews;
  Resolution resolution{112, 112};
  int patch_size = kDefaultPatchSize;
  double camera_radius = kDefaultCameraRadius;
  std::string category = "synthetic";

  void validate() const;
};

inline constexpr int kMaxSynthParts = 4;
const std::vector<std::string>& synth_class_names();

enum class PrimitiveKind : uint8_t { kBox, kCylinder, kSphere };

struct SynthPart {
  PrimitiveKind kind = PrimitiveKind::kBox;
  Vec3 center = Vec3::Zero();
  Vec3 half_extent = Vec3::Zero();  // box
  double radius = 0.0;              // cylinder, sphere
  double half_height = 0.0;         // cylinder
  int axis = 1;                     // cylinder axis
  int label = 0;
  std::size_t points = 0;

  double area() const;
  /// Outward unit normal of the surface point nearest `p`.
  Vec3 normal_at(const Vec3& p) const;
};

struct SynthShape {
  std::string name;
  PointCloud cloud;                 // normalized, positions and normals rounded to f32
  std::vector<Vec3> raw_positions;  // before normalization
  std::vector<SynthPart> parts;
  std::vector<int> part_of_point;
};

/// Independent RNG stream keyed by (seed, index, tag).
std::mt19937_64 synth_stream(uint64_t seed, uint64_t index, uint64_t tag);

SynthShape generate_shape(const SynthConfig& config, int index);

struct MergeEvent {
  int view_id = 0;
  int label_a = 0;
  int label_b = 0;
  double probability = 0.0;
  double draw = 0.0;
  bool merged = false;
  bool operator==(const MergeEvent&) const = default;
};

/// Per-part visible-pixel masks from each view's pixel owners, then merged
/// (view-dependent probability, higher when the camera sees both parts
/// edge-on) and split along random lines.
std::vector<MaskStack> generate_views_and_masks(const PointCloud& cloud,
                                                std::span<const CameraView> cameras,
                                                std::span<const VisibilityMap> vis,
                                                const SynthConfig& config, int index,
                                                std::vector<MergeEvent>* merge_log = nullptr);

/// One C_in prototype per class, shared by all shapes of the corpus.
std::vector<std::vector<double>> class_prototypes(const SynthConfig& config);

/// Each patch: pixel-count-weighted mean of the prototypes of the parts
/// visible in it, plus Gaussian noise.
std::vector<PatchFeatureGrid> generate_features(const PointCloud& cloud,
                                                std::span<const VisibilityMap> vis,
                                                const SynthConfig& config, int index);

}  // namespace seggraph
