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

#pragma once

#include "seggraph/feature_pool.hpp"
#include "seggraph/geometry.hpp"
#include "seggraph/masks.hpp"
#include "seggraph/model.hpp"
#include "seggraph/segment_graph.hpp"
#include "seggraph/synth.hpp"

#include <json.hpp>

#include <functional>
#include <string>
#include <vector>

namespace seggraph {

/// One shape as delivered by the synthetic generator or an extractor:
/// geometry, cameras, raw per-view masks and patch features.
struct RawShape {
  std::string name;
  std::string split = "test";
  PointCloud cloud;
  std::vector<std::string> class_names;
  std::vector<CameraView> cameras;
  std::vector<MaskStack> masks;
  std::vector<PatchFeatureGrid> grids;
  nlohmann::json provenance = nlohmann::json::object();
};

struct PreprocessOptions {
  int splat = kDefaultSplat;
  double depth_epsilon = kDefaultDepthEpsilon;
  int min_region_pixels = kDefaultMinRegionPixels;
  int min_segment_points = kDefaultMinSegmentPoints;
  double iou_threshold = kDefaultIouThreshold;
  double adjacency_distance = kDefaultAdjacencyDistance;
};

struct StageTimings {
  double render_ms = 0.0;
  double masks_ms = 0.0;
  double pool_ms = 0.0;
  double graph_ms = 0.0;
  nlohmann::json to_json(const std::string& shape) const;
};

std::vector<VisibilityMap> render_visibility(const RawShape& shape, const PreprocessOptions& options);

/// Visibility, mask decomposition, lifting, feature pooling and graph
/// construction. Pooled features are rounded to f32 so that in-memory and
/// on-disk artifacts agree bit for bit.
ShapeArtifacts preprocess_shape(const RawShape& shape, const PreprocessOptions& options = {},
                                StageTimings* timings = nullptr);

RawShape synthesize_raw_shape(const SynthConfig& config, int index,
                              std::vector<MergeEvent>* merge_log = nullptr);

struct Corpus {
  std::string category;
  int num_classes = 0;
  std::vector<std::string> class_names;
  std::vector<ShapeArtifacts> train;
  std::vector<ShapeArtifacts> test;
};

/// Generates and preprocesses a whole synthetic corpus in memory. The first
/// `train_shapes` indices form the training split. Shapes are processed on
/// up to `jobs` threads; the result does not depend on `jobs`.
Corpus synthesize_corpus(const SynthConfig& config, const PreprocessOptions& options = {},
                         int jobs = 1);

/// Runs `fn(i)` for i in [0, count) on up to `jobs` threads. The first
/// exception thrown is rethrown after all workers finish.
void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& fn);

}  // namespace seggraph
