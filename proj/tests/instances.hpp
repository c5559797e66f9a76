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

// Seeded problem instances shared by the unit and acceptance tests.

#pragma once

#include "seggraph/masks.hpp"
#include "seggraph/pipeline.hpp"
#include "seggraph/segment_graph.hpp"

#include <algorithm>
#include <random>
#include <vector>

namespace seggraph::testing {

// Discs, rectangles and the odd speckle mask, possibly more than 64 of them.
inline MaskStack random_mask_stack(uint64_t seed, int width, int height, int count) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  MaskStack stack;
  stack.resolution = {width, height};
  for (int m = 0; m < count; ++m) {
    std::vector<uint8_t> mask(static_cast<std::size_t>(width) * height, 0);
    const double kind = unit(rng);
    const double cx = unit(rng) * width, cy = unit(rng) * height;
    const double rx = (0.05 + 0.3 * unit(rng)) * width, ry = (0.05 + 0.3 * unit(rng)) * height;
    const double density = 0.2 + 0.6 * unit(rng);
    for (int r = 0; r < height; ++r) {
      for (int c = 0; c < width; ++c) {
        const double dx = (c - cx) / rx, dy = (r - cy) / ry;
        bool on = false;
        if (kind < 0.45) on = dx * dx + dy * dy <= 1.0;
        else if (kind < 0.9) on = std::abs(dx) <= 1.0 && std::abs(dy) <= 1.0;
        else on = unit(rng) < density;
        mask[static_cast<std::size_t>(r) * width + c] = on ? 1 : 0;
      }
    }
    stack.masks.push_back(std::move(mask));
  }
  return stack;
}

struct LiftInstance {
  RawShape raw;
  std::vector<VisibilityMap> vis;
  std::vector<RegionImage> regions;
  int min_points = kDefaultMinSegmentPoints;
};

// A small rendered synthetic shape with corrupted masks, sized so that an
// all-pixels-times-all-points walk stays cheap.
inline LiftInstance lift_instance(uint64_t seed) {
  SynthConfig config;
  config.seed = seed;
  config.num_shapes = 1;
  config.points_per_shape = 200 + static_cast<int>(seed % 5) * 40;
  config.num_views = 2 + static_cast<int>(seed % 3);
  config.resolution = {42 + 14 * static_cast<int>(seed % 2), 42};
  config.split_rate = 0.1 * static_cast<double>(seed % 6);
  config.merge_rate = 0.5;
  config.input_channels = 8;
  LiftInstance inst;
  inst.raw = synthesize_raw_shape(config, 0);
  inst.min_points = 1 + static_cast<int>(seed % 4);
  PreprocessOptions options;
  options.splat = 1 + static_cast<int>(seed % 3);
  inst.vis = render_visibility(inst.raw, options);
  for (const MaskStack& stack : inst.raw.masks) {
    inst.regions.push_back(decompose_view_masks(stack, 1 + static_cast<int>(seed % 7)));
  }
  return inst;
}

struct GraphInstance {
  PointCloud cloud;
  SegmentSet segments;
  double iou_threshold = kDefaultIouThreshold;
  double adjacency_distance = kDefaultAdjacencyDistance;
};

// Even seeds: segments of a preprocessed synthetic shape. Odd seeds: random
// overlapping segments on a clustered random cloud, including same-view
// overlaps and duplicated positions that the pipeline never produces.
inline GraphInstance graph_instance(uint64_t seed) {
  GraphInstance inst;
  std::mt19937_64 rng(seed * 7919 + 17);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  if (seed % 2 == 0) {
    SynthConfig config;
    config.seed = seed;
    config.num_shapes = 1;
    config.points_per_shape = 400 + static_cast<int>(unit(rng) * 800);
    config.split_rate = 0.6 * unit(rng);
    config.merge_rate = unit(rng);
    config.input_channels = 8;
    PreprocessOptions options;
    options.min_segment_points = 1 + static_cast<int>(unit(rng) * 6);
    const RawShape raw = synthesize_raw_shape(config, 0);
    std::vector<VisibilityMap> vis = render_visibility(raw, options);
    std::vector<RegionImage> regions;
    for (const MaskStack& stack : raw.masks) {
      regions.push_back(decompose_view_masks(stack, options.min_region_pixels));
    }
    inst.cloud = raw.cloud;
    inst.segments = lift_segments(regions, vis, raw.cameras, inst.cloud, options.min_segment_points);
  } else {
    const std::size_t n = 300 + static_cast<std::size_t>(unit(rng) * 700);
    std::normal_distribution<double> gauss(0.0, 0.02);
    std::vector<Vec3> centers;
    for (int k = 0; k < 12; ++k) centers.push_back(Vec3(unit(rng), unit(rng), unit(rng)) * 0.6);
    for (std::size_t j = 0; j < n; ++j) {
      Vec3 p = centers[j % centers.size()] + Vec3(gauss(rng), gauss(rng), gauss(rng));
      if (j > 0 && unit(rng) < 0.02) p = inst.cloud.positions[j - 1];
      inst.cloud.positions.push_back(p);
      inst.cloud.normals.push_back(Vec3::UnitZ());
    }
    const std::size_t count = 20 + static_cast<std::size_t>(unit(rng) * 180);
    for (std::size_t s = 0; s < count; ++s) {
      Segment seg;
      seg.view_id = static_cast<int>(unit(rng) * 6);
      const Vec3 c = inst.cloud.positions[static_cast<std::size_t>(unit(rng) * n)];
      const double radius = 0.01 + 0.06 * unit(rng);
      for (std::size_t j = 0; j < n; ++j) {
        if ((inst.cloud.positions[j] - c).norm() < radius) seg.point_ids.push_back(static_cast<uint32_t>(j));
      }
      if (seg.point_ids.empty()) seg.point_ids.push_back(static_cast<uint32_t>(unit(rng) * n));
      inst.segments.segments.push_back(std::move(seg));
    }
    inst.segments.rebuild(inst.cloud);
    inst.iou_threshold = 0.05 + 0.3 * unit(rng);
    inst.adjacency_distance = 0.005 + 0.03 * unit(rng);
  }
  if (inst.segments.size() > 200) {
    inst.segments.segments.resize(200);
    inst.segments.rebuild(inst.cloud);
  }
  return inst;
}

}  // namespace seggraph::testing
