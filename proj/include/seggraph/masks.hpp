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

#include "seggraph/geometry.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace seggraph {

/// Raw, possibly overlapping masks of one view. Each mask is row-major H*W
/// with nonzero = covered.
struct MaskStack {
  int view_id = 0;
  Resolution resolution;
  std::vector<std::vector<uint8_t>> masks;
};

struct RegionImage {
  int view_id = 0;
  Resolution resolution;
  std::vector<int32_t> region_of_pixel;  // row-major, region id or -1
  int region_count = 0;
};

struct Segment {
  int segment_id = 0;
  int view_id = 0;
  Vec3 camera_position = Vec3::Zero();
  std::vector<uint32_t> point_ids;  // sorted, unique
  Vec3 centroid = Vec3::Zero();
};

struct SegmentSet {
  std::vector<Segment> segments;
  std::vector<std::vector<uint32_t>> point_memberships;  // per point, ascending segment ids

  std::size_t size() const { return segments.size(); }
  /// Recomputes segment ids, centroids and per-point memberships.
  void rebuild(const PointCloud& cloud);
};

inline constexpr int kDefaultMinRegionPixels = 20;
inline constexpr int kDefaultMinSegmentPoints = 5;

/// Splits overlapping masks into disjoint regions: two pixels share a region
/// iff they are covered by exactly the same non-empty subset of masks.
/// Regions smaller than `min_pixels` are dropped. Region ids follow the
/// raster order of each region's first pixel, so the result does not depend
/// on the order of the masks.
RegionImage decompose_view_masks(const MaskStack& stack, int min_pixels = kDefaultMinRegionPixels);

/// Lifts regions to 3D: a segment holds the points visible in the view whose
/// rounded projection falls on a pixel of the region. Views are matched by
/// view_id across the three lists.
SegmentSet lift_segments(std::span<const RegionImage> regions, std::span<const VisibilityMap> vis,
                         std::span<const CameraView> cameras, const PointCloud& cloud,
                         int min_points = kDefaultMinSegmentPoints);

}  // namespace seggraph
