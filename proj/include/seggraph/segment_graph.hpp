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

// Segment graph with two mutually exclusive undirected edge types: overlap
// edges between cross-view segments sharing many points, and adjacency edges
// between segments that barely overlap but come spatially close.

#pragma once

#include "seggraph/geometry.hpp"
#include "seggraph/masks.hpp"

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace seggraph {

using Edge = std::pair<uint32_t, uint32_t>;  // first < second

struct SegmentGraph {
  uint32_t node_count = 0;
  std::vector<Edge> overlap_edges;    // sorted, unique
  std::vector<Edge> adjacency_edges;  // sorted, unique

  bool operator==(const SegmentGraph&) const = default;

  /// Structural checks: sorted unique edges, no self loops, endpoints in
  /// range, disjoint edge sets. With `segments`, also cross-view overlap.
  void validate(const SegmentSet* segments = nullptr) const;
};

inline constexpr double kDefaultIouThreshold = 0.10;
inline constexpr double kDefaultAdjacencyDistance = 0.01;

/// |a ∩ b| / |a ∪ b| on sorted point-id lists.
double point_set_iou(std::span<const uint32_t> a, std::span<const uint32_t> b);
double point_set_iou(const Segment& a, const Segment& b);

/// Exact minimal Euclidean distance between two point sets, searched over a
/// uniform hash grid (default cell 0.01) with ring expansion and early exit.
double min_pairwise_distance(std::span<const uint32_t> a, std::span<const uint32_t> b,
                             std::span<const Vec3> positions,
                             double cell_size = kDefaultAdjacencyDistance);
double min_pairwise_distance(const Segment& a, const Segment& b, std::span<const Vec3> positions);

/// Overlap edge iff the views differ and IoU > iou_threshold; otherwise an
/// adjacency edge iff the minimal point distance < adjacency_distance.
/// Candidates come from a shared-point index and a hash grid with cell size
/// equal to the adjacency distance, which makes pruning exact.
SegmentGraph build_segment_graph(const SegmentSet& segments, const PointCloud& cloud,
                                 double iou_threshold = kDefaultIouThreshold,
                                 double adjacency_distance = kDefaultAdjacencyDistance);

}  // namespace seggraph
