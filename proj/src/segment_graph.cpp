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

#include "seggraph/segment_graph.hpp"

#include "seggraph/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <unordered_map>
#include <unordered_set>

namespace seggraph {

namespace {

using CellKey = uint64_t;

std::array<int64_t, 3> cell_of(const Vec3& p, double cell) {
  return {static_cast<int64_t>(std::floor(p.x() / cell)),
          static_cast<int64_t>(std::floor(p.y() / cell)),
          static_cast<int64_t>(std::floor(p.z() / cell))};
}

CellKey pack(int64_t x, int64_t y, int64_t z) {
  constexpr int64_t kBias = int64_t{1} << 20;
  constexpr uint64_t kMask = (uint64_t{1} << 21) - 1;
  return (static_cast<uint64_t>(x + kBias) & kMask) |
         ((static_cast<uint64_t>(y + kBias) & kMask) << 21) |
         ((static_cast<uint64_t>(z + kBias) & kMask) << 42);
}

CellKey pack(const std::array<int64_t, 3>& c) { return pack(c[0], c[1], c[2]); }

uint64_t pair_key(uint32_t a, uint32_t b) {
  if (a > b) std::swap(a, b);
  return (static_cast<uint64_t>(a) << 32) | b;
}

Edge unpack_pair(uint64_t key) {
  return {static_cast<uint32_t>(key >> 32), static_cast<uint32_t>(key & 0xffffffffu)};
}

class HashGrid {
 public:
  HashGrid(std::span<const uint32_t> ids, std::span<const Vec3> positions, double cell)
      : cell_(cell) {
    for (uint32_t id : ids) cells_[pack(cell_of(positions[id], cell))].push_back(id);
  }

  const std::vector<uint32_t>* find(int64_t x, int64_t y, int64_t z) const {
    auto it = cells_.find(pack(x, y, z));
    return it == cells_.end() ? nullptr : &it->second;
  }

  double cell() const { return cell_; }

 private:
  double cell_;
  std::unordered_map<CellKey, std::vector<uint32_t>> cells_;
};

}  // namespace

void SegmentGraph::validate(const SegmentSet* segments) const {
  auto check = [&](const std::vector<Edge>& edges, const char* name) {
    for (std::size_t i = 0; i < edges.size(); ++i) {
      const auto [a, b] = edges[i];
      if (a >= b) throw GraphError(std::string(name) + " edge is a self loop or not ordered");
      if (b >= node_count) throw GraphError(std::string(name) + " edge endpoint out of range");
      if (i > 0 && !(edges[i - 1] < edges[i])) {
        throw GraphError(std::string(name) + " edges are not sorted and unique");
      }
    }
  };
  check(overlap_edges, "overlap");
  check(adjacency_edges, "adjacency");
  std::vector<Edge> common;
  std::set_intersection(overlap_edges.begin(), overlap_edges.end(), adjacency_edges.begin(),
                        adjacency_edges.end(), std::back_inserter(common));
  if (!common.empty()) throw GraphError("overlap and adjacency edge sets intersect");
  if (segments != nullptr) {
    if (segments->size() != node_count) throw GraphError("graph node count != segment count");
    for (const auto& [a, b] : overlap_edges) {
      if (segments->segments[a].view_id == segments->segments[b].view_id) {
        throw GraphError("overlap edge between segments of the same view");
      }
    }
  }
}

double point_set_iou(std::span<const uint32_t> a, std::span<const uint32_t> b) {
  if (a.empty() || b.empty()) throw ContractError("point_set_iou needs non-empty sets");
  std::size_t inter = 0;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (*ia < *ib) {
      ++ia;
    } else if (*ib < *ia) {
      ++ib;
    } else {
      ++inter;
      ++ia;
      ++ib;
    }
  }
  return static_cast<double>(inter) / static_cast<double>(a.size() + b.size() - inter);
}

double point_set_iou(const Segment& a, const Segment& b) {
  return point_set_iou(a.point_ids, b.point_ids);
}

double min_pairwise_distance(std::span<const uint32_t> a, std::span<const uint32_t> b,
                             std::span<const Vec3> positions, double cell_size) {
  if (a.empty() || b.empty()) throw ContractError("min_pairwise_distance needs non-empty sets");
  if (!(cell_size > 0.0)) throw ConfigError("grid cell size must be positive");
  if (a.size() > b.size()) std::swap(a, b);

  const HashGrid grid(b, positions, cell_size);
  double best_sq = std::numeric_limits<double>::infinity();

  auto brute = [&](const Vec3& p) {
    for (uint32_t id : b) best_sq = std::min(best_sq, (positions[id] - p).squaredNorm());
  };

  for (uint32_t ida : a) {
    const Vec3& p = positions[ida];
    const auto c = cell_of(p, cell_size);
    for (int64_t r = 0;; ++r) {
      // Everything outside rings 0..r-1 is at least (r-1) cells away.
      const double reach = static_cast<double>(r - 1) * cell_size;
      if (r > 0 && reach > 0.0 && reach * reach >= best_sq) break;
      const double ring_cells = std::pow(2.0 * r + 1.0, 3.0);
      if (ring_cells > 4.0 * static_cast<double>(b.size()) + 27.0) {
        brute(p);
        break;
      }
      for (int64_t dx = -r; dx <= r; ++dx) {
        for (int64_t dy = -r; dy <= r; ++dy) {
          for (int64_t dz = -r; dz <= r; ++dz) {
            if (std::max({std::abs(dx), std::abs(dy), std::abs(dz)}) != r) continue;
            if (const auto* ids = grid.find(c[0] + dx, c[1] + dy, c[2] + dz)) {
              for (uint32_t id : *ids) {
                best_sq = std::min(best_sq, (positions[id] - p).squaredNorm());
              }
            }
          }
        }
      }
    }
    if (best_sq == 0.0) break;
  }
  return std::sqrt(best_sq);
}

double min_pairwise_distance(const Segment& a, const Segment& b, std::span<const Vec3> positions) {
  return min_pairwise_distance(a.point_ids, b.point_ids, positions);
}

SegmentGraph build_segment_graph(const SegmentSet& segments, const PointCloud& cloud,
                                 double iou_threshold, double adjacency_distance) {
  SegmentGraph graph;
  graph.node_count = static_cast<uint32_t>(segments.size());
  if (segments.size() == 0) return graph;
  if (segments.point_memberships.size() != cloud.size()) {
    throw ConfigError("segment memberships do not match the point cloud");
  }
  if (!(adjacency_distance > 0.0)) throw ConfigError("adjacency distance must be positive");

  // Pairs sharing at least one point, with their intersection sizes.
  std::unordered_map<uint64_t, uint32_t> shared;
  std::vector<uint32_t> member_points;
  for (std::size_t j = 0; j < cloud.size(); ++j) {
    const auto& mem = segments.point_memberships[j];
    if (!mem.empty()) member_points.push_back(static_cast<uint32_t>(j));
    for (std::size_t x = 0; x < mem.size(); ++x) {
      for (std::size_t y = x + 1; y < mem.size(); ++y) ++shared[pair_key(mem[x], mem[y])];
    }
  }

  std::vector<Edge> overlap;
  std::vector<Edge> adjacency;
  auto high_overlap = [&](uint64_t key, uint32_t inter) {
    const Edge e = unpack_pair(key);
    const std::size_t na = segments.segments[e.first].point_ids.size();
    const std::size_t nb = segments.segments[e.second].point_ids.size();
    return static_cast<double>(inter) / static_cast<double>(na + nb - inter) > iou_threshold;
  };
  for (const auto& [key, inter] : shared) {
    const Edge e = unpack_pair(key);
    const bool cross_view =
        segments.segments[e.first].view_id != segments.segments[e.second].view_id;
    if (high_overlap(key, inter)) {
      if (cross_view) overlap.push_back(e);
    } else {
      adjacency.push_back(e);  // a shared point puts them at distance zero
    }
  }

  // Disjoint pairs whose closest points are within the adjacency distance.
  const HashGrid grid(member_points, cloud.positions, adjacency_distance);
  std::unordered_set<uint64_t> close;
  for (uint32_t p : member_points) {
    const Vec3& pos = cloud.positions[p];
    const auto c = cell_of(pos, adjacency_distance);
    const auto& mem_p = segments.point_memberships[p];
    for (int64_t dx = -1; dx <= 1; ++dx) {
      for (int64_t dy = -1; dy <= 1; ++dy) {
        for (int64_t dz = -1; dz <= 1; ++dz) {
          const auto* ids = grid.find(c[0] + dx, c[1] + dy, c[2] + dz);
          if (ids == nullptr) continue;
          for (uint32_t q : *ids) {
            if (q <= p) continue;
            if (!((cloud.positions[q] - pos).norm() < adjacency_distance)) continue;
            for (uint32_t s : mem_p) {
              for (uint32_t t : segments.point_memberships[q]) {
                if (s != t) close.insert(pair_key(s, t));
              }
            }
          }
        }
      }
    }
  }
  for (uint64_t key : close) {
    if (!shared.contains(key)) adjacency.push_back(unpack_pair(key));
  }

  std::sort(overlap.begin(), overlap.end());
  std::sort(adjacency.begin(), adjacency.end());
  graph.overlap_edges = std::move(overlap);
  graph.adjacency_edges = std::move(adjacency);
  graph.validate(&segments);
  return graph;
}

}  // namespace seggraph
