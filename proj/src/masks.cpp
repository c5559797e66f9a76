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

#include "seggraph/masks.hpp"

#include "seggraph/errors.hpp"

#include <map>
#include <unordered_map>

namespace seggraph {

namespace {

struct WordsHash {
  std::size_t operator()(const std::vector<uint64_t>& words) const noexcept {
    std::size_t h = 0xcbf29ce484222325ULL;
    for (uint64_t w : words) {
      h ^= std::hash<uint64_t>{}(w) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    }
    return h;
  }
};

template <typename T>
const T& find_view(std::span<const T> items, int view_id, const char* what) {
  for (const T& item : items) {
    if (item.view_id == view_id) return item;
  }
  throw ConfigError(std::string("no ") + what + " for view " + std::to_string(view_id));
}

}  // namespace

void SegmentSet::rebuild(const PointCloud& cloud) {
  point_memberships.assign(cloud.size(), {});
  for (std::size_t s = 0; s < segments.size(); ++s) {
    Segment& seg = segments[s];
    seg.segment_id = static_cast<int>(s);
    Vec3 sum = Vec3::Zero();
    for (uint32_t id : seg.point_ids) {
      if (id >= cloud.size()) throw ShapeError("segment references point beyond cloud size");
      sum += cloud.positions[id];
      point_memberships[id].push_back(static_cast<uint32_t>(s));
    }
    if (!seg.point_ids.empty()) sum /= static_cast<double>(seg.point_ids.size());
    seg.centroid = sum;
  }
}

RegionImage decompose_view_masks(const MaskStack& stack, int min_pixels) {
  if (stack.masks.empty()) throw ContractError("decompose_view_masks needs at least one mask");
  const std::size_t pixels =
      static_cast<std::size_t>(stack.resolution.width) * stack.resolution.height;
  for (const auto& mask : stack.masks) {
    if (mask.size() != pixels) throw ShapeError("mask size does not match view resolution");
  }
  const std::size_t words = (stack.masks.size() + 63) / 64;

  RegionImage out;
  out.view_id = stack.view_id;
  out.resolution = stack.resolution;
  out.region_of_pixel.assign(pixels, -1);

  std::unordered_map<std::vector<uint64_t>, int32_t, WordsHash> ids;
  std::vector<std::size_t> area;
  std::vector<uint64_t> key(words);
  for (std::size_t pix = 0; pix < pixels; ++pix) {
    std::fill(key.begin(), key.end(), 0);
    bool covered = false;
    for (std::size_t m = 0; m < stack.masks.size(); ++m) {
      if (stack.masks[m][pix]) {
        key[m / 64] |= uint64_t{1} << (m % 64);
        covered = true;
      }
    }
    if (!covered) continue;
    auto [it, inserted] = ids.try_emplace(key, static_cast<int32_t>(area.size()));
    if (inserted) area.push_back(0);
    ++area[it->second];
    out.region_of_pixel[pix] = it->second;
  }

  // Drop small regions and renumber; first-appearance order is preserved.
  std::vector<int32_t> remap(area.size(), -1);
  int32_t next = 0;
  for (std::size_t r = 0; r < area.size(); ++r) {
    if (area[r] >= static_cast<std::size_t>(std::max(min_pixels, 0))) remap[r] = next++;
  }
  for (int32_t& r : out.region_of_pixel) {
    if (r >= 0) r = remap[r];
  }
  out.region_count = next;
  return out;
}

SegmentSet lift_segments(std::span<const RegionImage> regions, std::span<const VisibilityMap> vis,
                         std::span<const CameraView> cameras, const PointCloud& cloud,
                         int min_points) {
  if (regions.size() != vis.size()) {
    throw ConfigError("lift_segments: " + std::to_string(regions.size()) + " region images vs " +
                      std::to_string(vis.size()) + " visibility maps");
  }
  SegmentSet set;
  for (const RegionImage& region : regions) {
    const VisibilityMap& map = find_view(vis, region.view_id, "visibility map");
    const CameraView& camera = find_view(cameras, region.view_id, "camera");
    if (!(map.resolution == region.resolution)) {
      throw ConfigError("region image and visibility map resolutions differ for view " +
                        std::to_string(region.view_id));
    }
    if (map.point_proj.size() != cloud.size()) {
      throw ConfigError("visibility map does not match the point cloud");
    }
    std::vector<std::vector<uint32_t>> buckets(region.region_count);
    for (std::size_t j = 0; j < cloud.size(); ++j) {
      const PointProjection& pp = map.point_proj[j];
      if (!pp.visible) continue;
      const auto pixel = pixel_of(pp, map.resolution);
      if (!pixel) continue;
      const int32_t r =
          region.region_of_pixel[static_cast<std::size_t>(pixel->first) * region.resolution.width +
                                 pixel->second];
      if (r >= 0) buckets[r].push_back(static_cast<uint32_t>(j));
    }
    for (auto& bucket : buckets) {
      if (bucket.size() < static_cast<std::size_t>(std::max(min_points, 1))) continue;
      Segment seg;
      seg.view_id = region.view_id;
      seg.camera_position = camera.position;
      seg.point_ids = std::move(bucket);
      set.segments.push_back(std::move(seg));
    }
  }
  set.rebuild(cloud);
  return set;
}

}  // namespace seggraph
