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

#include "seggraph/errors.hpp"
#include "seggraph/pipeline.hpp"
#include "seggraph/synth.hpp"

#include <doctest.h>

#include <Eigen/Geometry>

#include <set>

using namespace seggraph;

namespace {

SynthConfig clean_config(uint64_t seed = 0) {
  SynthConfig c;
  c.seed = seed;
  c.num_shapes = 4;
  c.points_per_shape = 800;
  c.split_rate = 0.0;
  c.merge_rate = 0.0;
  return c;
}

std::vector<VisibilityMap> render(const PointCloud& cloud, const SynthConfig& c) {
  std::vector<VisibilityMap> vis;
  for (const CameraView& cam : make_cameras(c.num_views, c.camera_radius, c.resolution)) {
    vis.push_back(rasterize_visibility(cloud, cam));
  }
  return vis;
}

// Surface normal from the primitive's defining equation.
Vec3 analytic_normal(const SynthPart& part, const Vec3& p) {
  const Vec3 d = p - part.center;
  switch (part.kind) {
    case PrimitiveKind::kSphere:
      return d.normalized();
    case PrimitiveKind::kCylinder: {
      Vec3 radial = d;
      radial[part.axis] = 0.0;
      const double side_gap = std::abs(radial.norm() - part.radius);
      const double cap_gap = std::abs(std::abs(d[part.axis]) - part.half_height);
      if (side_gap <= cap_gap) return radial.normalized();
      Vec3 n = Vec3::Zero();
      n[part.axis] = d[part.axis] > 0 ? 1.0 : -1.0;
      return n;
    }
    case PrimitiveKind::kBox: {
      int face = 0;
      double best = std::numeric_limits<double>::infinity();
      for (int a = 0; a < 3; ++a) {
        const double gap = std::abs(std::abs(d[a]) - part.half_extent[a]);
        if (gap < best) {
          best = gap;
          face = a;
        }
      }
      Vec3 n = Vec3::Zero();
      n[face] = d[face] > 0 ? 1.0 : -1.0;
      return n;
    }
  }
  return Vec3::Zero();
}

}  // namespace

TEST_SUITE("synth") {

TEST_CASE("config validation") {
  SynthConfig c;
  c.split_rate = 1.5;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = SynthConfig{};
  c.points_per_shape = 50;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = SynthConfig{};
  c.parts_per_shape = kMaxSynthParts + 1;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("a single part gives a single-label cloud") {
  SynthConfig c = clean_config();
  c.parts_per_shape = 1;
  const SynthShape s = generate_shape(c, 0);
  CHECK(s.cloud.size() == 800);
  CHECK(std::set<int32_t>(s.cloud.labels.begin(), s.cloud.labels.end()) == std::set<int32_t>{0});
}

TEST_CASE("generation is deterministic per seed and index") {
  const SynthConfig c = clean_config(5);
  const SynthShape a = generate_shape(c, 2), b = generate_shape(c, 2), other = generate_shape(c, 3);
  CHECK(a.cloud.positions == b.cloud.positions);
  CHECK(a.cloud.normals == b.cloud.normals);
  CHECK(a.cloud.labels == b.cloud.labels);
  CHECK_FALSE(a.cloud.positions == other.cloud.positions);
  CHECK_NOTHROW(a.cloud.validate(true));
}

TEST_CASE("normals match the analytic surface normals") {
  for (int index = 0; index < 4; ++index) {
    const SynthShape s = generate_shape(clean_config(1), index);
    double worst = 0.0;
    for (std::size_t j = 0; j < s.cloud.size(); ++j) {
      const SynthPart& part = s.parts[s.part_of_point[j]];
      const Vec3 want = analytic_normal(part, s.raw_positions[j]);
      const Vec3& got = s.cloud.normals[j];
      worst = std::max(worst, std::atan2(want.cross(got).norm(), want.dot(got)));
    }
    CHECK(worst < 1e-6);
  }
}

TEST_CASE("small attachments stay below five percent") {
  const SynthShape s = generate_shape(clean_config(2), 0);
  std::vector<std::size_t> counts(kMaxSynthParts, 0);
  for (int32_t l : s.cloud.labels) ++counts[l];
  CHECK(counts[2] < 0.05 * s.cloud.size());
  CHECK(counts[3] < 0.05 * s.cloud.size());
  CHECK(counts[2] > 0);
}

TEST_CASE("uncorrupted masks equal per-part visibility") {
  const SynthConfig c = clean_config(3);
  const SynthShape s = generate_shape(c, 0);
  const auto cams = make_cameras(c.num_views, c.camera_radius, c.resolution);
  const auto vis = render(s.cloud, c);
  const auto stacks = generate_views_and_masks(s.cloud, cams, vis, c, 0);
  for (std::size_t v = 0; v < stacks.size(); ++v) {
    std::vector<std::vector<uint8_t>> want;
    for (int l = 0; l < c.parts_per_shape; ++l) {
      std::vector<uint8_t> mask(vis[v].pixel_owner.size(), 0);
      bool any = false;
      for (std::size_t p = 0; p < mask.size(); ++p) {
        const int32_t o = vis[v].pixel_owner[p];
        if (o >= 0 && s.cloud.labels[o] == l) mask[p] = 1, any = true;
      }
      if (any) want.push_back(mask);
    }
    CHECK(stacks[v].masks == want);
  }
}

TEST_CASE("split rate one splits every part with room to split") {
  SynthConfig c = clean_config(4);
  c.split_rate = 1.0;
  const SynthShape s = generate_shape(c, 0);
  const auto cams = make_cameras(c.num_views, c.camera_radius, c.resolution);
  const auto vis = render(s.cloud, c);
  const auto stacks = generate_views_and_masks(s.cloud, cams, vis, c, 0);
  for (std::size_t v = 0; v < stacks.size(); ++v) {
    std::vector<std::size_t> pixels(c.parts_per_shape, 0);
    for (int32_t o : vis[v].pixel_owner) {
      if (o >= 0) ++pixels[s.cloud.labels[o]];
    }
    std::size_t expected = 0;
    for (std::size_t n : pixels) expected += n == 0 ? 0 : (n >= 2 ? 2 : 1);
    CHECK(stacks[v].masks.size() == expected);
  }
}

TEST_CASE("merge events replay from the seed") {
  SynthConfig c = clean_config(6);
  c.merge_rate = 0.9;
  std::vector<MergeEvent> log_a, log_b;
  const RawShape a = synthesize_raw_shape(c, 1, &log_a);
  const RawShape b = synthesize_raw_shape(c, 1, &log_b);
  CHECK_FALSE(log_a.empty());
  CHECK(log_a == log_b);
  for (std::size_t v = 0; v < a.masks.size(); ++v) CHECK(a.masks[v].masks == b.masks[v].masks);
  bool merged = false;
  for (const MergeEvent& e : log_a) {
    CHECK(e.merged == (e.draw < e.probability));
    CHECK(e.probability <= c.merge_rate);
    merged = merged || e.merged;
  }
  CHECK(merged);
}

TEST_CASE("noise-free features equal the prototypes") {
  SynthConfig c = clean_config(7);
  c.parts_per_shape = 1;
  c.feature_noise = 0.0;
  c.input_channels = 8;
  const SynthShape s = generate_shape(c, 0);
  const auto vis = render(s.cloud, c);
  const auto grids = generate_features(s.cloud, vis, c, 0);
  const auto protos = class_prototypes(c);
  std::size_t covered = 0;
  for (std::size_t v = 0; v < grids.size(); ++v) {
    for (int r = 0; r < grids[v].rows; ++r) {
      for (int col = 0; col < grids[v].cols; ++col) {
        bool any = false;
        for (int y = r * 14; y < (r + 1) * 14; ++y) {
          for (int x = col * 14; x < (col + 1) * 14; ++x) any = any || vis[v].owner(y, x) >= 0;
        }
        const float* f = grids[v].at(r, col);
        for (int k = 0; k < 8; ++k) CHECK(f[k] == (any ? static_cast<float>(protos[0][k]) : 0.0f));
        covered += any;
      }
    }
  }
  CHECK(covered > 0);
}

TEST_CASE("a patch split evenly between two parts gets the midpoint") {
  SynthConfig c = clean_config(8);
  c.feature_noise = 0.0;
  c.input_channels = 6;
  PointCloud cloud;
  cloud.positions = {Vec3::Zero(), Vec3::UnitX()};
  cloud.normals.assign(2, Vec3::UnitZ());
  cloud.labels = {0, 1};
  cloud.num_classes = 2;
  VisibilityMap map;
  map.resolution = {14, 14};
  map.pixel_owner.assign(14 * 14, 0);
  for (int r = 0; r < 14; ++r) {
    for (int col = 7; col < 14; ++col) map.pixel_owner[r * 14 + col] = 1;
  }
  const auto grids = generate_features(cloud, std::vector<VisibilityMap>{map}, c, 0);
  const auto protos = class_prototypes(c);
  for (int k = 0; k < 6; ++k) {
    CHECK(grids[0].at(0, 0)[k] == static_cast<float>(0.5 * protos[0][k] + 0.5 * protos[1][k]));
  }
}

TEST_CASE("per-part feature means are within three standard errors of the prototype") {
  SynthConfig c = clean_config(9);
  c.parts_per_shape = 1;
  c.feature_noise = 0.7;
  c.input_channels = 16;
  const SynthShape s = generate_shape(c, 0);
  const auto vis = render(s.cloud, c);
  const auto grids = generate_features(s.cloud, vis, c, 0);
  const auto protos = class_prototypes(c);
  std::vector<double> sum(16, 0.0);
  std::size_t n = 0;
  for (std::size_t v = 0; v < grids.size(); ++v) {
    for (int r = 0; r < grids[v].rows; ++r) {
      for (int col = 0; col < grids[v].cols; ++col) {
        bool any = false;
        for (int y = r * 14; y < (r + 1) * 14; ++y) {
          for (int x = col * 14; x < (col + 1) * 14; ++x) any = any || vis[v].owner(y, x) >= 0;
        }
        if (!any) continue;
        for (int k = 0; k < 16; ++k) sum[k] += grids[v].at(r, col)[k];
        ++n;
      }
    }
  }
  REQUIRE(n > 100);
  for (int k = 0; k < 16; ++k) {
    CHECK(std::abs(sum[k] / n - protos[0][k]) < 3.0 * c.feature_noise / std::sqrt(double(n)));
  }
}

TEST_CASE("corpus synthesis splits train and test") {
  SynthConfig c;
  c.num_shapes = 5;
  c.train_shapes = 2;
  c.points_per_shape = 300;
  c.input_channels = 8;
  const Corpus corpus = synthesize_corpus(c);
  CHECK(corpus.train.size() == 2);
  CHECK(corpus.test.size() == 3);
  CHECK(corpus.num_classes == 4);
  for (const ShapeArtifacts& s : corpus.test) {
    CHECK(s.features.channels == 8);
    CHECK(s.segments.size() > 0);
    CHECK_NOTHROW(s.graph.validate(&s.segments));
  }
}

}  // TEST_SUITE
