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

#include "seggraph/synth.hpp"

#include "seggraph/errors.hpp"
#include "seggraph/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

namespace seggraph {

void SynthConfig::validate() const {
  auto prob = [](double p, const char* name) {
    if (!(p >= 0.0 && p <= 1.0)) throw ConfigError(std::string(name) + " must be in [0, 1]");
  };
  prob(split_rate, "split_rate");
  prob(merge_rate, "merge_rate");
  if (points_per_shape < 100) throw ConfigError("points_per_shape must be at least 100");
  if (parts_per_shape < 1 || parts_per_shape > kMaxSynthParts) {
    throw ConfigError("parts_per_shape must be in [1, " + std::to_string(kMaxSynthParts) + "]");
  }
  if (num_shapes < 0 || train_shapes < 0) throw ConfigError("shape counts must be non-negative");
  if (!(feature_noise >= 0.0)) throw ConfigError("feature_noise must be non-negative");
  if (input_channels <= 0 || num_views <= 0 || patch_size <= 0) {
    throw ConfigError("channels, views and patch size must be positive");
  }
  if (resolution.width <= 0 || resolution.height <= 0) throw ConfigError("invalid resolution");
  if (!(camera_radius > 0.5)) throw ConfigError("camera radius must exceed the cloud radius");
}

const std::vector<std::string>& synth_class_names() {
  static const std::vector<std::string> names = {"body", "lid", "handle", "button"};
  return names;
}

std::mt19937_64 synth_stream(uint64_t seed, uint64_t index, uint64_t tag) {
  std::seed_seq seq{static_cast<uint32_t>(seed), static_cast<uint32_t>(seed >> 32),
                    static_cast<uint32_t>(index), static_cast<uint32_t>(index >> 32),
                    static_cast<uint32_t>(tag)};
  return std::mt19937_64(seq);
}

double SynthPart::area() const {
  switch (kind) {
    case PrimitiveKind::kBox: {
      const Vec3& h = half_extent;
      return 8.0 * (h.x() * h.y() + h.y() * h.z() + h.x() * h.z());
    }
    case PrimitiveKind::kCylinder:
      return 4.0 * std::numbers::pi * radius * half_height +
             2.0 * std::numbers::pi * radius * radius;
    case PrimitiveKind::kSphere:
      return 4.0 * std::numbers::pi * radius * radius;
  }
  return 0.0;
}

Vec3 SynthPart::normal_at(const Vec3& p) const {
  const Vec3 d = p - center;
  switch (kind) {
    case PrimitiveKind::kBox: {
      int k = 0;
      double best = -1.0;
      for (int i = 0; i < 3; ++i) {
        const double r = std::abs(d[i]) / half_extent[i];
        if (r > best) {
          best = r;
          k = i;
        }
      }
      Vec3 n = Vec3::Zero();
      n[k] = d[k] >= 0 ? 1.0 : -1.0;
      return n;
    }
    case PrimitiveKind::kCylinder: {
      Vec3 radial = d;
      radial[axis] = 0.0;
      if (std::abs(d[axis]) / half_height > radial.norm() / radius) {
        Vec3 n = Vec3::Zero();
        n[axis] = d[axis] >= 0 ? 1.0 : -1.0;
        return n;
      }
      return radial.normalized();
    }
    case PrimitiveKind::kSphere:
      return d.normalized();
  }
  return Vec3::UnitY();
}

namespace {

bool inside(const SynthPart& part, const Vec3& p) {
  const Vec3 d = p - part.center;
  constexpr double margin = 1e-9;
  switch (part.kind) {
    case PrimitiveKind::kBox:
      return (d.cwiseAbs() - part.half_extent).maxCoeff() < -margin;
    case PrimitiveKind::kCylinder: {
      Vec3 radial = d;
      radial[part.axis] = 0.0;
      return radial.norm() < part.radius - margin &&
             std::abs(d[part.axis]) < part.half_height - margin;
    }
    case PrimitiveKind::kSphere:
      return d.norm() < part.radius - margin;
  }
  return false;
}

Vec3 sample_surface(const SynthPart& part, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double pi = std::numbers::pi;
  switch (part.kind) {
    case PrimitiveKind::kBox: {
      const Vec3& h = part.half_extent;
      const double areas[3] = {h.y() * h.z(), h.x() * h.z(), h.x() * h.y()};
      double pick = unit(rng) * (areas[0] + areas[1] + areas[2]);
      int k = 0;
      while (k < 2 && pick >= areas[k]) pick -= areas[k++];
      Vec3 d;
      for (int i = 0; i < 3; ++i) d[i] = (2.0 * unit(rng) - 1.0) * h[i];
      d[k] = unit(rng) < 0.5 ? -h[k] : h[k];
      return part.center + d;
    }
    case PrimitiveKind::kCylinder: {
      const int a = part.axis;
      const int b = (a + 1) % 3;
      const int c = (a + 2) % 3;
      const double side = 4.0 * pi * part.radius * part.half_height;
      const double cap = pi * part.radius * part.radius;
      const double pick = unit(rng) * (side + 2.0 * cap);
      Vec3 d = Vec3::Zero();
      const double theta = 2.0 * pi * unit(rng);
      if (pick < side) {
        d[a] = (2.0 * unit(rng) - 1.0) * part.half_height;
        d[b] = part.radius * std::cos(theta);
        d[c] = part.radius * std::sin(theta);
      } else {
        const double r = part.radius * std::sqrt(unit(rng));
        d[a] = pick < side + cap ? part.half_height : -part.half_height;
        d[b] = r * std::cos(theta);
        d[c] = r * std::sin(theta);
      }
      return part.center + d;
    }
    case PrimitiveKind::kSphere: {
      std::normal_distribution<double> normal(0.0, 1.0);
      Vec3 d;
      do {
        d = Vec3(normal(rng), normal(rng), normal(rng));
      } while (d.norm() < 1e-12);
      return part.center + part.radius * d.normalized();
    }
  }
  return part.center;
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

/// Half extent of the body along horizontal direction `side` at height y.
double body_reach(const SynthPart& body, int axis, double y) {
  switch (body.kind) {
    case PrimitiveKind::kBox:
      return body.half_extent[axis];
    case PrimitiveKind::kCylinder:
      return body.radius;
    case PrimitiveKind::kSphere:
      return std::sqrt(std::max(0.0, body.radius * body.radius - y * y));
  }
  return 0.0;
}

std::vector<SynthPart> layout_parts(const SynthConfig& config, std::mt19937_64& rng) {
  std::vector<SynthPart> parts;
  SynthPart body;
  body.label = 0;
  body.kind = static_cast<PrimitiveKind>(std::uniform_int_distribution<int>(0, 2)(rng));
  Vec3 extent = Vec3::Zero();
  switch (body.kind) {
    case PrimitiveKind::kBox:
      body.half_extent = Vec3(uniform(rng, 0.25, 0.45), uniform(rng, 0.25, 0.45),
                              uniform(rng, 0.25, 0.45));
      extent = body.half_extent;
      break;
    case PrimitiveKind::kCylinder:
      body.axis = 1;
      body.radius = uniform(rng, 0.25, 0.4);
      body.half_height = uniform(rng, 0.25, 0.45);
      extent = Vec3(body.radius, body.half_height, body.radius);
      break;
    case PrimitiveKind::kSphere:
      body.radius = uniform(rng, 0.3, 0.45);
      extent = Vec3::Constant(body.radius);
      break;
  }
  parts.push_back(body);

  if (config.parts_per_shape >= 2) {
    SynthPart lid;
    lid.label = 1;
    const double t = uniform(rng, 0.05, 0.09);
    const double top = body.kind == PrimitiveKind::kSphere ? 0.8 * extent.y() : extent.y();
    if (uniform(rng, 0.0, 1.0) < 0.5) {
      lid.kind = PrimitiveKind::kBox;
      lid.half_extent = Vec3(extent.x() * uniform(rng, 0.6, 0.95), t,
                             extent.z() * uniform(rng, 0.6, 0.95));
    } else {
      lid.kind = PrimitiveKind::kCylinder;
      lid.axis = 1;
      lid.radius = std::min(extent.x(), extent.z()) * uniform(rng, 0.6, 0.95);
      lid.half_height = t;
    }
    lid.center = Vec3(0.0, top + 0.8 * t, 0.0);
    parts.push_back(lid);
  }

  // Horizontal sides: +x, -x, +z, -z.
  const int first_side = std::uniform_int_distribution<int>(0, 3)(rng);
  const int second_side = (first_side + std::uniform_int_distribution<int>(1, 3)(rng)) % 4;
  auto side_axis = [](int side) { return side < 2 ? 0 : 2; };
  auto side_sign = [](int side) { return side % 2 == 0 ? 1.0 : -1.0; };

  if (config.parts_per_shape >= 3) {
    SynthPart handle;
    handle.label = 2;
    handle.kind = PrimitiveKind::kBox;
    const int a = side_axis(first_side);
    const double y = uniform(rng, -0.3, 0.3) * extent.y();
    Vec3 h;
    h[a] = 0.06 * uniform(rng, 0.8, 1.2);
    h[1] = 0.12 * uniform(rng, 0.8, 1.2);
    h[2 - a] = 0.035 * uniform(rng, 0.8, 1.2);
    handle.half_extent = h;
    handle.center = Vec3::Zero();
    handle.center[1] = y;
    handle.center[a] = side_sign(first_side) * (body_reach(body, a, y) + 0.6 * h[a]);
    parts.push_back(handle);
  }

  if (config.parts_per_shape >= 4) {
    SynthPart button;
    button.label = 3;
    button.kind = PrimitiveKind::kSphere;
    button.radius = uniform(rng, 0.04, 0.06);
    const int a = side_axis(second_side);
    const double y = uniform(rng, -0.3, 0.3) * extent.y();
    button.center = Vec3::Zero();
    button.center[1] = y;
    button.center[a] = side_sign(second_side) * (body_reach(body, a, y) + 0.5 * button.radius);
    parts.push_back(button);
  }
  return parts;
}

}  // namespace

SynthShape generate_shape(const SynthConfig& config, int index) {
  config.validate();
  std::mt19937_64 rng = synth_stream(config.seed, static_cast<uint64_t>(index), 1);
  SynthShape shape;
  shape.name = config.category + "_" + std::to_string(index);
  shape.parts = layout_parts(config, rng);

  const std::size_t n = static_cast<std::size_t>(config.points_per_shape);
  std::size_t assigned = 0;
  for (std::size_t i = 1; i < shape.parts.size(); ++i) {
    const double fraction = shape.parts[i].label == 1 ? uniform(rng, 0.15, 0.25)
                                                      : uniform(rng, 0.022, 0.035);
    shape.parts[i].points = static_cast<std::size_t>(std::lround(fraction * n));
    assigned += shape.parts[i].points;
  }
  shape.parts[0].points = n - assigned;

  std::vector<Vec3> normals;
  std::vector<int32_t> labels;
  for (std::size_t pi = 0; pi < shape.parts.size(); ++pi) {
    const SynthPart& part = shape.parts[pi];
    const std::size_t max_tries = 1000 * std::max<std::size_t>(part.points, 1);
    std::size_t made = 0, tries = 0;
    while (made < part.points) {
      const Vec3 p = sample_surface(part, rng);
      ++tries;
      bool covered = false;
      for (std::size_t q = 0; q < shape.parts.size() && tries < max_tries; ++q) {
        covered = covered || (q != pi && inside(shape.parts[q], p));
      }
      if (covered) continue;
      shape.raw_positions.push_back(p);
      normals.push_back(part.normal_at(p));
      labels.push_back(part.label);
      shape.part_of_point.push_back(static_cast<int>(pi));
      ++made;
    }
  }

  PointCloud cloud = normalize_cloud(shape.raw_positions, normals, {}, labels, config.category,
                                     config.parts_per_shape);
  for (std::size_t j = 0; j < cloud.size(); ++j) {
    cloud.positions[j] = cloud.positions[j].cast<float>().cast<double>();
    cloud.normals[j] = cloud.normals[j].cast<float>().cast<double>();
  }
  shape.cloud = std::move(cloud);
  return shape;
}

std::vector<MaskStack> generate_views_and_masks(const PointCloud& cloud,
                                                std::span<const CameraView> cameras,
                                                std::span<const VisibilityMap> vis,
                                                const SynthConfig& config, int index,
                                                std::vector<MergeEvent>* merge_log) {
  if (cameras.size() != vis.size()) throw ConfigError("cameras and visibility maps differ");
  if (!cloud.has_labels()) throw ConfigError("mask synthesis needs part labels");
  std::mt19937_64 rng = synth_stream(config.seed, static_cast<uint64_t>(index), 2);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int k = std::max(cloud.num_classes, 1);
  std::vector<MaskStack> stacks;
  stacks.reserve(vis.size());
  for (std::size_t v = 0; v < vis.size(); ++v) {
    const VisibilityMap& map = vis[v];
    const CameraView& cam = cameras[v];
    if (cam.view_id != map.view_id) throw ConfigError("camera and visibility view ids differ");
    const int w = map.resolution.width;
    const int h = map.resolution.height;
    std::vector<int> label_image(static_cast<std::size_t>(w) * h, -1);
    for (std::size_t p = 0; p < label_image.size(); ++p) {
      const int32_t owner = map.pixel_owner[p];
      if (owner >= 0) label_image[p] = cloud.labels[owner];
    }

    std::vector<double> quality_sum(k, 0.0);
    std::vector<std::size_t> quality_n(k, 0);
    for (std::size_t j = 0; j < cloud.size(); ++j) {
      if (!map.point_proj[j].visible || cloud.labels[j] < 0) continue;
      quality_sum[cloud.labels[j]] += view_quality(cloud.normals[j], cloud.positions[j], cam.position);
      ++quality_n[cloud.labels[j]];
    }
    std::set<std::pair<int, int>> neighbors;
    for (int r = 0; r < h; ++r) {
      for (int c = 0; c < w; ++c) {
        const int a = label_image[static_cast<std::size_t>(r) * w + c];
        if (a < 0) continue;
        for (int d = 1; d <= 2; ++d) {
          const int right = c + d < w ? label_image[static_cast<std::size_t>(r) * w + c + d] : -1;
          const int down = r + d < h ? label_image[static_cast<std::size_t>(r + d) * w + c] : -1;
          for (int b : {right, down}) {
            if (b >= 0 && b != a) neighbors.insert({std::min(a, b), std::max(a, b)});
          }
        }
      }
    }

    std::vector<int> group(k);
    for (int l = 0; l < k; ++l) group[l] = l;
    auto find = [&](int x) {
      while (group[x] != x) x = group[x] = group[group[x]];
      return x;
    };
    for (const auto& [a, b] : neighbors) {
      const double qa = quality_n[a] ? quality_sum[a] / quality_n[a] : 0.0;
      const double qb = quality_n[b] ? quality_sum[b] / quality_n[b] : 0.0;
      MergeEvent event{cam.view_id, a, b, config.merge_rate * (1.0 - 0.5 * (qa + qb)), unit(rng),
                       false};
      event.merged = event.draw < event.probability;
      if (event.merged) {
        const int ra = find(a), rb = find(b);
        group[std::max(ra, rb)] = std::min(ra, rb);
      }
      if (merge_log != nullptr) merge_log->push_back(event);
    }

    MaskStack stack;
    stack.view_id = cam.view_id;
    stack.resolution = map.resolution;
    for (int root = 0; root < k; ++root) {
      std::vector<uint8_t> mask(label_image.size(), 0);
      std::size_t count = 0;
      double cr = 0.0, cc = 0.0;
      for (std::size_t p = 0; p < label_image.size(); ++p) {
        if (label_image[p] >= 0 && find(label_image[p]) == root) {
          mask[p] = 1;
          ++count;
          cr += static_cast<double>(p / w);
          cc += static_cast<double>(p % w);
        }
      }
      if (count == 0) continue;
      const double split_draw = unit(rng);
      const double theta = unit(rng) * std::numbers::pi;
      if (split_draw < config.split_rate) {
        cr /= static_cast<double>(count);
        cc /= static_cast<double>(count);
        std::vector<uint8_t> other(mask.size(), 0);
        std::size_t moved = 0;
        for (std::size_t p = 0; p < mask.size(); ++p) {
          if (!mask[p]) continue;
          const double side = (static_cast<double>(p % w) - cc) * std::cos(theta) +
                              (static_cast<double>(p / w) - cr) * std::sin(theta);
          if (side < 0.0) {
            other[p] = 1;
            ++moved;
          }
        }
        if (moved > 0 && moved < count) {
          for (std::size_t p = 0; p < mask.size(); ++p) mask[p] &= static_cast<uint8_t>(!other[p]);
          stack.masks.push_back(std::move(mask));
          stack.masks.push_back(std::move(other));
          continue;
        }
      }
      stack.masks.push_back(std::move(mask));
    }
    stacks.push_back(std::move(stack));
  }
  return stacks;
}

std::vector<std::vector<double>> class_prototypes(const SynthConfig& config) {
  std::mt19937_64 rng = synth_stream(config.seed, ~uint64_t{0}, 4);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> base(config.input_channels);
  for (double& x : base) x = normal(rng);
  std::vector<std::vector<double>> protos(kMaxSynthParts, base);
  for (auto& proto : protos) {
    for (double& x : proto) x += config.prototype_separation * normal(rng);
  }
  return protos;
}

std::vector<PatchFeatureGrid> generate_features(const PointCloud& cloud,
                                                std::span<const VisibilityMap> vis,
                                                const SynthConfig& config, int index) {
  if (!cloud.has_labels()) throw ConfigError("feature synthesis needs part labels");
  const auto protos = class_prototypes(config);
  std::mt19937_64 rng = synth_stream(config.seed, static_cast<uint64_t>(index), 3);
  std::normal_distribution<double> noise(0.0, 1.0);
  const int c = config.input_channels;
  const int patch = config.patch_size;
  std::vector<PatchFeatureGrid> grids;
  grids.reserve(vis.size());
  for (const VisibilityMap& map : vis) {
    PatchFeatureGrid grid;
    grid.view_id = map.view_id;
    grid.patch_size = patch;
    grid.channels = c;
    grid.rows = (map.resolution.height + patch - 1) / patch;
    grid.cols = (map.resolution.width + patch - 1) / patch;
    grid.data.assign(static_cast<std::size_t>(grid.rows) * grid.cols * c, 0.0f);
    std::vector<double> mix(c);
    for (int pr = 0; pr < grid.rows; ++pr) {
      for (int pc = 0; pc < grid.cols; ++pc) {
        std::vector<std::size_t> counts(kMaxSynthParts, 0);
        std::size_t total = 0;
        for (int r = pr * patch; r < std::min((pr + 1) * patch, map.resolution.height); ++r) {
          for (int col = pc * patch; col < std::min((pc + 1) * patch, map.resolution.width);
               ++col) {
            const int32_t owner = map.owner(r, col);
            if (owner < 0 || cloud.labels[owner] < 0) continue;
            ++counts[cloud.labels[owner]];
            ++total;
          }
        }
        std::fill(mix.begin(), mix.end(), 0.0);
        for (int l = 0; l < kMaxSynthParts && total > 0; ++l) {
          if (counts[l] == 0) continue;
          const double wgt = static_cast<double>(counts[l]) / static_cast<double>(total);
          for (int ch = 0; ch < c; ++ch) mix[ch] += wgt * protos[l][ch];
        }
        float* out = grid.at(pr, pc);
        for (int ch = 0; ch < c; ++ch) {
          out[ch] = static_cast<float>(mix[ch] + config.feature_noise * noise(rng));
        }
      }
    }
    grids.push_back(std::move(grid));
  }
  return grids;
}

}  // namespace seggraph
