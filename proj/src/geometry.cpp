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

#include "seggraph/geometry.hpp"

#include "seggraph/errors.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <limits>
#include <numbers>

namespace seggraph {

namespace {

constexpr double kNormalTolerance = 1e-4;
constexpr double kNearPlane = 1e-9;

std::pair<Vec3, Vec3> bounding_box(std::span<const Vec3> points) {
  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 hi = -lo;
  for (const Vec3& p : points) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  return {lo, hi};
}

}  // namespace

void PointCloud::validate(bool normalized) const {
  const std::size_t n = positions.size();
  if (n == 0) throw DegenerateInputError("point cloud is empty");
  if (normals.size() != n) {
    throw ShapeError("normals count " + std::to_string(normals.size()) +
                     " != positions count " + std::to_string(n));
  }
  if (!colors.empty() && colors.size() != n) throw ShapeError("colors count mismatch");
  if (!labels.empty() && labels.size() != n) throw ShapeError("labels count mismatch");
  for (std::size_t i = 0; i < n; ++i) {
    if (!positions[i].allFinite()) throw DegenerateInputError("non-finite position");
    if (std::abs(normals[i].norm() - 1.0) > kNormalTolerance) {
      throw DegenerateInputError("normal " + std::to_string(i) + " is not unit length");
    }
  }
  for (int32_t label : labels) {
    if (label < kIgnoreLabel || (num_classes > 0 && label >= num_classes)) {
      throw ShapeError("label " + std::to_string(label) + " outside [-1, " +
                       std::to_string(num_classes) + ")");
    }
  }
  if (normalized) {
    auto [lo, hi] = bounding_box(positions);
    // Positions may have round-tripped through 32-bit storage.
    if (std::abs((hi - lo).norm() - 1.0) > 1e-5 || (0.5 * (hi + lo)).norm() > 1e-5) {
      throw ShapeError("point cloud is not normalized");
    }
  }
}

PointCloud normalize_cloud(std::span<const Vec3> raw_positions, std::span<const Vec3> normals,
                           std::span<const Vec3> colors, std::span<const int32_t> labels,
                           std::string category, int num_classes) {
  const std::size_t n = raw_positions.size();
  if (n == 0) throw DegenerateInputError("normalize_cloud needs at least one point");
  if (normals.size() != n) throw ShapeError("normals count does not match positions");

  auto [lo, hi] = bounding_box(raw_positions);
  const double diagonal = (hi - lo).norm();
  if (!(diagonal > 0.0) || !std::isfinite(diagonal)) {
    throw DegenerateInputError("all points coincide; bounding-box diagonal is zero");
  }
  const Vec3 center = 0.5 * (lo + hi);
  const double scale = 1.0 / diagonal;

  PointCloud cloud;
  cloud.positions.reserve(n);
  cloud.normals.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    cloud.positions.push_back((raw_positions[i] - center) * scale);
    const double len = normals[i].norm();
    if (!std::isfinite(len) || len == 0.0) {
      throw DegenerateInputError("normal " + std::to_string(i) + " is zero or non-finite");
    }
    cloud.normals.push_back(normals[i] / len);
  }
  cloud.colors.assign(colors.begin(), colors.end());
  cloud.labels.assign(labels.begin(), labels.end());
  cloud.category = std::move(category);
  cloud.num_classes = num_classes;
  cloud.validate(false);
  return cloud;
}

void CameraView::validate() const {
  if (resolution.width <= 0 || resolution.height <= 0) {
    throw ConfigError("camera resolution must be positive");
  }
  const Vec3 dir = look_at - position;
  if (dir.norm() == 0.0) throw ConfigError("camera position equals look_at");
  if (dir.normalized().cross(up).norm() < 1e-12) {
    throw ConfigError("camera up vector is parallel to the view direction");
  }
  if (!(focal > 0.0)) throw ConfigError("camera focal length must be positive");
}

Eigen::Matrix3d CameraView::rotation() const {
  const Vec3 forward = (look_at - position).normalized();
  const Vec3 right = forward.cross(up).normalized();
  const Vec3 down = forward.cross(right);
  Eigen::Matrix3d r;
  r.row(0) = right.transpose();
  r.row(1) = down.transpose();
  r.row(2) = forward.transpose();
  return r;
}

Vec3 choose_up_vector(const Vec3& view_direction) {
  const Vec3 dir = view_direction.normalized();
  if (1.0 - std::abs(dir.y()) < 1e-3) return Vec3::UnitX();
  return Vec3::UnitY();
}

std::vector<CameraView> make_cameras(int num_views, double radius, Resolution resolution) {
  if (num_views < 1) throw ConfigError("make_cameras needs at least one view");
  if (!(radius > 0.5)) throw ConfigError("camera radius must exceed the cloud bounding radius 0.5");
  const double golden_angle = std::numbers::pi * (3.0 - std::sqrt(5.0));
  // Half field of view framing a radius-0.5 sphere with a 10% margin.
  const double tan_half_fov = 1.1 * 0.5 / (radius - 0.5);
  const double focal = 0.5 * std::min(resolution.width, resolution.height) / tan_half_fov;

  std::vector<CameraView> cameras;
  cameras.reserve(num_views);
  for (int i = 0; i < num_views; ++i) {
    const double z = num_views == 1 ? 1.0 : 1.0 - 2.0 * i / (num_views - 1);
    const double ring = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = golden_angle * i;
    CameraView cam;
    cam.view_id = i;
    cam.position = radius * Vec3(ring * std::cos(phi), ring * std::sin(phi), z);
    cam.look_at = Vec3::Zero();
    cam.up = choose_up_vector(cam.look_at - cam.position);
    cam.focal = focal;
    cam.principal_point = Vec2(0.5 * (resolution.width - 1), 0.5 * (resolution.height - 1));
    cam.resolution = resolution;
    cameras.push_back(cam);
  }
  return cameras;
}

Projection project_point(const CameraView& camera, const Vec3& p) {
  if (!p.allFinite()) throw ProjectionError("cannot project a non-finite point");
  const Vec3 cam = camera.rotation() * (p - camera.position);
  if (cam.z() == 0.0) throw ProjectionError("point lies in the camera center plane");
  return {camera.principal_point.x() + camera.focal * cam.x() / cam.z(),
          camera.principal_point.y() + camera.focal * cam.y() / cam.z(), cam.z()};
}

std::optional<std::pair<int, int>> pixel_of(const PointProjection& proj, Resolution res) {
  if (!(proj.depth > kNearPlane)) return std::nullopt;
  const double col = std::floor(proj.u + 0.5);
  const double row = std::floor(proj.v + 0.5);
  if (col < 0 || row < 0 || col >= res.width || row >= res.height) return std::nullopt;
  return std::pair<int, int>{static_cast<int>(row), static_cast<int>(col)};
}

std::size_t VisibilityMap::visible_count() const {
  return static_cast<std::size_t>(std::count_if(point_proj.begin(), point_proj.end(),
                                                [](const PointProjection& p) { return p.visible; }));
}

VisibilityMap rasterize_visibility(const PointCloud& cloud, const CameraView& camera, int splat,
                                   double depth_epsilon) {
  camera.validate();
  if (splat < 1) throw ConfigError("splat size must be at least one pixel");
  const int width = camera.resolution.width;
  const int height = camera.resolution.height;
  const Eigen::Matrix3d rot = camera.rotation();

  VisibilityMap map;
  map.view_id = camera.view_id;
  map.resolution = camera.resolution;
  map.point_proj.resize(cloud.size());
  map.pixel_owner.assign(static_cast<std::size_t>(width) * height, -1);

  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> zbuffer(map.pixel_owner.size(), inf);
  std::vector<char> in_frustum(cloud.size(), 0);

  auto for_footprint = [&](const PointProjection& pp, auto&& fn) {
    const int c0 = splat_origin(pp.u, splat);
    const int r0 = splat_origin(pp.v, splat);
    for (int r = std::max(r0, 0); r < std::min(r0 + splat, height); ++r) {
      for (int c = std::max(c0, 0); c < std::min(c0 + splat, width); ++c) {
        fn(static_cast<std::size_t>(r) * width + c);
      }
    }
  };

  for (std::size_t j = 0; j < cloud.size(); ++j) {
    const Vec3 cam = rot * (cloud.positions[j] - camera.position);
    PointProjection& pp = map.point_proj[j];
    pp.depth = cam.z();
    if (cam.z() > kNearPlane) {
      pp.u = camera.principal_point.x() + camera.focal * cam.x() / cam.z();
      pp.v = camera.principal_point.y() + camera.focal * cam.y() / cam.z();
    } else {
      pp.u = pp.v = std::numeric_limits<double>::quiet_NaN();
    }
    if (!pixel_of(pp, map.resolution)) continue;
    in_frustum[j] = 1;
    for_footprint(pp, [&](std::size_t pix) { zbuffer[pix] = std::min(zbuffer[pix], pp.depth); });
  }

  std::vector<double> owner_depth(map.pixel_owner.size(), inf);
  for (std::size_t j = 0; j < cloud.size(); ++j) {
    if (!in_frustum[j]) continue;
    PointProjection& pp = map.point_proj[j];
    double nearest = inf;
    for_footprint(pp, [&](std::size_t pix) { nearest = std::min(nearest, zbuffer[pix]); });
    pp.visible = pp.depth <= nearest + depth_epsilon;
    if (!pp.visible) continue;
    for_footprint(pp, [&](std::size_t pix) {
      // Strict comparison keeps the lowest id on ties.
      if (pp.depth < owner_depth[pix]) {
        owner_depth[pix] = pp.depth;
        map.pixel_owner[pix] = static_cast<int32_t>(j);
      }
    });
  }
  return map;
}

}  // namespace seggraph
