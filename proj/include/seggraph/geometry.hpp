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

// Shapes and views: the canonical point cloud, the pinhole camera model and
// z-buffer point splatting used for occlusion culling.

#pragma once

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace seggraph {

using Vec3 = Eigen::Vector3d;
using Vec2 = Eigen::Vector2d;

inline constexpr int kIgnoreLabel = -1;

/// One shape in the normalized space: unit bounding-box diagonal, centered
/// at the origin.
struct PointCloud {
  std::vector<Vec3> positions;
  std::vector<Vec3> normals;
  std::vector<Vec3> colors;   // empty when absent
  std::vector<int32_t> labels;  // empty when absent; kIgnoreLabel allowed
  std::string category;
  int num_classes = 0;

  std::size_t size() const { return positions.size(); }
  bool has_labels() const { return !labels.empty(); }
  bool has_colors() const { return !colors.empty(); }

  /// Throws ShapeError / DegenerateInputError if an invariant is broken.
  /// `normalized` additionally checks unit diagonal and centering.
  void validate(bool normalized = true) const;
};

/// Translates the bounding-box center to the origin and scales uniformly to
/// a unit diagonal. Normals are re-normalized, colors and labels copied.
PointCloud normalize_cloud(std::span<const Vec3> raw_positions,
                           std::span<const Vec3> normals,
                           std::span<const Vec3> colors = {},
                           std::span<const int32_t> labels = {},
                           std::string category = {}, int num_classes = 0);

struct Resolution {
  int width = 518;
  int height = 518;
  bool operator==(const Resolution&) const = default;
};

struct CameraView {
  int view_id = 0;
  Vec3 position = Vec3::Zero();
  Vec3 look_at = Vec3::Zero();
  Vec3 up = Vec3::UnitY();
  double focal = 1.0;
  Vec2 principal_point = Vec2::Zero();
  Resolution resolution;

  void validate() const;
  /// Orthonormal camera frame (right, down, forward) in world coordinates.
  Eigen::Matrix3d rotation() const;
};

inline constexpr double kDefaultCameraRadius = 2.2;
inline constexpr int kDefaultNumViews = 10;

/// Global +y unless the view direction is within 1e-3 of +-y, then +x.
Vec3 choose_up_vector(const Vec3& view_direction);

/// M cameras on a Fibonacci sphere of the given radius, all looking at the
/// origin. The focal length frames a sphere of radius 0.5 (any normalized
/// cloud) with a 10% margin.
std::vector<CameraView> make_cameras(int num_views, double radius = kDefaultCameraRadius,
                                     Resolution resolution = {});

struct Projection {
  double u = 0.0;
  double v = 0.0;
  double depth = 0.0;  // signed distance along the view axis
};

/// Pixel centers sit at integer (u, v); pixel (row, col) = (round(v), round(u)).
Projection project_point(const CameraView& camera, const Vec3& p);

struct PointProjection {
  double u = 0.0;
  double v = 0.0;
  double depth = 0.0;
  bool visible = false;
};

struct VisibilityMap {
  int view_id = 0;
  Resolution resolution;
  std::vector<int32_t> pixel_owner;  // row-major H*W, point id or -1
  std::vector<PointProjection> point_proj;

  int32_t owner(int row, int col) const {
    return pixel_owner[static_cast<std::size_t>(row) * resolution.width + col];
  }
  std::size_t visible_count() const;
};

inline constexpr int kDefaultSplat = 2;
inline constexpr double kDefaultDepthEpsilon = 0.01;

/// First pixel column/row of a splat footprint of `splat` pixels around a
/// continuous coordinate. The footprint always contains round(coord).
inline int splat_origin(double coord, int splat) {
  return static_cast<int>(std::floor(coord + 1.0 - 0.5 * splat));
}

/// Rounded pixel coordinate, or nullopt when outside the image.
std::optional<std::pair<int, int>> pixel_of(const PointProjection& proj, Resolution res);

/// Point splatting z-buffer. A point is visible iff it lies in front of the
/// camera, its rounded pixel is inside the image, and its depth is within
/// `depth_epsilon` of the minimal depth over all points splatting onto any
/// pixel of its footprint. Each pixel is owned by the nearest visible point
/// covering it (lowest id on ties).
VisibilityMap rasterize_visibility(const PointCloud& cloud, const CameraView& camera,
                                   int splat = kDefaultSplat,
                                   double depth_epsilon = kDefaultDepthEpsilon);

}  // namespace seggraph
