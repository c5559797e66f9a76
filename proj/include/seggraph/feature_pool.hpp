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

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace seggraph {

inline constexpr int kDefaultPatchSize = 14;

/// Patch-level image features of one view, row-major rows x cols x channels.
struct PatchFeatureGrid {
  int view_id = 0;
  int rows = 0;
  int cols = 0;
  int channels = 0;
  int patch_size = kDefaultPatchSize;
  std::vector<float> data;

  const float* at(int row, int col) const {
    return data.data() + (static_cast<std::size_t>(row) * cols + col) * channels;
  }
  float* at(int row, int col) {
    return data.data() + (static_cast<std::size_t>(row) * cols + col) * channels;
  }
  /// Throws ShapeError when the grid does not cover `res` at this patch size.
  void validate(Resolution res) const;
};

/// Per-point features averaged over the views where the point is visible.
struct PointFeatureBank {
  std::size_t num_points = 0;
  int channels = 0;
  std::vector<double> features;  // num_points x channels
  std::vector<uint32_t> view_count;

  std::span<const double> row(std::size_t j) const {
    return {features.data() + j * channels, static_cast<std::size_t>(channels)};
  }
};

/// Catmull-Rom (a = -0.5) weights for the four taps around fractional offset t.
std::array<double, 4> catmull_rom_weights(double t);

/// Bicubic sample of the grid at continuous pixel coordinates, written to
/// `out` (size = channels). The patch coordinate is s = (u + 0.5) / patch - 0.5,
/// indices are clamped at the border. Equal to bicubic upsampling of the
/// whole map to pixel resolution followed by a lookup.
void bicubic_sample(const PatchFeatureGrid& grid, double u, double v, std::span<double> out);
std::vector<double> bicubic_sample(const PatchFeatureGrid& grid, double u, double v);

PointFeatureBank pool_point_features(std::span<const PatchFeatureGrid> grids,
                                     std::span<const VisibilityMap> vis, std::size_t num_points);

}  // namespace seggraph
