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

#include "seggraph/feature_pool.hpp"

#include "seggraph/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace seggraph {

void PatchFeatureGrid::validate(Resolution res) const {
  if (rows <= 0 || cols <= 0 || channels <= 0 || patch_size <= 0) {
    throw ShapeError("patch feature grid has non-positive dimensions");
  }
  if (data.size() != static_cast<std::size_t>(rows) * cols * channels) {
    throw ShapeError("patch feature grid payload does not match its dimensions");
  }
  auto covers = [&](int patches, int pixels) {
    const int span = patches * patch_size;
    return span >= pixels && span - pixels < patch_size;
  };
  if (!covers(cols, res.width) || !covers(rows, res.height)) {
    throw ShapeError("patch grid " + std::to_string(rows) + "x" + std::to_string(cols) +
                     " at patch size " + std::to_string(patch_size) + " does not cover " +
                     std::to_string(res.width) + "x" + std::to_string(res.height));
  }
}

std::array<double, 4> catmull_rom_weights(double t) {
  constexpr double a = -0.5;
  auto near = [](double x) { return ((a + 2.0) * x - (a + 3.0)) * x * x + 1.0; };
  auto far = [](double x) { return ((a * x - 5.0 * a) * x + 8.0 * a) * x - 4.0 * a; };
  return {far(t + 1.0), near(t), near(1.0 - t), far(2.0 - t)};
}

void bicubic_sample(const PatchFeatureGrid& grid, double u, double v, std::span<double> out) {
  if (out.size() != static_cast<std::size_t>(grid.channels)) {
    throw ShapeError("bicubic_sample output has " + std::to_string(out.size()) +
                     " channels, grid has " + std::to_string(grid.channels));
  }
  const double sx = (u + 0.5) / grid.patch_size - 0.5;
  const double sy = (v + 0.5) / grid.patch_size - 0.5;
  const double fx = std::floor(sx);
  const double fy = std::floor(sy);
  const auto wx = catmull_rom_weights(sx - fx);
  const auto wy = catmull_rom_weights(sy - fy);
  const int x0 = static_cast<int>(fx) - 1;
  const int y0 = static_cast<int>(fy) - 1;

  std::fill(out.begin(), out.end(), 0.0);
  for (int dy = 0; dy < 4; ++dy) {
    const int row = std::clamp(y0 + dy, 0, grid.rows - 1);
    for (int dx = 0; dx < 4; ++dx) {
      const int col = std::clamp(x0 + dx, 0, grid.cols - 1);
      const double w = wy[dy] * wx[dx];
      const float* f = grid.at(row, col);
      for (int c = 0; c < grid.channels; ++c) out[c] += w * f[c];
    }
  }
}

std::vector<double> bicubic_sample(const PatchFeatureGrid& grid, double u, double v) {
  std::vector<double> out(grid.channels);
  bicubic_sample(grid, u, v, out);
  return out;
}

PointFeatureBank pool_point_features(std::span<const PatchFeatureGrid> grids,
                                     std::span<const VisibilityMap> vis, std::size_t num_points) {
  if (grids.size() != vis.size()) {
    throw ConfigError("pool_point_features: " + std::to_string(grids.size()) + " grids vs " +
                      std::to_string(vis.size()) + " visibility maps");
  }
  PointFeatureBank bank;
  bank.num_points = num_points;
  bank.channels = grids.empty() ? 0 : grids.front().channels;
  bank.features.assign(num_points * bank.channels, 0.0);
  bank.view_count.assign(num_points, 0);

  // Views are visited in ascending view_id so the summation order, and with
  // it every rounding, is independent of the input list order.
  std::vector<std::size_t> order(vis.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return vis[a].view_id < vis[b].view_id; });

  std::vector<double> sample(bank.channels);
  for (std::size_t idx : order) {
    const VisibilityMap& map = vis[idx];
    const PatchFeatureGrid* grid = nullptr;
    for (const auto& g : grids) {
      if (g.view_id == map.view_id) grid = &g;
    }
    if (grid == nullptr) {
      throw ConfigError("no feature grid for view " + std::to_string(map.view_id));
    }
    if (grid->channels != bank.channels) throw ShapeError("feature grids disagree on channel count");
    grid->validate(map.resolution);
    if (map.point_proj.size() != num_points) {
      throw ConfigError("visibility map does not match the point count");
    }
    for (std::size_t j = 0; j < num_points; ++j) {
      const PointProjection& pp = map.point_proj[j];
      if (!pp.visible) continue;
      bicubic_sample(*grid, pp.u, pp.v, sample);
      double* row = bank.features.data() + j * bank.channels;
      for (int c = 0; c < bank.channels; ++c) row[c] += sample[c];
      ++bank.view_count[j];
    }
  }
  for (std::size_t j = 0; j < num_points; ++j) {
    if (bank.view_count[j] == 0) continue;
    const double inv = 1.0 / bank.view_count[j];
    double* row = bank.features.data() + j * bank.channels;
    for (int c = 0; c < bank.channels; ++c) row[c] *= inv;
  }
  return bank;
}

}  // namespace seggraph
