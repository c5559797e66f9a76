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
#include "seggraph/feature_pool.hpp"

#include <doctest.h>

#include <random>

using namespace seggraph;

namespace {

PatchFeatureGrid make_grid(int rows, int cols, int channels,
                           const std::function<float(int, int, int)>& value) {
  PatchFeatureGrid g;
  g.rows = rows;
  g.cols = cols;
  g.channels = channels;
  g.data.resize(static_cast<std::size_t>(rows) * cols * channels);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      for (int k = 0; k < channels; ++k) g.at(r, c)[k] = value(r, c, k);
    }
  }
  return g;
}

VisibilityMap map_with(std::vector<PointProjection> proj, int view_id = 0) {
  VisibilityMap m;
  m.view_id = view_id;
  m.resolution = {56, 56};
  m.point_proj = std::move(proj);
  return m;
}

}  // namespace

TEST_SUITE("feature_pool") {

TEST_CASE("catmull_rom_weights") {
  for (double t : {0.0, 0.1, 0.37, 0.5, 0.99}) {
    const auto w = catmull_rom_weights(t);
    CHECK(w[0] + w[1] + w[2] + w[3] == doctest::Approx(1.0).epsilon(1e-14));
    // First moment reproduces linear functions: sum w_i * (i - 1) = t.
    CHECK(-w[0] + w[2] + 2 * w[3] == doctest::Approx(t).epsilon(1e-14));
  }
  const auto w0 = catmull_rom_weights(0.0);
  CHECK(w0[0] == 0.0);
  CHECK(w0[1] == 1.0);
  CHECK(w0[2] == 0.0);
  CHECK(w0[3] == 0.0);
  const auto half = catmull_rom_weights(0.5);
  CHECK(half[0] == doctest::Approx(-0.0625));
  CHECK(half[1] == doctest::Approx(0.5625));
}

TEST_CASE("bicubic_sample interpolates patch centers") {
  std::mt19937 rng(1);
  std::uniform_real_distribution<float> unit(-1.f, 1.f);
  const PatchFeatureGrid g = make_grid(4, 4, 3, [&](int, int, int) { return unit(rng); });
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) {
      const double u = 14.0 * c + 6.5, v = 14.0 * r + 6.5;
      const auto s = bicubic_sample(g, u, v);
      for (int k = 0; k < 3; ++k) CHECK(s[k] == doctest::Approx(g.at(r, c)[k]).epsilon(1e-12));
    }
  }
}

TEST_CASE("bicubic_sample of a constant grid is constant") {
  const PatchFeatureGrid g = make_grid(4, 4, 2, [](int, int, int k) { return k ? -3.f : 2.5f; });
  for (double u : {0.0, 3.3, 27.9, 55.0}) {
    const auto s = bicubic_sample(g, u, 40.2);
    CHECK(s[0] == doctest::Approx(2.5));
    CHECK(s[1] == doctest::Approx(-3.0));
  }
}

TEST_CASE("bicubic_sample reproduces a linear ramp away from the border") {
  const PatchFeatureGrid g = make_grid(6, 6, 1, [](int, int c, int) { return 2.0f * c + 1.0f; });
  for (double u = 20.5; u < 62.5; u += 3.7) {
    const double s = (u + 0.5) / 14.0 - 0.5;
    CHECK(bicubic_sample(g, u, 30.0)[0] == doctest::Approx(2.0 * s + 1.0).epsilon(1e-12));
  }
}

TEST_CASE("bicubic_sample checks the output width") {
  const PatchFeatureGrid g = make_grid(2, 2, 3, [](int, int, int) { return 0.f; });
  std::vector<double> out(2);
  CHECK_THROWS_AS(bicubic_sample(g, 1.0, 1.0, out), ShapeError);
}

TEST_CASE("pool_point_features averages over visible views") {
  const PatchFeatureGrid a = make_grid(4, 4, 2, [](int, int, int) { return 1.0f; });
  PatchFeatureGrid b = make_grid(4, 4, 2, [](int, int, int) { return 4.0f; });
  b.view_id = 1;
  PointProjection seen{20.0, 20.0, 1.0, true};
  PointProjection hidden{20.0, 20.0, 1.0, false};
  const std::vector<VisibilityMap> vis{map_with({seen, seen, hidden}, 0),
                                       map_with({seen, hidden, hidden}, 1)};
  const PointFeatureBank bank = pool_point_features(std::vector<PatchFeatureGrid>{a, b}, vis, 3);
  CHECK(bank.view_count == std::vector<uint32_t>{2, 1, 0});
  CHECK(bank.row(0)[0] == doctest::Approx(2.5));
  CHECK(bank.row(1)[1] == doctest::Approx(1.0));
  CHECK(bank.row(2)[0] == 0.0);
  CHECK(bank.row(2)[1] == 0.0);
}

TEST_CASE("pool_point_features rejects mismatched lists") {
  const PatchFeatureGrid a = make_grid(4, 4, 2, [](int, int, int) { return 1.0f; });
  CHECK_THROWS_AS(pool_point_features(std::vector<PatchFeatureGrid>{a, a},
                                      std::vector<VisibilityMap>{map_with({})}, 0),
                  ConfigError);
}

TEST_CASE("PatchFeatureGrid::validate") {
  const PatchFeatureGrid g = make_grid(4, 4, 2, [](int, int, int) { return 0.f; });
  CHECK_NOTHROW(g.validate({56, 56}));
  CHECK_THROWS_AS(g.validate({112, 56}), ShapeError);
}

}  // TEST_SUITE
