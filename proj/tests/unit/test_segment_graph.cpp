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

#include "instances.hpp"
#include "oracles.hpp"
#include "seggraph/errors.hpp"
#include "seggraph/segment_graph.hpp"

#include <doctest.h>

#include <random>

using namespace seggraph;

namespace {

struct Fixture {
  PointCloud cloud;
  SegmentSet set;

  void add(int view, std::vector<uint32_t> ids) {
    Segment s;
    s.view_id = view;
    s.point_ids = std::move(ids);
    set.segments.push_back(std::move(s));
  }
  SegmentGraph build() {
    set.rebuild(cloud);
    return build_segment_graph(set, cloud);
  }
};

Fixture line_fixture(std::vector<double> xs) {
  Fixture f;
  for (double x : xs) {
    f.cloud.positions.push_back(Vec3(x, 0, 0));
    f.cloud.normals.push_back(Vec3::UnitZ());
  }
  return f;
}

}  // namespace

TEST_SUITE("segment_graph") {

TEST_CASE("point_set_iou") {
  const std::vector<uint32_t> a{1, 2, 3}, b{2, 3, 4}, c{7, 8};
  CHECK(point_set_iou(a, b) == 0.5);
  CHECK(point_set_iou(a, a) == 1.0);
  CHECK(point_set_iou(a, c) == 0.0);
}

TEST_CASE("min_pairwise_distance basics") {
  const std::vector<Vec3> pos{Vec3(0, 0, 0), Vec3(0.5, 0, 0), Vec3(0.3, 0.4, 0)};
  const std::vector<uint32_t> a{0}, b{1}, c{2}, ab{0, 1};
  CHECK(min_pairwise_distance(a, b, pos) == doctest::Approx(0.5));
  CHECK(min_pairwise_distance(a, c, pos) == doctest::Approx(0.5));
  CHECK(min_pairwise_distance(ab, b, pos) == 0.0);
}

TEST_CASE("min_pairwise_distance matches a double loop") {
  for (uint64_t seed = 0; seed < 20; ++seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(-0.5, 0.5);
    const double spread = seed % 2 ? 0.05 : 1.0;
    std::vector<Vec3> pos;
    for (int i = 0; i < 200; ++i) pos.push_back(Vec3(unit(rng), unit(rng), unit(rng)) * spread);
    std::vector<uint32_t> a, b;
    for (uint32_t i = 0; i < 100; ++i) {
      a.push_back(i);
      b.push_back(100 + i);
    }
    const double want = oracle::min_distance(a, b, pos);
    CHECK(std::abs(min_pairwise_distance(a, b, pos) - want) < 1e-9);
  }
}

TEST_CASE("same point set in two views gives one overlap edge") {
  Fixture f = line_fixture({0.0, 0.001, 0.002});
  f.add(0, {0, 1, 2});
  f.add(1, {0, 1, 2});
  const SegmentGraph g = f.build();
  CHECK(g.overlap_edges == std::vector<Edge>{{0, 1}});
  CHECK(g.adjacency_edges.empty());
}

TEST_CASE("far apart singletons get no edge, close ones an adjacency edge") {
  Fixture f = line_fixture({0.0, 0.5, 0.505});
  f.add(0, {0});
  f.add(1, {1});
  f.add(0, {2});
  const SegmentGraph g = f.build();
  CHECK(g.overlap_edges.empty());
  CHECK(g.adjacency_edges == std::vector<Edge>{{1, 2}});
}

TEST_CASE("adjacency uses a strict distance comparison") {
  Fixture f = line_fixture({0.0, 0.25, 0.5});
  f.add(0, {0});
  f.add(0, {1});
  f.set.rebuild(f.cloud);
  CHECK(build_segment_graph(f.set, f.cloud, 0.1, 0.25).adjacency_edges.empty());
  CHECK(build_segment_graph(f.set, f.cloud, 0.1, 0.2500001).adjacency_edges.size() == 1);
}

TEST_CASE("low-overlap pairs sharing a point are adjacent, same-view high overlap is neither") {
  Fixture f = line_fixture({0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11});
  f.add(0, {0, 1, 2, 3, 4, 5, 6, 7, 8, 9});
  f.add(1, {9, 10, 11});
  f.add(0, {0, 1, 2});
  const SegmentGraph g = f.build();
  CHECK(g.adjacency_edges == std::vector<Edge>{{0, 1}});
  CHECK(g.overlap_edges.empty());
}

TEST_CASE("empty segment set gives an empty graph") {
  Fixture f = line_fixture({0.0});
  const SegmentGraph g = f.build();
  CHECK(g.node_count == 0);
  CHECK(g.overlap_edges.empty());
}

TEST_CASE("validate catches broken graphs") {
  SegmentGraph g;
  g.node_count = 3;
  g.overlap_edges = {{0, 1}};
  g.adjacency_edges = {{0, 1}};
  CHECK_THROWS_AS(g.validate(), GraphError);
  g.adjacency_edges = {{2, 2}};
  CHECK_THROWS_AS(g.validate(), GraphError);
  g.adjacency_edges = {{1, 5}};
  CHECK_THROWS_AS(g.validate(), GraphError);
  g.adjacency_edges = {{1, 2}, {0, 2}};
  CHECK_THROWS_AS(g.validate(), GraphError);
}

TEST_CASE("build_segment_graph matches the O(n^2) construction") {
  for (uint64_t seed = 0; seed < 16; ++seed) {
    const testing::GraphInstance inst = testing::graph_instance(seed);
    const SegmentGraph got = build_segment_graph(inst.segments, inst.cloud, inst.iou_threshold,
                                                 inst.adjacency_distance);
    const SegmentGraph want =
        oracle::graph(inst.segments, inst.cloud, inst.iou_threshold, inst.adjacency_distance);
    CHECK(got.overlap_edges == want.overlap_edges);
    CHECK(got.adjacency_edges == want.adjacency_edges);
    CHECK_NOTHROW(got.validate(&inst.segments));
  }
}

}  // TEST_SUITE
