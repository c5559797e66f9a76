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

#include "oracles.hpp"
#include "seggraph/errors.hpp"
#include "seggraph/model.hpp"
#include "seggraph/model_gradcheck.hpp"
#include "seggraph/pipeline.hpp"

#include <doctest.h>

#include <numbers>
#include <random>

using namespace seggraph;
using nn::Tensor;
using nn::Var;

namespace {

const ShapeArtifacts& small_shape() {
  static const ShapeArtifacts shape = [] {
    SynthConfig config;
    config.seed = 11;
    config.num_shapes = 1;
    config.points_per_shape = 300;
    config.input_channels = 12;
    return preprocess_shape(synthesize_raw_shape(config, 0));
  }();
  return shape;
}

ModelConfig config_for(const ShapeArtifacts& shape, int channels = 16) {
  ModelConfig c;
  c.input_channels = shape.features.channels;
  c.num_classes = shape.cloud.num_classes;
  c.channels = channels;
  return c;
}

Tensor<double> forward_logits(const ModelConfig& config, const nn::ParamStore<double>& params,
                              const ShapeArtifacts& shape) {
  const ModelInput<double> input = prepare_input<double>(shape);
  nn::Tape<double> tape;
  const nn::BoundParams<double> bound(tape, params);
  return tape.value(forward_model(tape, bound, config, input).logits);
}

std::vector<AblationFlags> all_ablations() {
  std::vector<AblationFlags> out;
  for (int bits = 0; bits < 16; ++bits) {
    AblationFlags f;
    f.segment_encoder = bits & 1;
    f.quality_unpool = bits & 2;
    f.overlap_edges = bits & 4;
    f.adjacency_edges = bits & 8;
    out.push_back(f);
  }
  AblationFlags mlp;
  mlp.use_segments = false;
  out.push_back(mlp);
  return out;
}

}  // namespace

TEST_SUITE("model") {

TEST_CASE("relative_normalize") {
  PointCloud cloud;
  cloud.positions = {Vec3(0, 0, 0), Vec3(2, 0, 0), Vec3(1, 0, 0)};
  cloud.normals.assign(3, Vec3::UnitZ());
  Segment seg;
  seg.point_ids = {0, 1};
  const auto rel = relative_normalize(cloud, seg);
  CHECK(rel[1].x() == doctest::Approx(0.5));
  CHECK(rel[0].x() == doctest::Approx(-0.5));
  CHECK(rel[1].y() == 0.0);

  seg.point_ids = {0, 1, 2};
  CHECK(relative_normalize(cloud, seg)[2].norm() == 0.0);
  seg.point_ids.clear();
  CHECK_THROWS_AS(relative_normalize(cloud, seg), ContractError);
}

TEST_CASE("relative positions stay inside [-1, 1]") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> unit(-0.5, 0.5);
  PointCloud cloud;
  for (int i = 0; i < 500; ++i) {
    cloud.positions.push_back(Vec3(unit(rng), unit(rng) * 1e-9, unit(rng)));
    cloud.normals.push_back(Vec3::UnitZ());
  }
  for (int s = 0; s < 200; ++s) {
    Segment seg;
    for (uint32_t j = 0; j < 500; ++j) {
      if (unit(rng) > 0.3) seg.point_ids.push_back(j);
    }
    if (seg.point_ids.empty()) continue;
    for (const Vec3& p : relative_normalize(cloud, seg)) CHECK(p.cwiseAbs().maxCoeff() <= 1.0);
  }
}

TEST_CASE("view_quality is |cos| between normal and ray") {
  const Vec3 cam(0, 0, 2);
  CHECK(view_quality(Vec3::UnitZ(), Vec3::Zero(), cam) == doctest::Approx(1.0));
  CHECK(view_quality(Vec3::UnitX(), Vec3::Zero(), cam) == doctest::Approx(0.0));
  const Vec3 diag = Vec3(1, 0, 1).normalized();
  CHECK(view_quality(diag, Vec3::Zero(), cam) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-12));
  CHECK_THROWS_AS(view_quality(Vec3::UnitZ(), cam, cam), GeometryError);
}

TEST_CASE("expand_edges adds self loops and both directions") {
  std::vector<uint32_t> src, tgt;
  expand_edges({{0, 2}}, 3, src, tgt);
  CHECK(src == std::vector<uint32_t>{0, 1, 2, 0, 2});
  CHECK(tgt == std::vector<uint32_t>{0, 1, 2, 2, 0});
  CHECK_THROWS_AS(expand_edges({{0, 3}}, 3, src, tgt), GraphError);
}

TEST_CASE("parameter layout is deterministic") {
  const ModelConfig config = config_for(small_shape());
  const auto a = init_model_params<double>(config, 3);
  const auto b = init_model_params<double>(config, 3);
  const auto c = init_model_params<double>(config, 4);
  CHECK(a == b);
  CHECK_FALSE(a == c);
  CHECK(a.params().front().name == "proj.weight");
  CHECK(a.params().back().name == "head.l2.bias");
  CHECK(a.at("gat3.a.attn").value.dims() == std::vector<std::size_t>{1, 16});
  CHECK_NOTHROW(check_model_params(config, a));
  ModelConfig other = config;
  other.num_classes += 1;
  CHECK_THROWS_AS(check_model_params(other, a), ConfigError);
}

TEST_CASE("model config validation") {
  ModelConfig c;
  c.channels = 10;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c.channels = 96;
  c.num_classes = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("forward pass matches a scalar-loop reference for every ablation") {
  const ShapeArtifacts& shape = small_shape();
  REQUIRE(shape.segments.size() > 3);
  REQUIRE_FALSE(shape.graph.overlap_edges.empty());
  REQUIRE_FALSE(shape.graph.adjacency_edges.empty());
  for (const AblationFlags& flags : all_ablations()) {
    ModelConfig config = config_for(shape);
    config.ablation = flags;
    const auto params = init_model_params<double>(config, 7);
    const Tensor<double> got = forward_logits(config, params, shape);
    const oracle::Reference ref{params, config};
    const auto want = ref.logits(shape);
    double worst = 0.0;
    for (std::size_t j = 0; j < want.size(); ++j) {
      for (std::size_t k = 0; k < want[j].size(); ++k) {
        worst = std::max(worst, std::abs(got(j, k) - want[j][k]) / std::max(1.0, std::abs(want[j][k])));
      }
    }
    INFO(flags.describe());
    CHECK(worst < 1e-9);
  }
}

TEST_CASE("single-point segment gets attention weight one") {
  ShapeArtifacts shape = small_shape();
  std::vector<uint32_t> keep{shape.segments.segments[0].point_ids[0]};
  const ShapeArtifacts one = subset_shape(shape, keep);
  REQUIRE(one.segments.size() >= 1);
  const ModelConfig config = config_for(one);
  const auto params = init_model_params<double>(config, 1);
  const ModelInput<double> input = prepare_input<double>(one);
  nn::Tape<double> tape;
  const nn::BoundParams<double> bound(tape, params);
  const auto r = forward_model(tape, bound, config, input);
  // Each segment holds the single point, so F' = F^p + F^s weighted to one.
  const Tensor<double>& fp = tape.value(r.point_features);
  const Tensor<double>& fs = tape.value(r.propagated);
  const Tensor<double>& fused = tape.value(r.fused);
  const Tensor<double>& w = tape.value(r.fusion_weights);
  for (std::size_t m = 0; m < w.size(); ++m) CHECK(w[m] > 0.0);
  if (one.segments.size() == 1) {
    CHECK(w[0] == doctest::Approx(1.0));
    for (std::size_t k = 0; k < fp.cols(); ++k) {
      CHECK(fused(0, k) == doctest::Approx(fp(0, k) + fs(0, k)).epsilon(1e-12));
    }
  }
}

TEST_CASE("fusion weights are positive and sum to one per covered point") {
  const ShapeArtifacts& shape = small_shape();
  const ModelConfig config = config_for(shape);
  const auto params = init_model_params<double>(config, 2);
  const ModelInput<double> input = prepare_input<double>(shape);
  nn::Tape<double> tape;
  const nn::BoundParams<double> bound(tape, params);
  const Tensor<double> w = tape.value(fusion_weights(tape, bound, config, input));
  std::vector<double> sums(input.num_points, 0.0);
  for (std::size_t m = 0; m < w.size(); ++m) {
    CHECK(w[m] > 0.0);
    sums[input.member_point[m]] += w[m];
  }
  for (std::size_t j = 0; j < sums.size(); ++j) {
    if (!shape.segments.point_memberships[j].empty()) CHECK(std::abs(sums[j] - 1.0) < 1e-6);
  }
}

TEST_CASE("encode_segments is invariant to member order") {
  ShapeArtifacts shape = small_shape();
  const ModelConfig config = config_for(shape);
  const auto params = init_model_params<double>(config, 5);
  auto encode = [&](const ModelInput<double>& input) {
    nn::Tape<double> tape;
    const nn::BoundParams<double> bound(tape, params);
    const Var fp = tape.matmul(tape.constant(input.point_features), bound["proj.weight"]);
    return tape.value(encode_segments(tape, bound, config, input, fp));
  };
  const ModelInput<double> input = prepare_input<double>(shape);
  // Reverse the member rows of every segment.
  ModelInput<double> flipped = input;
  std::size_t start = 0;
  for (const Segment& seg : shape.segments.segments) {
    const std::size_t n = seg.point_ids.size();
    for (std::size_t k = 0; k < n; ++k) {
      const std::size_t from = start + k, to = start + n - 1 - k;
      flipped.member_point[to] = input.member_point[from];
      for (int c = 0; c < 6; ++c) flipped.geometry(to, c) = input.geometry(from, c);
      flipped.view_quality[to] = input.view_quality[from];
      flipped.uniform_weight[to] = input.uniform_weight[from];
      flipped.mean_weight[to] = input.mean_weight[from];
    }
    start += n;
  }
  const Tensor<double> a = encode(input), b = encode(flipped);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] - b[i]) < 1e-12);
}

TEST_CASE("gatv2 isolated node and symmetric pair") {
  ModelConfig config;
  config.channels = 8;
  config.input_channels = 4;
  const auto params = init_model_params<double>(config, 6);
  std::mt19937_64 rng(6);
  std::normal_distribution<double> gauss;
  Tensor<double> nodes = Tensor<double>::matrix(3, 8);
  for (double& x : nodes.vec()) x = gauss(rng);
  for (int c = 0; c < 8; ++c) nodes(2, c) = nodes(1, c);

  std::vector<uint32_t> src, tgt;
  expand_edges({{1, 2}}, 3, src, tgt);
  nn::Tape<double> tape;
  const nn::BoundParams<double> bound(tape, params);
  const Var h = tape.constant(nodes);
  const Tensor<double> out = tape.value(gatv2_layer(tape, bound, "gat1.o", config, h, src, tgt));
  const Tensor<double> xs = tape.value(tape.matmul(h, bound["gat1.o.w_source"]));
  for (int c = 0; c < 8; ++c) {
    CHECK(out(0, c) == doctest::Approx(xs(0, c)).epsilon(1e-12));
    // Two identical nodes attend 0.5/0.5, which averages equal rows.
    CHECK(out(1, c) == doctest::Approx(xs(1, c)).epsilon(1e-12));
    CHECK(out(2, c) == doctest::Approx(xs(2, c)).epsilon(1e-12));
  }
}

TEST_CASE("propagate_graph is equivariant under node relabeling") {
  ModelConfig config;
  config.channels = 8;
  config.input_channels = 4;
  const auto params = init_model_params<double>(config, 9);
  const std::size_t g = 12;
  std::mt19937_64 rng(9);
  std::normal_distribution<double> gauss;
  Tensor<double> nodes = Tensor<double>::matrix(g, 8);
  for (double& x : nodes.vec()) x = gauss(rng);
  const std::vector<Edge> overlap{{0, 3}, {1, 5}, {2, 7}, {3, 9}};
  const std::vector<Edge> adjacency{{0, 1}, {4, 6}, {6, 11}, {8, 10}, {9, 10}};
  std::vector<uint32_t> perm(g);
  for (uint32_t i = 0; i < g; ++i) perm[i] = (i * 5 + 3) % g;

  auto run = [&](const Tensor<double>& x, const std::vector<Edge>& eo, const std::vector<Edge>& ea) {
    ModelInput<double> input;
    expand_edges(eo, g, input.overlap_source, input.overlap_target);
    expand_edges(ea, g, input.adjacency_source, input.adjacency_target);
    nn::Tape<double> tape;
    const nn::BoundParams<double> bound(tape, params);
    return tape.value(propagate_graph(tape, bound, config, input, tape.constant(x)));
  };
  auto relabel = [&](const std::vector<Edge>& edges) {
    std::vector<Edge> out;
    for (auto [a, b] : edges) out.push_back({std::min(perm[a], perm[b]), std::max(perm[a], perm[b])});
    std::sort(out.begin(), out.end());
    return out;
  };
  Tensor<double> moved = Tensor<double>::matrix(g, 8);
  for (std::size_t i = 0; i < g; ++i) {
    for (int c = 0; c < 8; ++c) moved(perm[i], c) = nodes(i, c);
  }
  const Tensor<double> a = run(nodes, overlap, adjacency);
  const Tensor<double> b = run(moved, relabel(overlap), relabel(adjacency));
  for (std::size_t i = 0; i < g; ++i) {
    for (int c = 0; c < 8; ++c) CHECK(std::abs(a(i, c) - b(perm[i], c)) < 1e-12);
  }

  const Tensor<double> lonely = run(nodes, {}, {});
  for (double x : lonely.vec()) CHECK(std::isfinite(x));
  CHECK(lonely == run(nodes, {}, {}));
}

TEST_CASE("zero segment features leave the point branch alone") {
  const ShapeArtifacts& shape = small_shape();
  ModelConfig config = config_for(shape);
  auto params = init_model_params<double>(config, 3);
  ModelConfig mlp = config;
  mlp.ablation.use_segments = false;
  // Zeroed projection makes F^p and with it every F^s zero (encoder off).
  config.ablation.segment_encoder = false;
  config.ablation.overlap_edges = config.ablation.adjacency_edges = false;
  params.at("proj.weight").value.fill(0.0);
  const Tensor<double> a = forward_logits(config, params, shape);
  const Tensor<double> b = forward_logits(mlp, params, shape);
  CHECK(a == b);
}

TEST_CASE("model loss gradient passes gradcheck on a small shape") {
  const ShapeArtifacts shape = make_gradcheck_shape(0);
  CHECK(shape.cloud.size() <= 60);
  CHECK(shape.segments.size() <= 10);
  ModelConfig config = config_for(shape, 8);
  config.quality_hidden = 4;
  const auto params = init_model_params<double>(config, 0);
  std::vector<Tensor<double>> inputs;
  for (const auto& p : params.params()) inputs.push_back(p.value);
  nn::GradcheckOptions options;
  options.reference = model_reference_loss(config, shape, params);
  const nn::GradcheckResult r =
      nn::gradcheck(model_loss_function(config, shape, params), inputs, options);
  CHECK(r.max_rel_error < 1e-4);
  CHECK(r.checked > 1000);
}

}  // TEST_SUITE
