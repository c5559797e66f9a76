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

#include "seggraph/model_gradcheck.hpp"

#include "seggraph/errors.hpp"
#include "seggraph/pipeline.hpp"

#include <algorithm>
#include <chrono>

namespace seggraph {

ShapeArtifacts subset_shape(const ShapeArtifacts& shape, std::span<const uint32_t> keep,
                            std::size_t min_points) {
  const std::size_t n = shape.cloud.size();
  std::vector<int64_t> remap(n, -1);
  for (std::size_t i = 0; i < keep.size(); ++i) {
    if (keep[i] >= n) throw ShapeError("subset point id out of range");
    if (i > 0 && keep[i] <= keep[i - 1]) throw ContractError("subset ids must be sorted and unique");
    remap[keep[i]] = static_cast<int64_t>(i);
  }
  ShapeArtifacts out;
  out.name = shape.name + "_subset";
  out.cameras = shape.cameras;
  const PointCloud& src = shape.cloud;
  out.cloud.category = src.category;
  out.cloud.num_classes = src.num_classes;
  const int c = shape.features.channels;
  out.features.channels = c;
  out.features.num_points = keep.size();
  for (uint32_t j : keep) {
    out.cloud.positions.push_back(src.positions[j]);
    out.cloud.normals.push_back(src.normals[j]);
    if (src.has_colors()) out.cloud.colors.push_back(src.colors[j]);
    if (src.has_labels()) out.cloud.labels.push_back(src.labels[j]);
    const auto row = shape.features.row(j);
    out.features.features.insert(out.features.features.end(), row.begin(), row.end());
    out.features.view_count.push_back(shape.features.view_count[j]);
  }
  for (const Segment& seg : shape.segments.segments) {
    Segment clipped = seg;
    clipped.point_ids.clear();
    for (uint32_t j : seg.point_ids) {
      if (remap[j] >= 0) clipped.point_ids.push_back(static_cast<uint32_t>(remap[j]));
    }
    if (clipped.point_ids.size() >= std::max<std::size_t>(min_points, 1)) {
      out.segments.segments.push_back(std::move(clipped));
    }
  }
  out.segments.rebuild(out.cloud);
  out.graph = build_segment_graph(out.segments, out.cloud);
  return out;
}

ShapeArtifacts make_gradcheck_shape(uint64_t seed, std::size_t max_points,
                                    std::size_t max_segments) {
  SynthConfig config;
  config.seed = seed;
  config.num_shapes = 1;
  config.points_per_shape = 100;
  config.input_channels = 16;
  config.category = "gradcheck";
  const ShapeArtifacts full = preprocess_shape(synthesize_raw_shape(config, 0));

  std::vector<uint32_t> keep;
  std::size_t taken = 0;
  for (const Segment& seg : full.segments.segments) {
    if (taken == max_segments) break;
    std::vector<uint32_t> merged;
    std::set_union(keep.begin(), keep.end(), seg.point_ids.begin(), seg.point_ids.end(),
                   std::back_inserter(merged));
    if (merged.size() > max_points) continue;
    keep = std::move(merged);
    ++taken;
  }
  if (keep.empty()) throw DegenerateInputError("gradcheck shape has no segments");
  ShapeArtifacts out = subset_shape(full, keep);
  out.segments.segments.resize(std::min(out.segments.size(), max_segments));
  out.segments.rebuild(out.cloud);
  out.graph = build_segment_graph(out.segments, out.cloud);
  return out;
}

namespace {

ModelCheck run_check(const std::string& name, const ModelConfig& config,
                     const ShapeArtifacts& shape, uint64_t seed, std::size_t coords) {
  const auto start = std::chrono::steady_clock::now();
  const nn::ParamStore<double> params = init_model_params<double>(config, seed);
  std::vector<nn::Tensor<double>> inputs;
  for (const auto& p : params.params()) inputs.push_back(p.value);
  nn::GradcheckOptions options;
  options.max_coords_per_input = coords;
  options.seed = seed;
  options.reference = model_reference_loss(config, shape, params);
  ModelCheck check;
  check.name = name;
  check.result = nn::gradcheck(model_loss_function(config, shape, params), inputs, options);
  check.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return check;
}

}  // namespace

std::vector<ModelCheck> model_gradcheck_suite(uint64_t seed, std::size_t sampled_coords) {
  const ShapeArtifacts shape = make_gradcheck_shape(seed);
  ModelConfig wide;
  wide.input_channels = shape.features.channels;
  wide.num_classes = shape.cloud.num_classes;
  ModelConfig narrow = wide;
  narrow.channels = 8;
  narrow.quality_hidden = 4;
  std::vector<ModelCheck> checks;
  checks.push_back(run_check("model(C=96, sampled)", wide, shape, seed, sampled_coords));
  checks.push_back(run_check("model(C=8, full)", narrow, shape, seed, 0));
  return checks;
}

}  // namespace seggraph
