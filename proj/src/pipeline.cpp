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

#include "seggraph/pipeline.hpp"

#include "seggraph/errors.hpp"

#include <atomic>
#include <chrono>
#include <exception>
#include <mutex>
#include <thread>

namespace seggraph {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

}  // namespace

nlohmann::json StageTimings::to_json(const std::string& shape) const {
  return {{"shape", shape},
          {"render_ms", render_ms},
          {"masks_ms", masks_ms},
          {"pool_ms", pool_ms},
          {"build_graph_ms", graph_ms}};
}

std::vector<VisibilityMap> render_visibility(const RawShape& shape,
                                             const PreprocessOptions& options) {
  std::vector<VisibilityMap> vis;
  vis.reserve(shape.cameras.size());
  for (const CameraView& cam : shape.cameras) {
    vis.push_back(rasterize_visibility(shape.cloud, cam, options.splat, options.depth_epsilon));
  }
  return vis;
}

ShapeArtifacts preprocess_shape(const RawShape& shape, const PreprocessOptions& options,
                                StageTimings* timings) {
  if (shape.masks.size() != shape.cameras.size() || shape.grids.size() != shape.cameras.size()) {
    throw ConfigError(shape.name + ": " + std::to_string(shape.cameras.size()) + " cameras, " +
                      std::to_string(shape.masks.size()) + " mask stacks, " +
                      std::to_string(shape.grids.size()) + " feature grids");
  }
  shape.cloud.validate();
  StageTimings local;
  StageTimings& t = timings != nullptr ? *timings : local;

  auto start = Clock::now();
  const std::vector<VisibilityMap> vis = render_visibility(shape, options);
  t.render_ms = elapsed_ms(start);

  start = Clock::now();
  std::vector<RegionImage> regions;
  regions.reserve(shape.masks.size());
  for (const MaskStack& stack : shape.masks) {
    if (stack.masks.empty()) {
      RegionImage empty;
      empty.view_id = stack.view_id;
      empty.resolution = stack.resolution;
      empty.region_of_pixel.assign(
          static_cast<std::size_t>(stack.resolution.width) * stack.resolution.height, -1);
      regions.push_back(std::move(empty));
    } else {
      regions.push_back(decompose_view_masks(stack, options.min_region_pixels));
    }
  }
  ShapeArtifacts out;
  out.name = shape.name;
  out.cloud = shape.cloud;
  out.cameras = shape.cameras;
  out.segments =
      lift_segments(regions, vis, shape.cameras, shape.cloud, options.min_segment_points);
  t.masks_ms = elapsed_ms(start);

  start = Clock::now();
  for (std::size_t v = 0; v < shape.grids.size(); ++v) {
    shape.grids[v].validate(shape.cameras[v].resolution);
  }
  out.features = pool_point_features(shape.grids, vis, shape.cloud.size());
  for (double& x : out.features.features) x = static_cast<double>(static_cast<float>(x));
  t.pool_ms = elapsed_ms(start);

  start = Clock::now();
  out.graph = build_segment_graph(out.segments, out.cloud, options.iou_threshold,
                                  options.adjacency_distance);
  t.graph_ms = elapsed_ms(start);
  return out;
}

RawShape synthesize_raw_shape(const SynthConfig& config, int index,
                              std::vector<MergeEvent>* merge_log) {
  SynthShape synth = generate_shape(config, index);
  RawShape raw;
  raw.name = synth.name;
  raw.split = index < config.train_shapes ? "train" : "test";
  raw.cloud = std::move(synth.cloud);
  raw.class_names.assign(synth_class_names().begin(),
                         synth_class_names().begin() + config.parts_per_shape);
  raw.cameras = make_cameras(config.num_views, config.camera_radius, config.resolution);
  std::vector<VisibilityMap> vis;
  for (const CameraView& cam : raw.cameras) vis.push_back(rasterize_visibility(raw.cloud, cam));
  raw.masks = generate_views_and_masks(raw.cloud, raw.cameras, vis, config, index, merge_log);
  raw.grids = generate_features(raw.cloud, vis, config, index);
  raw.provenance = {{"source", "synthetic"},
                    {"seed", config.seed},
                    {"index", index},
                    {"feature_noise", config.feature_noise},
                    {"prototype_separation", config.prototype_separation},
                    {"split_rate", config.split_rate},
                    {"merge_rate", config.merge_rate}};
  return raw;
}

void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers =
      std::min<std::size_t>(count, static_cast<std::size_t>(std::max(jobs, 1)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> threads;
  for (std::size_t w = 0; w < workers; ++w) {
    threads.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& th : threads) th.join();
  if (error) std::rethrow_exception(error);
}

Corpus synthesize_corpus(const SynthConfig& config, const PreprocessOptions& options, int jobs) {
  config.validate();
  std::vector<ShapeArtifacts> shapes(config.num_shapes);
  parallel_for(shapes.size(), jobs, [&](std::size_t i) {
    shapes[i] = preprocess_shape(synthesize_raw_shape(config, static_cast<int>(i)), options);
  });
  Corpus corpus;
  corpus.category = config.category;
  corpus.num_classes = config.parts_per_shape;
  corpus.class_names.assign(synth_class_names().begin(),
                            synth_class_names().begin() + config.parts_per_shape);
  for (int i = 0; i < config.num_shapes; ++i) {
    (i < config.train_shapes ? corpus.train : corpus.test).push_back(std::move(shapes[i]));
  }
  return corpus;
}

}  // namespace seggraph
