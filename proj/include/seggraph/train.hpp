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

#include "seggraph/metrics.hpp"
#include "seggraph/model.hpp"
#include "seggraph/nn/params.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace seggraph {

struct TrainConfig {
  int shots = 8;
  int epochs = 100;
  double lr = 1e-3;
  uint64_t seed = 0;
  int channels = 96;
  AblationFlags ablation;
  std::string category;

  void validate() const;
};

struct TrainedModel {
  ModelConfig config;
  nn::ParamStore<float> params;
  std::vector<double> loss_curve;  // loss before each Adam step
  double train_accuracy = 0.0;     // point accuracy on the shot set after training
};

/// Model configuration implied by a set of shapes (channel count, classes).
ModelConfig model_config_for(std::span<const ShapeArtifacts> shapes, int channels,
                             const AblationFlags& ablation);

/// Full-batch few-shot training on the first `config.shots` shapes. The loss
/// is the mean cross-entropy over all labeled points of the shot set.
TrainedModel train_fewshot(const TrainConfig& config, std::span<const ShapeArtifacts> shapes);

struct Prediction {
  std::vector<int32_t> labels;
  nn::Tensor<float> logits;  // N x K
};

/// Argmax with ties to the lowest class index.
int32_t argmax_label(std::span<const float> row);

Prediction predict_labels(const ModelConfig& config, const nn::ParamStore<float>& params,
                          const ShapeArtifacts& shape);

/// Fused per-point features F' (N x C) for visualization.
nn::Tensor<float> fused_features(const ModelConfig& config, const nn::ParamStore<float>& params,
                                 const ShapeArtifacts& shape);

/// Predicts and scores every labeled shape, including the small-part split.
std::vector<EvalReport> evaluate_shapes(const ModelConfig& config,
                                        const nn::ParamStore<float>& params,
                                        std::span<const ShapeArtifacts> shapes);

struct SeedRun {
  uint64_t seed = 0;
  CategoryScore score;
  std::vector<EvalReport> reports;
  std::vector<double> loss_curve;
  double train_accuracy = 0.0;
};

struct SeedSweep {
  std::string category;
  std::vector<SeedRun> runs;
  MeanSd miou;
  MeanSd small_miou;  // over seeds whose test set has small classes
  MeanSd large_miou;
};

/// Trains one model per seed on `train` and scores it on `test`. Seeds run
/// on up to `jobs` threads; results are in seed order and independent of
/// `jobs`.
SeedSweep seed_sweep(const std::string& category, std::span<const ShapeArtifacts> train,
                     std::span<const ShapeArtifacts> test, const TrainConfig& base,
                     std::span<const uint64_t> seeds, int jobs = 1);

}  // namespace seggraph
