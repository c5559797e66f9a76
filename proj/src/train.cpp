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

#include "seggraph/train.hpp"

#include "seggraph/errors.hpp"
#include "seggraph/pipeline.hpp"

namespace seggraph {

using nn::BoundParams;
using nn::ParamStore;
using nn::Tape;

void TrainConfig::validate() const {
  if (shots < 1) throw ConfigError("shots must be at least 1");
  if (epochs < 0) throw ConfigError("epochs must be non-negative");
  if (!(lr > 0.0)) throw ConfigError("learning rate must be positive");
  if (channels <= 0) throw ConfigError("channels must be positive");
}

ModelConfig model_config_for(std::span<const ShapeArtifacts> shapes, int channels,
                             const AblationFlags& ablation) {
  if (shapes.empty()) throw ConfigError("no shapes given");
  ModelConfig config;
  config.channels = channels;
  config.ablation = ablation;
  config.input_channels = shapes.front().features.channels;
  config.num_classes = shapes.front().cloud.num_classes;
  for (const ShapeArtifacts& s : shapes) {
    if (s.features.channels != config.input_channels) {
      throw ConfigError(s.name + ": feature channels " + std::to_string(s.features.channels) +
                        " differ from " + std::to_string(config.input_channels));
    }
    if (s.cloud.num_classes != config.num_classes) {
      throw ConfigError(s.name + ": class count " + std::to_string(s.cloud.num_classes) +
                        " differs from " + std::to_string(config.num_classes));
    }
  }
  config.validate();
  return config;
}

namespace {

std::size_t labeled_count(const std::vector<int32_t>& labels) {
  std::size_t n = 0;
  for (int32_t l : labels) n += l != kIgnoreLabel;
  return n;
}

}  // namespace

TrainedModel train_fewshot(const TrainConfig& config, std::span<const ShapeArtifacts> shapes) {
  config.validate();
  if (shapes.size() < static_cast<std::size_t>(config.shots)) {
    throw ConfigError("need " + std::to_string(config.shots) + " training shapes, got " +
                      std::to_string(shapes.size()));
  }
  const auto shots = shapes.first(static_cast<std::size_t>(config.shots));
  TrainedModel out;
  out.config = model_config_for(shots, config.channels, config.ablation);

  std::vector<ModelInput<float>> batch;
  batch.reserve(shots.size());
  std::size_t total = 0;
  for (const ShapeArtifacts& s : shots) {
    if (!s.cloud.has_labels()) throw ConfigError(s.name + ": training shape has no labels");
    batch.push_back(prepare_input<float>(s));
    total += labeled_count(batch.back().labels);
  }
  if (total == 0) throw NumericError("training shapes carry no labeled points");

  out.params = init_model_params<float>(out.config, config.seed);
  nn::AdamConfig adam_config;
  adam_config.lr = config.lr;
  nn::AdamState<float> adam = nn::make_adam_state(out.params, adam_config);
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    out.params.zero_grad();
    double epoch_loss = 0.0;
    for (const ModelInput<float>& input : batch) {
      const std::size_t count = labeled_count(input.labels);
      if (count == 0) continue;
      const float weight = static_cast<float>(static_cast<double>(count) / total);
      Tape<float> tape;
      const BoundParams<float> bound(tape, out.params);
      const auto result = forward_model(tape, bound, out.config, input);
      const nn::Var loss = tape.cross_entropy(result.logits, input.labels);
      epoch_loss += weight * static_cast<double>(tape.value(loss)[0]);
      tape.backward(loss);
      bound.accumulate(tape, out.params, weight);
    }
    out.loss_curve.push_back(epoch_loss);
    nn::adam_step(out.params, adam);
  }

  std::size_t correct = 0;
  for (std::size_t i = 0; i < shots.size(); ++i) {
    const Prediction pred = predict_labels(out.config, out.params, shots[i]);
    for (std::size_t j = 0; j < pred.labels.size(); ++j) {
      const int32_t g = batch[i].labels[j];
      correct += g != kIgnoreLabel && g == pred.labels[j];
    }
  }
  out.train_accuracy = static_cast<double>(correct) / static_cast<double>(total);
  return out;
}

int32_t argmax_label(std::span<const float> row) {
  int32_t best = 0;
  for (std::size_t k = 1; k < row.size(); ++k) {
    if (row[k] > row[best]) best = static_cast<int32_t>(k);
  }
  return best;
}

Prediction predict_labels(const ModelConfig& config, const ParamStore<float>& params,
                          const ShapeArtifacts& shape) {
  check_model_params(config, params);
  const ModelInput<float> input = prepare_input<float>(shape);
  Tape<float> tape;
  const BoundParams<float> bound(tape, params);
  const auto result = forward_model(tape, bound, config, input);
  Prediction out;
  out.logits = tape.value(result.logits);
  const std::size_t k = out.logits.cols();
  out.labels.resize(out.logits.rows());
  for (std::size_t i = 0; i < out.labels.size(); ++i) {
    out.labels[i] = argmax_label(std::span<const float>(out.logits.vec()).subspan(i * k, k));
  }
  return out;
}

nn::Tensor<float> fused_features(const ModelConfig& config, const ParamStore<float>& params,
                                 const ShapeArtifacts& shape) {
  check_model_params(config, params);
  const ModelInput<float> input = prepare_input<float>(shape);
  Tape<float> tape;
  const BoundParams<float> bound(tape, params);
  return tape.value(forward_model(tape, bound, config, input).fused);
}

std::vector<EvalReport> evaluate_shapes(const ModelConfig& config, const ParamStore<float>& params,
                                        std::span<const ShapeArtifacts> shapes) {
  std::vector<EvalReport> reports;
  reports.reserve(shapes.size());
  for (const ShapeArtifacts& s : shapes) {
    if (!s.cloud.has_labels()) throw ConfigError(s.name + ": evaluation shape has no labels");
    const Prediction pred = predict_labels(config, params, s);
    EvalReport report = mean_iou(pred.labels, s.cloud.labels, config.num_classes);
    small_part_breakdown(report);
    reports.push_back(std::move(report));
  }
  return reports;
}

SeedSweep seed_sweep(const std::string& category, std::span<const ShapeArtifacts> train,
                     std::span<const ShapeArtifacts> test, const TrainConfig& base,
                     std::span<const uint64_t> seeds, int jobs) {
  if (seeds.empty()) throw ConfigError("no seeds given");
  SeedSweep sweep;
  sweep.category = category;
  sweep.runs.resize(seeds.size());
  parallel_for(seeds.size(), jobs, [&](std::size_t i) {
    TrainConfig config = base;
    config.seed = seeds[i];
    TrainedModel model = train_fewshot(config, train);
    SeedRun& run = sweep.runs[i];
    run.seed = seeds[i];
    run.reports = evaluate_shapes(model.config, model.params, test);
    run.score = category_score(run.reports);
    run.loss_curve = std::move(model.loss_curve);
    run.train_accuracy = model.train_accuracy;
  });
  std::vector<double> miou, small, large;
  for (const SeedRun& run : sweep.runs) {
    miou.push_back(run.score.miou);
    if (run.score.small_miou) small.push_back(*run.score.small_miou);
    if (run.score.large_miou) large.push_back(*run.score.large_miou);
  }
  sweep.miou = mean_sd(miou);
  sweep.small_miou = mean_sd(small);
  sweep.large_miou = mean_sd(large);
  return sweep;
}

}  // namespace seggraph
