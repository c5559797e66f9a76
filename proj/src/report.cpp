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

#include "seggraph/report.hpp"

#include "seggraph/errors.hpp"

#include <cstdio>
#include <sstream>

namespace seggraph {

using nlohmann::json;

namespace {

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

json report_to_json(const EvalReport& report, const std::string& shape) {
  json per_class = json::array();
  for (const auto& iou : report.per_class_iou) per_class.push_back(optional_json(iou));
  json j = {{"miou", report.miou},
            {"per_class_iou", per_class},
            {"small_miou", optional_json(report.small_miou)},
            {"large_miou", optional_json(report.large_miou)},
            {"point_accuracy", report.point_accuracy},
            {"valid_points", report.valid_points},
            {"gt_counts", report.gt_counts}};
  if (!shape.empty()) j["shape"] = shape;
  return j;
}

json score_to_json(const CategoryScore& score) {
  return {{"miou", score.miou},
          {"small_miou", optional_json(score.small_miou)},
          {"large_miou", optional_json(score.large_miou)},
          {"point_accuracy", score.point_accuracy},
          {"shapes", score.shapes}};
}

json mean_sd_to_json(const MeanSd& value) {
  return {{"mean", value.mean}, {"sd", value.sd}, {"count", value.count}};
}

json sweep_to_json(const SeedSweep& sweep) {
  json runs = json::array();
  for (const SeedRun& run : sweep.runs) {
    runs.push_back({{"seed", run.seed},
                    {"score", score_to_json(run.score)},
                    {"train_accuracy", run.train_accuracy},
                    {"final_loss", run.loss_curve.empty() ? json(nullptr)
                                                          : json(run.loss_curve.back())}});
  }
  return {{"category", sweep.category},
          {"miou", mean_sd_to_json(sweep.miou)},
          {"small_miou", mean_sd_to_json(sweep.small_miou)},
          {"large_miou", mean_sd_to_json(sweep.large_miou)},
          {"runs", runs}};
}

std::string format_mean_sd(const MeanSd& value) {
  if (value.count == 0) return "n/a";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f ± %.2f", 100.0 * value.mean, 100.0 * value.sd);
  return buf;
}

std::string format_sweep_line(const SeedSweep& sweep) {
  std::ostringstream out;
  out << sweep.category << ": mIoU " << format_mean_sd(sweep.miou) << ", small "
      << format_mean_sd(sweep.small_miou) << ", large " << format_mean_sd(sweep.large_miou)
      << " (seeds ";
  for (std::size_t i = 0; i < sweep.runs.size(); ++i) out << (i ? "," : "") << sweep.runs[i].seed;
  out << ")";
  return out.str();
}

std::vector<uint64_t> parse_seed_list(const std::string& text) {
  std::vector<uint64_t> seeds;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    std::size_t used = 0;
    unsigned long long value = 0;
    try {
      value = std::stoull(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size()) throw ConfigError("malformed seed list: " + text);
    seeds.push_back(value);
  }
  if (seeds.empty()) throw ConfigError("empty seed list");
  return seeds;
}

}  // namespace seggraph
