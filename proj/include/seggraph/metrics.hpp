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

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace seggraph {

inline constexpr double kSmallPartFraction = 0.05;

struct EvalReport {
  std::vector<std::optional<double>> per_class_iou;  // nullopt: class absent from pred and gt
  double miou = 0.0;
  std::optional<double> small_miou;
  std::optional<double> large_miou;
  double point_accuracy = 0.0;
  std::size_t valid_points = 0;
  std::vector<std::size_t> gt_counts;
};

/// Per-shape mIoU over classes with TP + FP + FN > 0. Points with gt = -1 are
/// skipped. Throws MetricError when no valid point remains.
EvalReport mean_iou(std::span<const int32_t> pred, std::span<const int32_t> gt, int num_classes);

/// Splits the report's classes into small (gt fraction below
/// `small_fraction`) and large, and fills small_miou / large_miou.
void small_part_breakdown(EvalReport& report, double small_fraction = kSmallPartFraction);

struct CategoryScore {
  double miou = 0.0;
  std::optional<double> small_miou;  // mean over shapes that have small classes
  std::optional<double> large_miou;
  double point_accuracy = 0.0;
  std::size_t shapes = 0;
};

/// Mean of per-shape scores.
CategoryScore category_score(std::span<const EvalReport> reports);

struct MeanSd {
  double mean = 0.0;
  double sd = 0.0;  // sample standard deviation, 0 for a single value
  std::size_t count = 0;
};

MeanSd mean_sd(std::span<const double> values);

struct PcaResult {
  Eigen::MatrixXd components;     // C x 3, columns by decreasing eigenvalue
  Eigen::Vector3d eigenvalues;
  int rank = 0;                   // number of components with nonzero variance
  std::vector<Vec3> colors;       // N colors in [0, 1]
};

/// Top-3 principal components of the rows of `features` (N x C row-major),
/// sign-fixed so each component's largest-magnitude entry is positive, then
/// min-max normalized per channel. Channels beyond the rank are 0.5.
PcaResult export_pca_colors(std::span<const double> features, std::size_t rows, std::size_t cols);

/// ASCII PLY with float positions and uchar colors.
void write_color_ply(const std::string& path, std::span<const Vec3> positions,
                     std::span<const Vec3> colors);

}  // namespace seggraph
