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

#include "seggraph/metrics.hpp"

#include "seggraph/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <fstream>

namespace seggraph {

EvalReport mean_iou(std::span<const int32_t> pred, std::span<const int32_t> gt, int num_classes) {
  if (pred.size() != gt.size()) {
    throw ShapeError("prediction has " + std::to_string(pred.size()) + " labels, ground truth " +
                     std::to_string(gt.size()));
  }
  if (num_classes <= 0) throw ConfigError("num_classes must be positive");
  const auto k = static_cast<std::size_t>(num_classes);
  std::vector<std::size_t> tp(k, 0), fp(k, 0), fn(k, 0);
  EvalReport report;
  report.gt_counts.assign(k, 0);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    const int32_t g = gt[i];
    const int32_t p = pred[i];
    if (g == kIgnoreLabel) continue;
    if (g < 0 || g >= num_classes) throw ContractError("ground-truth label out of range");
    if (p < -1 || p >= num_classes) throw ContractError("predicted label out of range");
    ++report.valid_points;
    ++report.gt_counts[g];
    if (p == g) {
      ++tp[g];
      ++correct;
    } else {
      ++fn[g];
      if (p >= 0) ++fp[p];
    }
  }
  if (report.valid_points == 0) throw MetricError("no labeled points to evaluate");
  report.per_class_iou.resize(k);
  // Accumulated in extended precision and rounded once.
  long double sum = 0.0L;
  std::size_t present = 0;
  for (std::size_t c = 0; c < k; ++c) {
    const std::size_t denom = tp[c] + fp[c] + fn[c];
    if (denom == 0) continue;
    const long double iou = static_cast<long double>(tp[c]) / static_cast<long double>(denom);
    report.per_class_iou[c] = static_cast<double>(iou);
    sum += iou;
    ++present;
  }
  report.miou = static_cast<double>(sum / static_cast<long double>(present));
  report.point_accuracy = static_cast<double>(correct) / static_cast<double>(report.valid_points);
  return report;
}

void small_part_breakdown(EvalReport& report, double small_fraction) {
  double small_sum = 0.0, large_sum = 0.0;
  std::size_t small_n = 0, large_n = 0;
  for (std::size_t c = 0; c < report.gt_counts.size(); ++c) {
    if (report.gt_counts[c] == 0 || !report.per_class_iou[c]) continue;
    const double fraction =
        static_cast<double>(report.gt_counts[c]) / static_cast<double>(report.valid_points);
    if (fraction < small_fraction) {
      small_sum += *report.per_class_iou[c];
      ++small_n;
    } else {
      large_sum += *report.per_class_iou[c];
      ++large_n;
    }
  }
  report.small_miou.reset();
  report.large_miou.reset();
  if (small_n > 0) report.small_miou = small_sum / static_cast<double>(small_n);
  if (large_n > 0) report.large_miou = large_sum / static_cast<double>(large_n);
}

CategoryScore category_score(std::span<const EvalReport> reports) {
  CategoryScore score;
  score.shapes = reports.size();
  if (reports.empty()) throw MetricError("no shapes to score");
  double small_sum = 0.0, large_sum = 0.0;
  std::size_t small_n = 0, large_n = 0;
  for (const EvalReport& r : reports) {
    score.miou += r.miou;
    score.point_accuracy += r.point_accuracy;
    if (r.small_miou) {
      small_sum += *r.small_miou;
      ++small_n;
    }
    if (r.large_miou) {
      large_sum += *r.large_miou;
      ++large_n;
    }
  }
  score.miou /= static_cast<double>(reports.size());
  score.point_accuracy /= static_cast<double>(reports.size());
  if (small_n > 0) score.small_miou = small_sum / static_cast<double>(small_n);
  if (large_n > 0) score.large_miou = large_sum / static_cast<double>(large_n);
  return score;
}

MeanSd mean_sd(std::span<const double> values) {
  MeanSd out;
  out.count = values.size();
  if (values.empty()) return out;
  for (double v : values) out.mean += v;
  out.mean /= static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - out.mean) * (v - out.mean);
    out.sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return out;
}

PcaResult export_pca_colors(std::span<const double> features, std::size_t rows, std::size_t cols) {
  if (rows < 3) throw DegenerateInputError("PCA export needs at least 3 points");
  if (features.size() != rows * cols) throw ShapeError("feature matrix size does not match dims");
  using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const Eigen::Map<const RowMajor> x(features.data(), rows, cols);
  const Eigen::RowVectorXd mean = x.colwise().mean();
  const Eigen::MatrixXd centered = x.rowwise() - mean;
  const Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(rows - 1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  if (solver.info() != Eigen::Success) throw NumericError("covariance eigen-decomposition failed");

  PcaResult out;
  out.components = Eigen::MatrixXd::Zero(cols, 3);
  out.eigenvalues.setZero();
  const double scale = std::max(1.0, std::abs(solver.eigenvalues()(cols - 1)));
  const double tol = 1e-12 * scale * static_cast<double>(cols);
  for (int k = 0; k < 3 && k < static_cast<int>(cols); ++k) {
    const Eigen::Index idx = static_cast<Eigen::Index>(cols) - 1 - k;
    const double lambda = solver.eigenvalues()(idx);
    if (lambda <= tol) break;
    Eigen::VectorXd v = solver.eigenvectors().col(idx);
    Eigen::Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v(arg) < 0) v = -v;
    out.components.col(k) = v;
    out.eigenvalues(k) = lambda;
    ++out.rank;
  }

  const Eigen::MatrixXd projected = centered * out.components;
  out.colors.assign(rows, Vec3::Constant(0.5));
  for (int k = 0; k < out.rank; ++k) {
    const double lo = projected.col(k).minCoeff();
    const double hi = projected.col(k).maxCoeff();
    if (!(hi > lo)) continue;
    for (std::size_t i = 0; i < rows; ++i) {
      out.colors[i][k] = (projected(static_cast<Eigen::Index>(i), k) - lo) / (hi - lo);
    }
  }
  return out;
}

void write_color_ply(const std::string& path, std::span<const Vec3> positions,
                     std::span<const Vec3> colors) {
  if (positions.size() != colors.size()) throw ShapeError("PLY positions and colors differ in size");
  std::ofstream out(path);
  if (!out) throw FormatError("cannot open " + path + " for writing");
  out << "ply\nformat ascii 1.0\nelement vertex " << positions.size()
      << "\nproperty float x\nproperty float y\nproperty float z\n"
         "property uchar red\nproperty uchar green\nproperty uchar blue\nend_header\n";
  for (std::size_t i = 0; i < positions.size(); ++i) {
    const Vec3& p = positions[i];
    out << static_cast<float>(p.x()) << ' ' << static_cast<float>(p.y()) << ' '
        << static_cast<float>(p.z());
    for (int c = 0; c < 3; ++c) {
      const double v = std::clamp(colors[i][c], 0.0, 1.0);
      out << ' ' << static_cast<int>(std::lround(v * 255.0));
    }
    out << '\n';
  }
  if (!out) throw FormatError("failed writing " + path);
}

}  // namespace seggraph
