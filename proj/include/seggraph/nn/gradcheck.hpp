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

#include "seggraph/nn/tape.hpp"
#include "seggraph/nn/tensor.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace seggraph::nn {

/// Scalar function of several tensors. When `grads` is non-null it must be
/// filled with the analytic gradient of every input.
using ScalarFunction = std::function<double(const std::vector<Tensor<double>>& inputs,
                                            std::vector<Tensor<double>>* grads)>;

/// Value-only evaluation of the same function in extended precision.
using ReferenceFunction = std::function<long double(const std::vector<Tensor<double>>& inputs)>;

/// Builds the loss on a fresh tape from one variable per input.
using TapeBuilder = std::function<Var(Tape<double>& tape, const std::vector<Var>& inputs)>;

ScalarFunction tape_function(TapeBuilder builder);

struct GradcheckOptions {
  double step = 1e-5;
  /// 0 checks every coordinate; otherwise a seeded sample per input.
  std::size_t max_coords_per_input = 0;
  uint64_t seed = 0;
  /// A coordinate whose central differences at h and h/2 disagree by more
  /// than this (relative to max(1, |derivative|)), or whose one-sided
  /// differences jump by more than this, sits on or near a kink of a
  /// piecewise-smooth op (ReLU, max-pool routing) and is skipped.
  double kink_tolerance = 1e-7;
  /// When set, the finite differences are taken on this function instead of
  /// `f`, which still supplies the analytic gradient.
  ReferenceFunction reference;
};

struct GradcheckResult {
  double max_rel_error = 0.0;
  std::size_t checked = 0;
  std::size_t skipped = 0;
  std::size_t worst_input = 0;
  std::size_t worst_coord = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
};

/// Central differences vs the analytic gradient. Relative error per
/// coordinate is |a - n| / max(|a|, |n|, 1e-8).
GradcheckResult gradcheck(const ScalarFunction& f, std::vector<Tensor<double>> inputs,
                          const GradcheckOptions& options = {});

struct OpCheck {
  std::string op;
  GradcheckResult result;
};

/// Gradient check of every differentiable tape op on random inputs drawn
/// from `seed` (3x4 base shape, grouped ops on small random groupings).
std::vector<OpCheck> op_gradcheck_suite(uint64_t seed);

}  // namespace seggraph::nn
