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

#include "seggraph/nn/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace seggraph::nn {

ScalarFunction tape_function(TapeBuilder builder) {
  return [builder = std::move(builder)](const std::vector<Tensor<double>>& inputs,
                                        std::vector<Tensor<double>>* grads) {
    Tape<double> tape;
    std::vector<Var> vars;
    vars.reserve(inputs.size());
    for (const auto& t : inputs) vars.push_back(tape.variable(t));
    const Var loss = builder(tape, vars);
    const double value = tape.value(loss)[0];
    if (grads != nullptr) {
      tape.backward(loss);
      grads->clear();
      for (Var v : vars) grads->push_back(tape.grad(v));
    }
    return value;
  };
}

GradcheckResult gradcheck(const ScalarFunction& f, std::vector<Tensor<double>> inputs,
                          const GradcheckOptions& options) {
  std::vector<Tensor<double>> analytic;
  f(inputs, &analytic);
  if (analytic.size() != inputs.size()) {
    throw ContractError("gradcheck: function returned the wrong number of gradients");
  }

  std::mt19937_64 rng(options.seed);
  GradcheckResult result;
  const double h = options.step;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    std::vector<std::size_t> coords(inputs[i].size());
    std::iota(coords.begin(), coords.end(), std::size_t{0});
    if (options.max_coords_per_input > 0 && coords.size() > options.max_coords_per_input) {
      std::shuffle(coords.begin(), coords.end(), rng);
      coords.resize(options.max_coords_per_input);
      std::sort(coords.begin(), coords.end());
    }
    for (std::size_t k : coords) {
      double& x = inputs[i][k];
      const double saved = x;
      auto eval_at = [&](double offset) -> long double {
        x = saved + offset;
        return options.reference ? options.reference(inputs) : f(inputs, nullptr);
      };
      const long double fp = eval_at(h);
      const long double fm = eval_at(-h);
      const long double fp2 = eval_at(0.5 * h);
      const long double fm2 = eval_at(-0.5 * h);
      const long double f0 = eval_at(0.0);
      x = saved;
      const double numeric = static_cast<double>((fp - fm) / (2.0L * h));
      const double numeric_half = static_cast<double>((fp2 - fm2) / static_cast<long double>(h));
      const double tol = options.kink_tolerance * std::max(1.0, std::abs(numeric));
      // A kink on the sample itself: the one-sided slopes jump independently of h.
      const double gap = static_cast<double>((fp - 2.0L * f0 + fm) / h);
      const double gap_half = static_cast<double>((fp2 - 2.0L * f0 + fm2) / (0.5L * h));
      const bool on_kink = std::abs(gap) > tol && std::abs(gap_half) > 0.75 * std::abs(gap);
      if (on_kink || std::abs(numeric - numeric_half) > tol) {
        ++result.skipped;
        continue;
      }
      const double a = analytic[i][k];
      const double err =
          std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1e-8});
      ++result.checked;
      if (err > result.max_rel_error) {
        result.max_rel_error = err;
        result.worst_input = i;
        result.worst_coord = k;
        result.worst_analytic = a;
        result.worst_numeric = numeric;
      }
    }
  }
  return result;
}

namespace {

Tensor<double> random_tensor(std::mt19937_64& rng, std::vector<std::size_t> dims,
                             double min_magnitude = 0.0) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Tensor<double> t(std::move(dims));
  for (double& x : t.vec()) {
    x = normal(rng);
    // Keep piecewise-linear ops away from their kink at zero.
    if (std::abs(x) < min_magnitude) x = std::copysign(min_magnitude, x == 0.0 ? 1.0 : x);
  }
  return t;
}

/// Reduces an op output to a scalar through a fixed random projection so
/// every output coordinate receives a distinct upstream gradient.
Var project(Tape<double>& tape, Var out, uint64_t seed) {
  std::mt19937_64 rng(seed ^ 0x5eedULL);
  const auto& v = tape.value(out);
  const Var weights = tape.constant(random_tensor(rng, v.dims()));
  return tape.sum(tape.mul(out, weights));
}

}  // namespace

std::vector<OpCheck> op_gradcheck_suite(uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<OpCheck> checks;
  auto run = [&](std::string op, std::vector<Tensor<double>> inputs, TapeBuilder build) {
    const uint64_t proj_seed = rng();
    TapeBuilder wrapped = [build = std::move(build), proj_seed](Tape<double>& tape,
                                                                const std::vector<Var>& in) {
      return project(tape, build(tape, in), proj_seed);
    };
    checks.push_back({std::move(op), gradcheck(tape_function(wrapped), std::move(inputs))});
  };

  static const std::vector<uint32_t> gather_index = {2, 0, 2, 1, 0};
  static const std::vector<uint32_t> scatter_index = {0, 2, 2, 1, 0};
  static const std::vector<uint32_t> softmax_groups = {0, 0, 1, 2, 2, 2};
  static const std::vector<uint32_t> pool_groups = {0, 1, 2, 0, 1, 2, 0, 0, 1, 2};
  static const std::vector<int32_t> labels = {0, 3, -1, 2, 1};

  run("matmul", {random_tensor(rng, {3, 4}), random_tensor(rng, {4, 3})},
      [](Tape<double>& t, const std::vector<Var>& in) { return t.matmul(in[0], in[1]); });
  run("add", {random_tensor(rng, {3, 4}), random_tensor(rng, {3, 4})},
      [](Tape<double>& t, const std::vector<Var>& in) { return t.add(in[0], in[1]); });
  run("sub", {random_tensor(rng, {3, 4}), random_tensor(rng, {3, 4})},
      [](Tape<double>& t, const std::vector<Var>& in) { return t.sub(in[0], in[1]); });
  run("mul", {random_tensor(rng, {3, 4}), random_tensor(rng, {3, 4})},
      [](Tape<double>& t, const std::vector<Var>& in) { return t.mul(in[0], in[1]); });
  run("scale", {random_tensor(rng, {3, 4})},
      [](Tape<double>& t, const std::vector<Var>& in) { return t.scale(in[0], -1.7); });
  run("add_bias", {random_tensor(rng, {3, 4}), random_tensor(rng, {1, 4})},
      [](Tape<double>& t, const std::vector<Var>& in) { return t.add_bias(in[0], in[1]); });
  run("mul_rows", {random_tensor(rng, {3, 4}), random_tensor(rng, {3, 1})},
      [](Tape<double>& t, const std::vector<Var>& in) { return t.mul_rows(in[0], in[1]); });
  run("concat_cols", {random_tensor(rng, {3, 4}), random_tensor(rng, {3, 2})},
      [](Tape<double>& t, const std::vector<Var>& in) { return t.concat_cols(in[0], in[1]); });
  run("gather_rows", {random_tensor(rng, {3, 4})},
      [](Tape<double>& t, const std::vector<Var>& in) { return t.gather_rows(in[0], gather_index); });
  run("scatter_add_rows", {random_tensor(rng, {5, 4})},
      [](Tape<double>& t, const std::vector<Var>& in) {
        return t.scatter_add_rows(in[0], scatter_index, 3);
      });
  run("relu", {random_tensor(rng, {3, 4}, 1e-2)},
      [](Tape<double>& t, const std::vector<Var>& in) { return t.relu(in[0]); });
  run("leaky_relu", {random_tensor(rng, {3, 4}, 1e-2)},
      [](Tape<double>& t, const std::vector<Var>& in) { return t.leaky_relu(in[0], 0.2); });
  run("tanh", {random_tensor(rng, {3, 4})},
      [](Tape<double>& t, const std::vector<Var>& in) { return t.tanh(in[0]); });
  run("sum", {random_tensor(rng, {3, 4})},
      [](Tape<double>& t, const std::vector<Var>& in) { return t.scale(t.sum(in[0]), 0.5); });
  run("head_dot", {random_tensor(rng, {5, 8}), random_tensor(rng, {1, 8})},
      [](Tape<double>& t, const std::vector<Var>& in) { return t.head_dot(in[0], in[1], 2); });
  run("head_scale", {random_tensor(rng, {5, 8}), random_tensor(rng, {5, 2})},
      [](Tape<double>& t, const std::vector<Var>& in) { return t.head_scale(in[0], in[1], 2); });
  run("grouped_softmax", {random_tensor(rng, {6, 2})},
      [](Tape<double>& t, const std::vector<Var>& in) {
        return t.grouped_softmax(in[0], softmax_groups, 3);
      });
  run("segmented_maxpool", {random_tensor(rng, {10, 4})},
      [](Tape<double>& t, const std::vector<Var>& in) {
        return t.segmented_maxpool(in[0], pool_groups, 3);
      });
  run("cross_entropy", {random_tensor(rng, {5, 4})},
      [](Tape<double>& t, const std::vector<Var>& in) { return t.cross_entropy(in[0], labels); });
  return checks;
}

}  // namespace seggraph::nn
