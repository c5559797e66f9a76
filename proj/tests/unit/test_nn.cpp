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

#include "seggraph/errors.hpp"
#include "seggraph/nn/gradcheck.hpp"
#include "seggraph/nn/params.hpp"
#include "seggraph/nn/tape.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace seggraph;
using namespace seggraph::nn;

namespace {

Tensor<double> random_matrix(std::mt19937_64& rng, std::size_t r, std::size_t c) {
  std::normal_distribution<double> gauss;
  Tensor<double> t = Tensor<double>::matrix(r, c);
  for (double& x : t.vec()) x = gauss(rng);
  return t;
}

}  // namespace

TEST_SUITE("nn") {

TEST_CASE("tensor construction checks its length") {
  CHECK_THROWS_AS(Tensor<double>({2, 3}, std::vector<double>(5)), ShapeError);
  const Tensor<double> t({2, 3}, 1.5);
  CHECK(t.rows() == 2);
  CHECK(t.cols() == 3);
  CHECK(t.shape_string() == "[2x3]");
}

TEST_CASE("matmul with the identity and its gradient") {
  std::mt19937_64 rng(0);
  Tape<double> tape;
  Tensor<double> eye = Tensor<double>::matrix(3, 3);
  for (int i = 0; i < 3; ++i) eye(i, i) = 1.0;
  const Tensor<double> x = random_matrix(rng, 3, 4);
  CHECK(tape.value(tape.matmul(tape.constant(eye), tape.constant(x))) == x);

  const Var a = tape.variable(random_matrix(rng, 2, 3));
  const Tensor<double> bv = random_matrix(rng, 3, 4);
  tape.backward(tape.sum(tape.matmul(a, tape.constant(bv))));
  const Tensor<double> g = tape.grad(a);
  for (int i = 0; i < 2; ++i) {
    for (int k = 0; k < 3; ++k) {
      double want = 0.0;
      for (int j = 0; j < 4; ++j) want += bv(k, j);
      CHECK(g(i, k) == doctest::Approx(want).epsilon(1e-14));
    }
  }
}

TEST_CASE("shape mismatch names both shapes") {
  Tape<double> tape;
  const Var a = tape.constant(Tensor<double>::matrix(2, 3));
  const Var b = tape.constant(Tensor<double>::matrix(2, 3));
  try {
    tape.matmul(a, b);
    FAIL("expected a shape error");
  } catch (const ShapeError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("[2x3]") != std::string::npos);
    CHECK(std::count(msg.begin(), msg.end(), 'x') >= 2);
  }
}

TEST_CASE("relu values and gradients") {
  Tape<double> tape;
  const Var x = tape.variable(Tensor<double>({1, 2}, std::vector<double>{-1.0, 2.0}));
  const Var y = tape.relu(x);
  CHECK(tape.value(y)[0] == 0.0);
  CHECK(tape.value(y)[1] == 2.0);
  tape.backward(tape.sum(y));
  CHECK(tape.grad(x)[0] == 0.0);
  CHECK(tape.grad(x)[1] == 1.0);
}

TEST_CASE("grouped_softmax") {
  const std::vector<uint32_t> one{0};
  CHECK(grouped_softmax(Tensor<double>({1, 1}, 3.7), one, 1)[0] == doctest::Approx(1.0));
  const std::vector<uint32_t> pair{0, 0};
  const auto half = grouped_softmax(Tensor<double>({2, 1}, 0.3), pair, 1);
  CHECK(half[0] == doctest::Approx(0.5));
  CHECK(half[1] == doctest::Approx(0.5));

  const std::vector<uint32_t> triple{0, 0, 0};
  const auto s = grouped_softmax(Tensor<double>({3, 1}, std::vector<double>{1, 2, 3}), triple, 1);
  const double z = std::exp(1.0) + std::exp(2.0) + std::exp(3.0);
  for (int i = 0; i < 3; ++i) CHECK(std::abs(s[i] - std::exp(i + 1.0) / z) < 1e-12);
  CHECK(std::abs(s[0] - 0.0900) < 1e-4);
  CHECK(std::abs(s[1] - 0.2447) < 1e-4);
  CHECK(std::abs(s[2] - 0.6652) < 1e-4);

  std::mt19937_64 rng(5);
  const Tensor<double> x = random_matrix(rng, 40, 1);
  std::vector<uint32_t> groups;
  for (int i = 0; i < 40; ++i) groups.push_back(static_cast<uint32_t>((i * 7) % 6));
  // Group 6 is empty and skipped.
  const auto y = grouped_softmax(x, groups, 7);
  std::vector<double> sums(7, 0.0);
  for (int i = 0; i < 40; ++i) {
    CHECK(y[i] > 0.0);
    sums[groups[i]] += y[i];
  }
  for (int g = 0; g < 6; ++g) CHECK(std::abs(sums[g] - 1.0) < 1e-6);
}

TEST_CASE("segmented_max matches a per-group loop") {
  std::mt19937_64 rng(9);
  const Tensor<double> x = random_matrix(rng, 10, 4);
  const std::vector<uint32_t> seg{2, 0, 1, 1, 0, 2, 2, 0, 1, 1};
  const SegmentedMax<double> got = segmented_max(x, seg, 3);
  for (uint32_t g = 0; g < 3; ++g) {
    for (int c = 0; c < 4; ++c) {
      double best = -INFINITY;
      uint32_t arg = 0;
      for (uint32_t i = 0; i < 10; ++i) {
        if (seg[i] == g && x(i, c) > best) {
          best = x(i, c);
          arg = i;
        }
      }
      CHECK(got.values(g, c) == best);
      CHECK(got.argmax[g * 4 + c] == arg);
    }
  }
  const std::vector<uint32_t> ident{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  CHECK(segmented_max(x, ident, 10).values == x);
  CHECK_THROWS_AS(segmented_max(x, seg, 4), ContractError);
}

TEST_CASE("segmented_max breaks ties toward the lowest index") {
  const Tensor<double> x({3, 1}, 1.0);
  const std::vector<uint32_t> seg{0, 0, 0};
  CHECK(segmented_max(x, seg, 1).argmax[0] == 0);
}

TEST_CASE("segmented_maxpool is invariant to permutation within a group") {
  std::mt19937_64 rng(2);
  const Tensor<double> x = random_matrix(rng, 6, 3);
  Tensor<double> y = x;
  for (int c = 0; c < 3; ++c) std::swap(y(0, c), y(2, c));
  const std::vector<uint32_t> seg{0, 1, 0, 1, 0, 1};
  CHECK(segmented_max(x, seg, 2).values == segmented_max(y, seg, 2).values);
}

TEST_CASE("cross_entropy") {
  Tape<double> tape;
  const std::vector<int32_t> labels{0, 1, 2, 3};
  const Var uniform = tape.constant(Tensor<double>({4, 4}, 0.25));
  CHECK(tape.value(tape.cross_entropy(uniform, labels))[0] == doctest::Approx(std::log(4.0)));

  Tensor<double> peaked = Tensor<double>::matrix(2, 3, -20.0);
  peaked(0, 1) = 20.0;
  peaked(1, 2) = 20.0;
  const std::vector<int32_t> right{1, 2};
  CHECK(tape.value(tape.cross_entropy(tape.constant(peaked), right))[0] < 1e-3);

  const std::vector<int32_t> first{0, -1};
  Tensor<double> two = Tensor<double>::matrix(2, 2);
  two(0, 0) = 1.0;
  two(1, 0) = 50.0;
  const Var logits = tape.variable(two);
  const Var loss = tape.cross_entropy(logits, first);
  CHECK(std::abs(tape.value(loss)[0] - 0.3133) < 1e-4);
  tape.backward(loss);
  const double p0 = std::exp(1.0) / (std::exp(1.0) + 1.0);
  CHECK(tape.grad(logits)(0, 0) == doctest::Approx(p0 - 1.0));
  CHECK(tape.grad(logits)(1, 0) == 0.0);

  const std::vector<int32_t> none{-1, -1};
  CHECK_THROWS_AS(tape.cross_entropy(logits, none), NumericError);
  const std::vector<int32_t> bad{0, 2};
  CHECK_THROWS_AS(tape.cross_entropy(logits, bad), ShapeError);
}

TEST_CASE("adam first step and limits") {
  ParamStore<double> store;
  store.add("w", Tensor<double>({1, 3}, std::vector<double>{1.0, -2.0, 0.5}));
  AdamState<double> state = make_adam_state(store);
  auto& p = store.at("w");
  p.grad = Tensor<double>({1, 3}, std::vector<double>{1.0, 0.0, -4.0});
  adam_step(store, state);
  CHECK(std::abs(p.value[0] - (1.0 - 1e-3)) < 1e-6);
  CHECK(p.value[1] == -2.0);
  CHECK(std::abs(p.value[2] - (0.5 + 1e-3)) < 1e-6);
  CHECK(state.step == 1);
  CHECK(p.grad[0] == 0.0);

  // Zero gradient: parameter still, moments decay.
  const double m_before = state.first_moment[0][0];
  const double v_before = state.second_moment[0][0];
  const double w_before = p.value[1];
  adam_step(store, state);
  CHECK(p.value[1] == w_before);
  CHECK(state.first_moment[0][0] == doctest::Approx(0.9 * m_before));
  CHECK(state.second_moment[0][0] == doctest::Approx(0.999 * v_before));
}

TEST_CASE("adam with a constant gradient moves by lr per step") {
  ParamStore<double> store;
  store.add("w", Tensor<double>({1, 1}, 0.0));
  AdamState<double> state = make_adam_state(store);
  double last = 0.0;
  for (int i = 0; i < 500; ++i) {
    store.at("w").grad[0] = 0.37;
    last = store.at("w").value[0];
    adam_step(store, state);
  }
  CHECK(last - store.at("w").value[0] == doctest::Approx(1e-3).epsilon(1e-4));
}

TEST_CASE("adam rejects non-finite gradients with the parameter name") {
  ParamStore<double> store;
  store.add("head.weight", Tensor<double>({1, 1}, 0.0));
  AdamState<double> state = make_adam_state(store);
  store.at("head.weight").grad[0] = NAN;
  try {
    adam_step(store, state);
    FAIL("expected a numeric error");
  } catch (const NumericError& e) {
    CHECK(std::string(e.what()).find("head.weight") != std::string::npos);
  }
}

TEST_CASE("param store names are unique") {
  ParamStore<double> store;
  store.add("a", Tensor<double>({1}, 0.0));
  CHECK_THROWS_AS(store.add("a", Tensor<double>({1}, 0.0)), ConfigError);
  CHECK_THROWS_AS(store.at("b"), ConfigError);
}

TEST_CASE("gradcheck is exact on a linear function") {
  std::mt19937_64 rng(4);
  const Tensor<double> w = random_matrix(rng, 4, 1);
  const ScalarFunction f = tape_function([&](Tape<double>& tape, const std::vector<Var>& in) {
    return tape.sum(tape.matmul(in[0], tape.constant(w)));
  });
  const GradcheckResult r = gradcheck(f, {random_matrix(rng, 3, 4)});
  CHECK(r.max_rel_error < 1e-9);
  CHECK(r.checked == 12);
  CHECK(r.skipped == 0);
}

TEST_CASE("gradcheck skips coordinates on a kink") {
  const ScalarFunction f = tape_function([](Tape<double>& tape, const std::vector<Var>& in) {
    return tape.sum(tape.relu(in[0]));
  });
  const GradcheckResult r =
      gradcheck(f, {Tensor<double>({1, 3}, std::vector<double>{0.0, 0.5, -0.5})});
  CHECK(r.skipped == 1);
  CHECK(r.checked == 2);
  CHECK(r.max_rel_error < 1e-9);
}

TEST_CASE("every differentiable op passes gradcheck on seeds 0-9") {
  for (uint64_t seed = 0; seed < 10; ++seed) {
    const auto checks = op_gradcheck_suite(seed);
    CHECK(checks.size() >= 19);
    for (const OpCheck& c : checks) {
      INFO(c.op, " seed ", seed);
      CHECK(c.result.max_rel_error < 1e-4);
      CHECK(c.result.checked > 0);
    }
  }
}

TEST_CASE("32-bit and 64-bit tapes agree") {
  std::mt19937_64 rng(8);
  const Tensor<double> a = random_matrix(rng, 5, 3), b = random_matrix(rng, 3, 2);
  Tape<double> td;
  Tape<float> tf;
  const auto yd = td.value(td.tanh(td.matmul(td.constant(a), td.constant(b))));
  const auto yf = tf.value(tf.tanh(tf.matmul(tf.constant(a.cast<float>()), tf.constant(b.cast<float>()))));
  for (std::size_t i = 0; i < yd.size(); ++i) CHECK(std::abs(yd[i] - yf[i]) < 1e-5);
}

}  // TEST_SUITE
