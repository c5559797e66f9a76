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

#include "seggraph/nn/params.hpp"

#include <cmath>

namespace seggraph::nn {

template <typename Real>
AdamState<Real> make_adam_state(const ParamStore<Real>& store, AdamConfig config) {
  AdamState<Real> state;
  state.config = config;
  for (const auto& p : store.params()) {
    state.first_moment.emplace_back(p.value.dims());
    state.second_moment.emplace_back(p.value.dims());
  }
  return state;
}

template <typename Real>
void adam_step(ParamStore<Real>& store, AdamState<Real>& state) {
  auto& params = store.params();
  if (state.first_moment.size() != params.size()) {
    throw ConfigError("Adam state does not match the parameter store");
  }
  for (const auto& p : params) {
    for (Real g : p.grad.vec()) {
      if (!std::isfinite(g)) throw NumericError("non-finite gradient in parameter " + p.name);
    }
  }
  const AdamConfig& cfg = state.config;
  ++state.step;
  const double correction1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
  const double correction2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
  const Real b1 = static_cast<Real>(cfg.beta1);
  const Real b2 = static_cast<Real>(cfg.beta2);
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& value = params[i].value.vec();
    auto& grad = params[i].grad.vec();
    auto& m = state.first_moment[i].vec();
    auto& v = state.second_moment[i].vec();
    for (std::size_t k = 0; k < value.size(); ++k) {
      const Real g = grad[k];
      m[k] = b1 * m[k] + (Real(1) - b1) * g;
      v[k] = b2 * v[k] + (Real(1) - b2) * g * g;
      const double m_hat = m[k] / correction1;
      const double v_hat = v[k] / correction2;
      value[k] -= static_cast<Real>(cfg.lr * m_hat / (std::sqrt(v_hat) + cfg.eps));
      grad[k] = Real(0);
    }
  }
}

template AdamState<float> make_adam_state(const ParamStore<float>&, AdamConfig);
template AdamState<double> make_adam_state(const ParamStore<double>&, AdamConfig);
template void adam_step(ParamStore<float>&, AdamState<float>&);
template void adam_step(ParamStore<double>&, AdamState<double>&);

}  // namespace seggraph::nn
