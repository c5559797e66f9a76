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
#include <string>
#include <unordered_map>
#include <vector>

namespace seggraph::nn {

template <typename Real>
struct Parameter {
  std::string name;
  Tensor<Real> value;
  Tensor<Real> grad;
};

/// Named trainable tensors in insertion order.
template <typename Real>
class ParamStore {
 public:
  Parameter<Real>& add(std::string name, Tensor<Real> value) {
    if (index_.contains(name)) throw ConfigError("duplicate parameter name: " + name);
    index_.emplace(name, params_.size());
    Tensor<Real> grad(value.dims());
    params_.push_back({std::move(name), std::move(value), std::move(grad)});
    return params_.back();
  }

  bool contains(const std::string& name) const { return index_.contains(name); }
  Parameter<Real>& at(const std::string& name) { return params_[lookup(name)]; }
  const Parameter<Real>& at(const std::string& name) const { return params_[lookup(name)]; }

  std::vector<Parameter<Real>>& params() { return params_; }
  const std::vector<Parameter<Real>>& params() const { return params_; }
  std::size_t size() const { return params_.size(); }
  std::size_t element_count() const {
    std::size_t n = 0;
    for (const auto& p : params_) n += p.value.size();
    return n;
  }

  void zero_grad() {
    for (auto& p : params_) p.grad.fill(Real(0));
  }

  template <typename Other>
  ParamStore<Other> cast() const {
    ParamStore<Other> out;
    for (const auto& p : params_) out.add(p.name, p.value.template cast<Other>());
    return out;
  }

  bool operator==(const ParamStore& other) const {
    if (params_.size() != other.params_.size()) return false;
    for (std::size_t i = 0; i < params_.size(); ++i) {
      if (params_[i].name != other.params_[i].name || !(params_[i].value == other.params_[i].value)) {
        return false;
      }
    }
    return true;
  }

 private:
  std::size_t lookup(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw ConfigError("unknown parameter: " + name);
    return it->second;
  }

  std::vector<Parameter<Real>> params_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Tape variables bound to every parameter of a store, for one forward pass.
template <typename Real>
class BoundParams {
 public:
  BoundParams(Tape<Real>& tape, const ParamStore<Real>& store) : store_(&store) {
    vars_.reserve(store.size());
    for (const auto& p : store.params()) {
      index_.emplace(p.name, vars_.size());
      vars_.push_back(tape.variable(p.value));
    }
  }

  Var operator[](const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw ConfigError("unknown parameter: " + name);
    return vars_[it->second];
  }

  /// Adds the tape gradients of every bound parameter into `store`'s grads.
  void accumulate(const Tape<Real>& tape, ParamStore<Real>& store, Real weight = Real(1)) const {
    for (std::size_t i = 0; i < vars_.size(); ++i) {
      auto& p = store.params()[i];
      const Tensor<Real> g = tape.grad(vars_[i]);
      p.grad.mat() += weight * g.mat();
    }
  }

 private:
  const ParamStore<Real>* store_;
  std::vector<Var> vars_;
  std::unordered_map<std::string, std::size_t> index_;
};

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

template <typename Real>
struct AdamState {
  AdamConfig config;
  int64_t step = 0;
  std::vector<Tensor<Real>> first_moment;
  std::vector<Tensor<Real>> second_moment;
};

template <typename Real>
AdamState<Real> make_adam_state(const ParamStore<Real>& store, AdamConfig config = {});

/// One bias-corrected Adam update. Throws NumericError naming the parameter
/// if any gradient is non-finite (nothing is updated then). Gradients are
/// zeroed afterwards.
template <typename Real>
void adam_step(ParamStore<Real>& store, AdamState<Real>& state);

}  // namespace seggraph::nn
