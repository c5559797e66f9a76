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

#include "seggraph/model.hpp"
#include "seggraph/nn/gradcheck.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace seggraph {

/// Restricts a preprocessed shape to `keep` (sorted point ids). Segments are
/// clipped to the kept points, dropped when they fall below `min_points`, and
/// the graph is rebuilt on the reduced cloud.
ShapeArtifacts subset_shape(const ShapeArtifacts& shape, std::span<const uint32_t> keep,
                            std::size_t min_points = 1);

/// A small labeled synthetic shape (at most `max_points` points and
/// `max_segments` segments) carved out of a 100-point generated shape.
ShapeArtifacts make_gradcheck_shape(uint64_t seed, std::size_t max_points = 60,
                                    std::size_t max_segments = 10);

struct ModelCheck {
  std::string name;
  nn::GradcheckResult result;
  double seconds = 0.0;
};

/// End-to-end loss gradient checks: analytic gradients in 64-bit against
/// central differences of the loss evaluated in extended precision. The
/// default-width model is checked on a seeded sample of coordinates per
/// parameter tensor, a narrow model on every coordinate.
std::vector<ModelCheck> model_gradcheck_suite(uint64_t seed, std::size_t sampled_coords = 4);

}  // namespace seggraph
