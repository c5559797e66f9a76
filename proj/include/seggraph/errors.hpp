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

#include <stdexcept>
#include <string>

namespace seggraph {

/// Base class of every error raised by the library. `kind()` is a stable
/// machine-parsable tag that the CLI prints as the error prefix.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

#define SEGGRAPH_DEFINE_ERROR(Name, tag)                                  \
  class Name : public Error {                                             \
   public:                                                                \
    explicit Name(const std::string& what) : Error(tag, what) {}          \
  };

SEGGRAPH_DEFINE_ERROR(DegenerateInputError, "degenerate-input")
SEGGRAPH_DEFINE_ERROR(ProjectionError, "projection-singular")
SEGGRAPH_DEFINE_ERROR(ConfigError, "config")
SEGGRAPH_DEFINE_ERROR(ShapeError, "shape")
SEGGRAPH_DEFINE_ERROR(GraphError, "graph")
SEGGRAPH_DEFINE_ERROR(ContractError, "contract")
SEGGRAPH_DEFINE_ERROR(NumericError, "numeric")
SEGGRAPH_DEFINE_ERROR(FormatError, "format")
SEGGRAPH_DEFINE_ERROR(GeometryError, "geometric-singularity")
SEGGRAPH_DEFINE_ERROR(MetricError, "undefined-metric")

#undef SEGGRAPH_DEFINE_ERROR

}  // namespace seggraph
