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

#include "seggraph/metrics.hpp"
#include "seggraph/train.hpp"

#include <json.hpp>

#include <string>

namespace seggraph {

nlohmann::json report_to_json(const EvalReport& report, const std::string& shape = {});
nlohmann::json score_to_json(const CategoryScore& score);
nlohmann::json mean_sd_to_json(const MeanSd& value);
nlohmann::json sweep_to_json(const SeedSweep& sweep);

/// "72.80 ± 1.09" in percent.
std::string format_mean_sd(const MeanSd& value);

/// One human-readable line per category:
/// "<category>: mIoU m ± sd, small m ± sd, large m ± sd (seeds a,b,c)".
std::string format_sweep_line(const SeedSweep& sweep);

/// Parses "0,1,2" into seeds. Throws ConfigError on malformed input.
std::vector<uint64_t> parse_seed_list(const std::string& text);

}  // namespace seggraph
