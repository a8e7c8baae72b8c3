// Copyright 2026 The CramNet Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// JSON form of a BatchPlan:
//
//   {
//     "requested": 64,
//     "constraints": {"total_memory": ..., "memory_step": ...,
//                     "latency_ms": ... (optional)},
//     "layers": [{"layer", "batch", "phases", "predicted_ms"}, ...],
//     "totals": {"throughput_img_per_s", "peak_bytes", "latency_ms",
//                "total_ms"},
//     "segments": [{"outer_batch", "rounds", "round_ms", "peak_bytes",
//                   "layers": [...]}, ...],
//     "baseline": {"batch", "throughput_img_per_s"} (optional)
//   }
//
// "layers" repeats the first segment, which covers most of the request.

#ifndef CRAMNET_PLANNER_PLAN_JSON_H_
#define CRAMNET_PLANNER_PLAN_JSON_H_

#include <filesystem>
#include <string>

#include "cramnet/planner/planner.h"

namespace cramnet::planner {

std::string PlanToJson(const BatchPlan& plan,
                       const PlannerConstraints& constraints,
                       const BatchPlan* baseline = nullptr);

// Reads the segments back. Throws kParse on malformed documents.
BatchPlan PlanFromJson(const std::string& text);

void SavePlan(const std::string& json, const std::filesystem::path& path);
BatchPlan LoadPlan(const std::filesystem::path& path);

}  // namespace cramnet::planner

#endif  // CRAMNET_PLANNER_PLAN_JSON_H_
