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

#include "cramnet/planner/plan_json.h"

#include <fstream>
#include <sstream>

#include "cramnet/common/error.h"
#include "json.hpp"

namespace cramnet::planner {
namespace {

using Json = nlohmann::json;

Json LayersToJson(const std::vector<LayerAssignment>& layers) {
  Json out = Json::array();
  for (const LayerAssignment& l : layers) {
    out.push_back({{"layer", l.layer},
                   {"batch", l.batch},
                   {"phases", l.phases},
                   {"predicted_ms", l.predicted_ms}});
  }
  return out;
}

}  // namespace

std::string PlanToJson(const BatchPlan& plan,
                       const PlannerConstraints& constraints,
                       const BatchPlan* baseline) {
  Json doc;
  doc["requested"] = plan.requested;
  Json c = {{"total_memory", constraints.total_memory},
            {"memory_step", constraints.memory_step}};
  if (constraints.latency_ms) c["latency_ms"] = *constraints.latency_ms;
  doc["constraints"] = c;
  doc["layers"] = plan.segments.empty()
                      ? Json::array()
                      : LayersToJson(plan.segments.front().layers);
  doc["totals"] = {{"throughput_img_per_s", plan.throughput()},
                   {"peak_bytes", plan.peak_bytes()},
                   {"latency_ms", plan.latency_ms()},
                   {"total_ms", plan.total_ms()}};
  Json segments = Json::array();
  for (const PlanSegment& s : plan.segments) {
    segments.push_back({{"outer_batch", s.outer_batch},
                        {"rounds", s.rounds},
                        {"round_ms", s.round_ms},
                        {"peak_bytes", s.peak_bytes},
                        {"layers", LayersToJson(s.layers)}});
  }
  doc["segments"] = segments;
  if (baseline != nullptr && !baseline->segments.empty()) {
    doc["baseline"] = {{"batch", baseline->segments.front().outer_batch},
                       {"throughput_img_per_s", baseline->throughput()}};
  }
  return doc.dump(2) + "\n";
}

BatchPlan PlanFromJson(const std::string& text) {
  try {
    const Json doc = Json::parse(text);
    BatchPlan plan;
    plan.requested = doc.at("requested").get<std::size_t>();
    std::size_t covered = 0;
    for (const Json& s : doc.at("segments")) {
      PlanSegment seg;
      seg.outer_batch = s.at("outer_batch").get<std::size_t>();
      seg.rounds = s.at("rounds").get<std::size_t>();
      seg.round_ms = s.at("round_ms").get<double>();
      seg.peak_bytes = s.at("peak_bytes").get<std::uint64_t>();
      for (const Json& l : s.at("layers")) {
        LayerAssignment a;
        a.layer = l.at("layer").get<std::string>();
        a.batch = l.at("batch").get<std::size_t>();
        a.phases = l.at("phases").get<std::size_t>();
        a.predicted_ms = l.at("predicted_ms").get<double>();
        Require(a.batch >= 1 && seg.outer_batch % a.batch == 0 &&
                    a.phases == seg.outer_batch / a.batch,
                ErrorCode::kParse,
                "plan layer " + a.layer + " has inconsistent batch/phases");
        seg.layers.push_back(std::move(a));
      }
      Require(!seg.layers.empty() &&
                  seg.layers.back().batch == seg.outer_batch,
              ErrorCode::kParse,
              "plan segment must end at its outer batch");
      covered += seg.outer_batch * seg.rounds;
      plan.segments.push_back(std::move(seg));
    }
    Require(covered == plan.requested, ErrorCode::kParse,
            "plan segments cover " + std::to_string(covered) +
                " images but " + std::to_string(plan.requested) +
                " were requested");
    return plan;
  } catch (const Json::exception& e) {
    Fail(ErrorCode::kParse, std::string("bad plan JSON: ") + e.what());
  }
}

void SavePlan(const std::string& json, const std::filesystem::path& path) {
  std::ofstream out(path);
  Require(static_cast<bool>(out), ErrorCode::kIo,
          "cannot open " + path.string() + " for writing");
  out << json;
  Require(static_cast<bool>(out), ErrorCode::kIo,
          "failed writing " + path.string());
}

BatchPlan LoadPlan(const std::filesystem::path& path) {
  std::ifstream in(path);
  Require(static_cast<bool>(in), ErrorCode::kIo,
          "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return PlanFromJson(ss.str());
}

}  // namespace cramnet::planner
