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

#include "cramnet/engine/executor.h"

#include <algorithm>
#include <chrono>
#include <memory>
#include <span>

#include "cramnet/common/error.h"
#include "json.hpp"

namespace cramnet::engine {
namespace {

using kernels::ActivationView;
using kernels::ConstActivationView;
using Clock = std::chrono::steady_clock;

std::uint64_t FloatBytes(std::size_t features, std::size_t batch) {
  return static_cast<std::uint64_t>(features) * batch * sizeof(float);
}

void CheckPlan(const Network& net, const planner::BatchPlan& plan,
               std::size_t images) {
  std::size_t covered = 0;
  for (const planner::PlanSegment& s : plan.segments) {
    Require(s.layers.size() == net.size(), ErrorCode::kInvalidArgument,
            "plan has " + std::to_string(s.layers.size()) +
                " layers, network has " + std::to_string(net.size()));
    for (std::size_t i = 0; i < net.size(); ++i) {
      const planner::LayerAssignment& a = s.layers[i];
      Require(a.layer == net.layer(i).name(), ErrorCode::kInvalidArgument,
              "plan layer " + std::to_string(i) + " is '" + a.layer +
                  "', network has '" + net.layer(i).name() + "'");
      Require(a.batch >= 1, ErrorCode::kInvalidArgument,
              "plan batch sizes must be positive");
      if (i > 0) {
        Require(a.batch % s.layers[i - 1].batch == 0,
                ErrorCode::kInvalidArgument,
                "plan batch of " + a.layer +
                    " is not a multiple of its predecessor's");
      }
    }
    Require(s.layers.back().batch == s.outer_batch,
            ErrorCode::kInvalidArgument,
            "plan segment does not end at its outer batch");
    covered += s.outer_batch * s.rounds;
  }
  Require(covered == images, ErrorCode::kInvalidArgument,
          "plan covers " + std::to_string(covered) + " images, " +
              std::to_string(images) + " given");
}

// Executes one round of a batch chain.
class RoundRunner {
 public:
  RoundRunner(const Network& net, std::vector<std::size_t> batches,
              ConstActivationView images, MemoryLedger& ledger,
              std::vector<std::size_t>& runs)
      : net_(net),
        batches_(std::move(batches)),
        images_(images),
        ledger_(ledger),
        runs_(runs) {}

  // Runs layer i once, writing its batch of outputs into `out`. The output
  // bytes stay charged: they belong to the caller's input buffer.
  void Run(std::size_t i, ActivationView out, std::size_t first) {
    const kernels::Layer& layer = net_.layer(i);
    const std::size_t batch = batches_[i];
    const std::size_t features = layer.in_features();
    const std::uint64_t in_bytes = FloatBytes(features, batch);
    // Pages are committed as the phases below write them.
    auto buffer = std::make_unique_for_overwrite<float[]>(features * batch);
    const ActivationView in{features, batch,
                            std::span<float>(buffer.get(), features * batch)};
    if (i == 0) {
      ledger_.Acquire(in_bytes, layer.name() + " input");
      const ConstActivationView src = images_.columns(first, batch);
      std::copy(src.data.begin(), src.data.end(), in.data.begin());
    } else {
      const std::size_t small = batches_[i - 1];
      for (std::size_t p = 0; p < batch / small; ++p) {
        Run(i - 1, in.columns(p * small, small), first + p * small);
      }
    }
    ledger_.Acquire(layer.ws_bytes(), layer.name() + " workspace");
    ledger_.Acquire(FloatBytes(layer.out_features(), batch),
                    layer.name() + " output");
    layer.Forward(in, out, nullptr);
    ledger_.Release(layer.ws_bytes());
    ledger_.Release(in_bytes);
    ++runs_[i];
  }

 private:
  const Network& net_;
  std::vector<std::size_t> batches_;
  ConstActivationView images_;
  MemoryLedger& ledger_;
  std::vector<std::size_t>& runs_;
};

}  // namespace

void MemoryLedger::Acquire(std::uint64_t bytes, const std::string& what) {
  if (bytes > limit_ - std::min(limit_, current_) || current_ > limit_) {
    Fail(ErrorCode::kConstraintViolation,
         "memory limit exceeded: " + what + " needs " + std::to_string(bytes) +
             " bytes with " + std::to_string(current_) + " of " +
             std::to_string(limit_) + " in use");
  }
  current_ += bytes;
  peak_ = std::max(peak_, current_);
}

void MemoryLedger::Release(std::uint64_t bytes) {
  Require(bytes <= current_, ErrorCode::kInvalidArgument,
          "memory ledger released more than it holds");
  current_ -= bytes;
}

double RunMetrics::images_per_second() const {
  return total_ms > 0.0
             ? 1000.0 * static_cast<double>(image_latency_ms.size()) / total_ms
             : 0.0;
}

planner::BatchPlan ConstantPlan(const Network& net, std::size_t batch,
                                std::size_t count) {
  Require(batch >= 1, ErrorCode::kInvalidArgument, "batch must be positive");
  planner::BatchPlan plan;
  plan.requested = count;
  auto segment = [&](std::size_t b, std::size_t rounds) {
    planner::PlanSegment s;
    s.outer_batch = b;
    s.rounds = rounds;
    for (std::size_t i = 0; i < net.size(); ++i) {
      s.layers.push_back({net.layer(i).name(), b, 1, 0.0});
    }
    return s;
  };
  if (count / batch > 0) plan.segments.push_back(segment(batch, count / batch));
  if (count % batch > 0) plan.segments.push_back(segment(count % batch, 1));
  return plan;
}

RunResult RunPlan(const Network& net, const planner::BatchPlan& plan,
                  ConstActivationView images,
                  std::optional<std::uint64_t> memory_limit) {
  Require(images.rows == net.in_features(), ErrorCode::kShapeMismatch,
          "images have " + std::to_string(images.rows) +
              " features, network expects " +
              std::to_string(net.in_features()));
  CheckPlan(net, plan, images.batch);

  RunResult result;
  result.outputs = kernels::ActivationMatrix(net.out_features(), images.batch);
  RunMetrics& m = result.metrics;
  m.layer_runs.assign(net.size(), 0);
  m.image_latency_ms.assign(images.batch, 0.0);
  MemoryLedger ledger(
      memory_limit.value_or(std::numeric_limits<std::uint64_t>::max()));

  std::size_t offset = 0;
  for (const planner::PlanSegment& s : plan.segments) {
    RoundRunner runner(net, s.batches(), images, ledger, m.layer_runs);
    for (std::size_t r = 0; r < s.rounds; ++r) {
      const auto start = Clock::now();
      runner.Run(net.size() - 1,
                 result.outputs.mutable_view().columns(offset, s.outer_batch),
                 offset);
      // Finished outputs are handed to the caller.
      ledger.Release(FloatBytes(net.out_features(), s.outer_batch));
      const double ms =
          std::chrono::duration<double, std::milli>(Clock::now() - start)
              .count();
      m.round_ms.push_back(ms);
      m.total_ms += ms;
      std::fill_n(m.image_latency_ms.begin() +
                      static_cast<std::ptrdiff_t>(offset),
                  s.outer_batch, ms);
      offset += s.outer_batch;
    }
  }
  m.peak_bytes = ledger.peak();
  return result;
}

std::string MetricsToJson(const RunMetrics& m) {
  nlohmann::json doc = {{"images", m.image_latency_ms.size()},
                        {"peak_bytes", m.peak_bytes},
                        {"total_ms", m.total_ms},
                        {"throughput_img_per_s", m.images_per_second()},
                        {"round_ms", m.round_ms},
                        {"layer_runs", m.layer_runs},
                        {"image_latency_ms", m.image_latency_ms}};
  return doc.dump(2) + "\n";
}

}  // namespace cramnet::engine
