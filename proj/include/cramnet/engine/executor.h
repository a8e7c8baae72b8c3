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

// Runs a network under a per-layer batch plan.
//
// Within a round, layer i runs once on B_i inputs. Its input buffer is
// filled by B_i / B_{i-1} phases of layer i-1, each writing its output
// straight into the next slice of that buffer. Memory is tracked by a
// ledger that charges activation bytes as they are written and layer
// workspace while a layer runs; the peak it records is the quantity the
// planner bounds.

#ifndef CRAMNET_ENGINE_EXECUTOR_H_
#define CRAMNET_ENGINE_EXECUTOR_H_

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "cramnet/engine/network.h"
#include "cramnet/kernels/activation.h"
#include "cramnet/planner/planner.h"

namespace cramnet::engine {

// Committed-byte counter. Acquire throws kConstraintViolation when the
// total would pass the limit.
class MemoryLedger {
 public:
  explicit MemoryLedger(
      std::uint64_t limit = std::numeric_limits<std::uint64_t>::max())
      : limit_(limit) {}

  void Acquire(std::uint64_t bytes, const std::string& what);
  void Release(std::uint64_t bytes);

  std::uint64_t current() const { return current_; }
  std::uint64_t peak() const { return peak_; }
  std::uint64_t limit() const { return limit_; }

 private:
  std::uint64_t limit_;
  std::uint64_t current_ = 0;
  std::uint64_t peak_ = 0;
};

struct RunMetrics {
  std::uint64_t peak_bytes = 0;
  double total_ms = 0.0;
  // Wall time of each round, in execution order.
  std::vector<double> round_ms;
  // Time from the start of an image's round to the end of it.
  std::vector<double> image_latency_ms;
  // Runs of each layer over the whole request.
  std::vector<std::size_t> layer_runs;

  double images_per_second() const;
};

struct RunResult {
  kernels::ActivationMatrix outputs;  // out_features x image count
  RunMetrics metrics;
};

// A plan running every layer at `batch` and covering `count` images, with
// a smaller final round for any remainder.
planner::BatchPlan ConstantPlan(const Network& net, std::size_t batch,
                                std::size_t count);

// Executes `plan` over `images` (in_features x plan.requested). The ledger
// limit is `memory_limit` when given. Throws kInvalidArgument when the plan
// does not match the network or the image count, and kConstraintViolation
// when the ledger would exceed the limit.
RunResult RunPlan(const Network& net, const planner::BatchPlan& plan,
                  kernels::ConstActivationView images,
                  std::optional<std::uint64_t> memory_limit = std::nullopt);

std::string MetricsToJson(const RunMetrics& metrics);

}  // namespace cramnet::engine

#endif  // CRAMNET_ENGINE_EXECUTOR_H_
