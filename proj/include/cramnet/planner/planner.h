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

// Per-layer batch size planning under a memory budget.
//
// A plan runs layer i at batch B_i with B_1 <= ... <= B_f and B_{i-1} | B_i.
// Layer i-1 runs B_i / B_{i-1} times to fill layer i's input, so while it
// runs, layer i already holds B_i - B_{i-1} buffered inputs. A dynamic
// program over (layer, batch, reserved memory) finds the chain with the
// lowest time per image.

#ifndef CRAMNET_PLANNER_PLANNER_H_
#define CRAMNET_PLANNER_PLANNER_H_

#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cramnet/profiler/profile.h"

namespace cramnet::planner {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

struct LayerCost {
  std::string name;
  std::map<std::size_t, double> time_ms;  // batch -> time
  std::uint64_t in_per_image = 0;         // bytes
  std::uint64_t out_per_image = 0;
  std::uint64_t ws_bytes = 0;

  std::uint64_t in_bytes(std::size_t batch) const {
    return in_per_image * batch;
  }
  std::uint64_t out_bytes(std::size_t batch) const {
    return out_per_image * batch;
  }
  // Throws kInvalidArgument if the batch was not profiled.
  double time(std::size_t batch) const;
};

std::vector<LayerCost> CostsFromProfile(const profiler::ProfileStore& store);

// Batch sizes profiled for every layer.
std::vector<std::size_t> CommonBatches(const std::vector<LayerCost>& costs);

// Divisors of k together with the powers of two up to k.
std::vector<std::size_t> DefaultBatchGrid(std::size_t k);

struct PlannerConstraints {
  std::uint64_t total_memory = 0;
  std::optional<double> latency_ms;
  std::size_t requested = 1;
  std::uint64_t memory_step = 100 * 1024;

  void Validate() const;
};

// reserved + IN + WS + OUT <= total, all in bytes.
bool Feasible(const LayerCost& layer, std::size_t batch,
              std::uint64_t reserved_bytes, std::uint64_t total_memory);

// OPT(i, B, a) for every layer, grid batch and reserved-memory grid point
// a * memory_step, a in [0, G] with G = floor(TOT / memory_step). Reserved
// memory is rounded up to the grid, which can only rule plans out.
class PlanTable {
 public:
  static PlanTable Build(const std::vector<LayerCost>& costs,
                         std::vector<std::size_t> batch_grid,
                         const PlannerConstraints& constraints);

  std::size_t layer_count() const { return layers_; }
  const std::vector<std::size_t>& batch_grid() const { return grid_; }
  std::size_t memory_points() const { return points_; }
  std::uint64_t memory_step() const { return step_; }

  // Minimum time for layers 0..layer at the given grid batch, or infinity.
  double opt(std::size_t layer, std::size_t batch_index,
             std::size_t reserved_units) const;
  // Grid index of the predecessor batch, or nullopt for layer 0 and for
  // infinite cells.
  std::optional<std::size_t> predecessor(std::size_t layer,
                                         std::size_t batch_index,
                                         std::size_t reserved_units) const;
  // Exact value of the last layer's cells at zero reserved memory.
  double final_opt(std::size_t batch_index) const {
    return final_row_[batch_index];
  }

  std::uint64_t cell_count() const {
    return static_cast<std::uint64_t>(layers_) * grid_.size() * points_;
  }
  // Bytes held by the table: a 32-bit value and an 8-bit predecessor per
  // cell.
  std::uint64_t storage_bytes() const {
    return cell_count() * (sizeof(float) + sizeof(std::uint8_t));
  }

 private:
  std::size_t index(std::size_t layer, std::size_t b, std::size_t a) const {
    return (layer * grid_.size() + b) * points_ + a;
  }

  std::size_t layers_ = 0;
  std::vector<std::size_t> grid_;
  std::size_t points_ = 0;
  std::uint64_t step_ = 1;
  std::vector<float> opt_;
  std::vector<std::uint8_t> pred_;
  std::vector<double> final_row_;
};

inline constexpr std::uint8_t kNoPredecessor = 0xFF;

struct LayerAssignment {
  std::string layer;
  std::size_t batch = 0;
  // Runs of this layer per outermost batch.
  std::size_t phases = 0;
  // Time of those runs together.
  double predicted_ms = 0.0;

  bool operator==(const LayerAssignment&) const = default;
};

// One batch chain repeated `rounds` times.
struct PlanSegment {
  std::size_t outer_batch = 0;
  std::size_t rounds = 0;
  std::vector<LayerAssignment> layers;
  double round_ms = 0.0;
  std::uint64_t peak_bytes = 0;

  std::vector<std::size_t> batches() const;
  double images_per_second() const {
    return round_ms > 0.0 ? 1000.0 * static_cast<double>(outer_batch) /
                                round_ms
                          : kInfinity;
  }

  bool operator==(const PlanSegment&) const = default;
};

struct BatchPlan {
  std::size_t requested = 0;
  std::vector<PlanSegment> segments;  // the first covers most images

  double total_ms() const;
  double latency_ms() const;  // slowest round
  std::uint64_t peak_bytes() const;
  double throughput() const;  // images per second over the whole request

  bool operator==(const BatchPlan&) const = default;
};

// Peak committed bytes of one round of the chain: the input buffers of later
// layers that are still filling, plus the running layer's IN + WS + OUT.
std::uint64_t SimulatePeakBytes(const std::vector<LayerCost>& costs,
                                const std::vector<std::size_t>& batches);

// Predicted round time and footprint of a chain.
PlanSegment MakeSegment(const std::vector<LayerCost>& costs,
                        const std::vector<std::size_t>& batches,
                        std::size_t rounds);

// Chooses the outer batch B <= K minimizing OPT(f, B, 0) / B, backtracks the
// chain and re-plans any remainder K mod B the same way. Throws kInfeasible
// naming the tightest constraint when nothing fits.
BatchPlan BestPlan(const PlanTable& table, const std::vector<LayerCost>& costs,
                   const PlannerConstraints& constraints);

// Builds the table and extracts the plan.
BatchPlan PlanBatches(const std::vector<LayerCost>& costs,
                      const std::vector<std::size_t>& batch_grid,
                      const PlannerConstraints& constraints);

// Best constant batch size: every layer fits on its own at that batch and
// the round meets the latency bound.
BatchPlan FixedBatchBaseline(const std::vector<LayerCost>& costs,
                             const std::vector<std::size_t>& batch_grid,
                             const PlannerConstraints& constraints);

// Exhaustive search over every monotone, divisible chain with exact memory
// accounting. Limited to 5 layers and 8 batch sizes.
BatchPlan BruteForcePlan(const std::vector<LayerCost>& costs,
                         const std::vector<std::size_t>& batch_grid,
                         const PlannerConstraints& constraints);

}  // namespace cramnet::planner

#endif  // CRAMNET_PLANNER_PLANNER_H_
