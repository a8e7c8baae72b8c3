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

#include "cramnet/planner/planner.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <set>

#include "cramnet/common/error.h"

namespace cramnet::planner {
namespace {

constexpr std::uint64_t kMaxCells = std::uint64_t{1} << 28;

std::uint64_t CeilDiv(std::uint64_t a, std::uint64_t b) {
  return a / b + (a % b != 0);
}

std::uint64_t Footprint(const LayerCost& c, std::size_t batch) {
  return c.in_bytes(batch) + c.ws_bytes + c.out_bytes(batch);
}

std::string Bytes(std::uint64_t v) { return std::to_string(v) + " bytes"; }

std::string Ms(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3f ms", v);
  return buf;
}

std::vector<std::size_t> UsableGrid(const std::vector<std::size_t>& grid,
                                    std::size_t limit) {
  std::vector<std::size_t> out;
  for (std::size_t b : grid) {
    if (b <= limit) out.push_back(b);
  }
  return out;
}

// Names the constraint that rules out every plan for `count` images.
[[noreturn]] void FailInfeasible(const std::vector<LayerCost>& costs,
                                 const std::vector<std::size_t>& grid,
                                 const PlannerConstraints& c,
                                 std::size_t count) {
  const std::vector<std::size_t> usable = UsableGrid(grid, count);
  if (usable.empty()) {
    Fail(ErrorCode::kInfeasible,
         "no profiled batch size is at most " + std::to_string(count));
  }
  const std::size_t smallest = usable.front();
  const LayerCost* worst = nullptr;
  std::uint64_t worst_need = 0;
  for (const LayerCost& layer : costs) {
    const std::uint64_t need = Footprint(layer, smallest);
    if (need > c.total_memory && need > worst_need) {
      worst = &layer;
      worst_need = need;
    }
  }
  if (worst != nullptr) {
    Fail(ErrorCode::kInfeasible,
         "memory: layer " + worst->name + " needs " + Bytes(worst_need) +
             " (input + workspace + output at batch " +
             std::to_string(smallest) + ") but the budget is " +
             Bytes(c.total_memory));
  }
  if (c.latency_ms) {
    double fastest = kInfinity;
    for (std::size_t b : usable) {
      double round = 0.0;
      for (const LayerCost& layer : costs) round += layer.time(b);
      fastest = std::min(fastest, round);
    }
    if (fastest > *c.latency_ms) {
      Fail(ErrorCode::kInfeasible,
           "latency: the fastest round takes " + Ms(fastest) +
               " but the threshold is " + Ms(*c.latency_ms));
    }
    Fail(ErrorCode::kInfeasible,
         "memory and latency: no batch chain fits in " +
             Bytes(c.total_memory) + " within " + Ms(*c.latency_ms));
  }
  Fail(ErrorCode::kInfeasible,
       "memory: no batch chain fits in " + Bytes(c.total_memory) +
           " once buffered activations and the " +
           Bytes(c.memory_step) + " grid rounding are counted");
}

void CheckInputs(const std::vector<LayerCost>& costs,
                 const std::vector<std::size_t>& grid,
                 const PlannerConstraints& constraints) {
  constraints.Validate();
  Require(!costs.empty(), ErrorCode::kInvalidArgument, "no layers to plan");
  Require(!grid.empty(), ErrorCode::kInvalidArgument, "empty batch grid");
  for (std::size_t b : grid) {
    Require(b >= 1, ErrorCode::kInvalidArgument, "batch sizes must be >= 1");
    for (const LayerCost& layer : costs) layer.time(b);
  }
}

std::vector<std::size_t> Normalize(std::vector<std::size_t> grid) {
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

// Repeatedly picks a chain for the images still unplanned.
template <typename PickChain>
BatchPlan PlanInRounds(const std::vector<LayerCost>& costs,
                       const std::vector<std::size_t>& grid,
                       const PlannerConstraints& constraints,
                       PickChain&& pick) {
  BatchPlan plan;
  plan.requested = constraints.requested;
  std::size_t remaining = constraints.requested;
  while (remaining > 0) {
    const std::optional<std::vector<std::size_t>> chain = pick(remaining);
    if (!chain) FailInfeasible(costs, grid, constraints, remaining);
    const std::size_t outer = chain->back();
    plan.segments.push_back(MakeSegment(costs, *chain, remaining / outer));
    remaining %= outer;
  }
  return plan;
}

// True if per-image time x/bx is better than y/by; ties go to the larger
// batch.
bool BetterRate(double x, std::size_t bx, double y, std::size_t by) {
  const double rx = x / static_cast<double>(bx);
  const double ry = y / static_cast<double>(by);
  return rx < ry || (rx == ry && bx > by);
}

}  // namespace

double LayerCost::time(std::size_t batch) const {
  const auto it = time_ms.find(batch);
  Require(it != time_ms.end(), ErrorCode::kInvalidArgument,
          "layer " + name + " has no time for batch " + std::to_string(batch));
  return it->second;
}

std::vector<LayerCost> CostsFromProfile(const profiler::ProfileStore& store) {
  std::vector<LayerCost> costs;
  for (const profiler::LayerProfile& p : store.layers) {
    LayerCost c;
    c.name = p.name;
    c.ws_bytes = p.ws_bytes;
    c.in_per_image = p.in_bytes_per_image();
    c.out_per_image = p.out_bytes_per_image();
    for (const auto& [b, s] : p.samples) {
      Require(s.in_bytes == c.in_per_image * b &&
                  s.out_bytes == c.out_per_image * b,
              ErrorCode::kParse,
              "layer " + p.name + ": activation bytes are not linear in batch");
      c.time_ms[b] = s.time_ms;
    }
    costs.push_back(std::move(c));
  }
  return costs;
}

std::vector<std::size_t> CommonBatches(const std::vector<LayerCost>& costs) {
  if (costs.empty()) return {};
  std::vector<std::size_t> out;
  for (const auto& [b, t] : costs.front().time_ms) {
    const bool everywhere =
        std::all_of(costs.begin(), costs.end(),
                    [b = b](const LayerCost& c) { return c.time_ms.contains(b); });
    if (everywhere) out.push_back(b);
  }
  return out;
}

std::vector<std::size_t> DefaultBatchGrid(std::size_t k) {
  std::set<std::size_t> grid;
  for (std::size_t d = 1; d <= k; ++d) {
    if (k % d == 0) grid.insert(d);
  }
  for (std::size_t p = 1; p <= k; p *= 2) grid.insert(p);
  return {grid.begin(), grid.end()};
}

void PlannerConstraints::Validate() const {
  Require(memory_step > 0, ErrorCode::kInvalidArgument,
          "memory step must be positive");
  Require(requested >= 1, ErrorCode::kInvalidArgument,
          "requested image count must be at least 1");
  Require(!latency_ms || *latency_ms > 0.0, ErrorCode::kInvalidArgument,
          "latency threshold must be positive");
}

bool Feasible(const LayerCost& layer, std::size_t batch,
              std::uint64_t reserved_bytes, std::uint64_t total_memory) {
  const std::uint64_t need = Footprint(layer, batch);
  return need <= total_memory && reserved_bytes <= total_memory - need;
}

PlanTable PlanTable::Build(const std::vector<LayerCost>& costs,
                           std::vector<std::size_t> batch_grid,
                           const PlannerConstraints& constraints) {
  batch_grid = Normalize(std::move(batch_grid));
  CheckInputs(costs, batch_grid, constraints);
  Require(batch_grid.size() < kNoPredecessor, ErrorCode::kInvalidArgument,
          "batch grid has more than 254 sizes");

  PlanTable t;
  t.layers_ = costs.size();
  t.grid_ = batch_grid;
  t.step_ = constraints.memory_step;
  const std::uint64_t top = constraints.total_memory / t.step_;
  Require(top + 1 <= kMaxCells / (t.layers_ * t.grid_.size()),
          ErrorCode::kInvalidArgument,
          "memory grid too fine: raise the memory step");
  t.points_ = static_cast<std::size_t>(top + 1);
  t.opt_.assign(t.cell_count(), std::numeric_limits<float>::infinity());
  t.pred_.assign(t.cell_count(), kNoPredecessor);

  const std::size_t nb = t.grid_.size();
  const std::size_t na = t.points_;
  const double latency = constraints.latency_ms.value_or(kInfinity);
  // Decisions use exact doubles for the previous layer; the table keeps
  // 32-bit copies.
  std::vector<double> prev(nb * na, kInfinity);
  std::vector<double> cur(nb * na, kInfinity);

  for (std::size_t i = 0; i < t.layers_; ++i) {
    const LayerCost& layer = costs[i];
    std::fill(cur.begin(), cur.end(), kInfinity);
    for (std::size_t bi = 0; bi < nb; ++bi) {
      const std::size_t batch = t.grid_[bi];
      const std::uint64_t need = Footprint(layer, batch);
      if (need > constraints.total_memory) continue;
      const std::size_t a_max = static_cast<std::size_t>(
          std::min<std::uint64_t>((constraints.total_memory - need) / t.step_,
                                  top));
      const double own = layer.time(batch);
      for (std::size_t a = 0; a <= a_max; ++a) {
        double best = kInfinity;
        std::uint8_t best_pred = kNoPredecessor;
        if (i == 0) {
          best = 0.0;
        } else {
          // Largest predecessor first so ties keep the fewest phases.
          for (std::size_t bj = bi + 1; bj-- > 0;) {
            const std::size_t small = t.grid_[bj];
            if (batch % small != 0) continue;
            const std::uint64_t a2 =
                a + CeilDiv(layer.in_bytes(batch - small), t.step_);
            if (a2 > top) continue;
            const double v = prev[bj * na + a2];
            if (v == kInfinity) continue;
            const double cand = static_cast<double>(batch / small) * v;
            if (cand < best) {
              best = cand;
              best_pred = static_cast<std::uint8_t>(bj);
            }
          }
        }
        if (best == kInfinity) continue;
        const double value = own + best;
        if (value > latency) continue;
        cur[bi * na + a] = value;
        t.opt_[t.index(i, bi, a)] = static_cast<float>(value);
        t.pred_[t.index(i, bi, a)] = best_pred;
      }
    }
    std::swap(prev, cur);
  }
  t.final_row_.resize(nb);
  for (std::size_t bi = 0; bi < nb; ++bi) t.final_row_[bi] = prev[bi * na];
  return t;
}

double PlanTable::opt(std::size_t layer, std::size_t batch_index,
                      std::size_t reserved_units) const {
  Require(layer < layers_ && batch_index < grid_.size() &&
              reserved_units < points_,
          ErrorCode::kInvalidArgument, "plan table index out of range");
  return opt_[index(layer, batch_index, reserved_units)];
}

std::optional<std::size_t> PlanTable::predecessor(
    std::size_t layer, std::size_t batch_index,
    std::size_t reserved_units) const {
  Require(layer < layers_ && batch_index < grid_.size() &&
              reserved_units < points_,
          ErrorCode::kInvalidArgument, "plan table index out of range");
  const std::uint8_t p = pred_[index(layer, batch_index, reserved_units)];
  if (p == kNoPredecessor) return std::nullopt;
  return p;
}

std::vector<std::size_t> PlanSegment::batches() const {
  std::vector<std::size_t> out;
  for (const LayerAssignment& l : layers) out.push_back(l.batch);
  return out;
}

double BatchPlan::total_ms() const {
  double total = 0.0;
  for (const PlanSegment& s : segments) {
    total += static_cast<double>(s.rounds) * s.round_ms;
  }
  return total;
}

double BatchPlan::latency_ms() const {
  double worst = 0.0;
  for (const PlanSegment& s : segments) worst = std::max(worst, s.round_ms);
  return worst;
}

std::uint64_t BatchPlan::peak_bytes() const {
  std::uint64_t peak = 0;
  for (const PlanSegment& s : segments) peak = std::max(peak, s.peak_bytes);
  return peak;
}

double BatchPlan::throughput() const {
  const double total = total_ms();
  return total > 0.0 ? 1000.0 * static_cast<double>(requested) / total
                     : kInfinity;
}

std::uint64_t SimulatePeakBytes(const std::vector<LayerCost>& costs,
                                const std::vector<std::size_t>& batches) {
  Require(costs.size() == batches.size(), ErrorCode::kInvalidArgument,
          "chain length does not match layer count");
  std::uint64_t reserved = 0;  // inputs buffered by later layers
  std::uint64_t peak = 0;
  for (std::size_t i = costs.size(); i-- > 0;) {
    peak = std::max(peak, reserved + Footprint(costs[i], batches[i]));
    if (i > 0) reserved += costs[i].in_bytes(batches[i] - batches[i - 1]);
  }
  return peak;
}

PlanSegment MakeSegment(const std::vector<LayerCost>& costs,
                        const std::vector<std::size_t>& batches,
                        std::size_t rounds) {
  Require(costs.size() == batches.size() && !batches.empty(),
          ErrorCode::kInvalidArgument, "chain length does not match layers");
  for (std::size_t i = 1; i < batches.size(); ++i) {
    Require(batches[i - 1] >= 1 && batches[i] % batches[i - 1] == 0,
            ErrorCode::kInvalidArgument,
            "batch chain must be nondecreasing with each batch dividing the "
            "next");
  }
  PlanSegment s;
  s.outer_batch = batches.back();
  s.rounds = rounds;
  for (std::size_t i = 0; i < costs.size(); ++i) {
    LayerAssignment l;
    l.layer = costs[i].name;
    l.batch = batches[i];
    l.phases = s.outer_batch / batches[i];
    l.predicted_ms = costs[i].time(batches[i]) * static_cast<double>(l.phases);
    s.round_ms += l.predicted_ms;
    s.layers.push_back(std::move(l));
  }
  s.peak_bytes = SimulatePeakBytes(costs, batches);
  return s;
}

BatchPlan BestPlan(const PlanTable& table, const std::vector<LayerCost>& costs,
                   const PlannerConstraints& constraints) {
  Require(costs.size() == table.layer_count(), ErrorCode::kInvalidArgument,
          "plan table was built for a different network");
  const auto& grid = table.batch_grid();
  const std::size_t last = table.layer_count() - 1;
  return PlanInRounds(
      costs, grid, constraints,
      [&](std::size_t remaining) -> std::optional<std::vector<std::size_t>> {
        std::optional<std::size_t> pick;
        for (std::size_t bi = 0; bi < grid.size() && grid[bi] <= remaining;
             ++bi) {
          const double v = table.final_opt(bi);
          if (v == kInfinity) continue;
          if (!pick || BetterRate(v, grid[bi], table.final_opt(*pick),
                                  grid[*pick])) {
            pick = bi;
          }
        }
        if (!pick) return std::nullopt;
        std::vector<std::size_t> chain(table.layer_count());
        std::size_t bi = *pick;
        std::size_t a = 0;
        for (std::size_t i = last; i > 0; --i) {
          chain[i] = grid[bi];
          const auto p = table.predecessor(i, bi, a);
          Require(p.has_value(), ErrorCode::kInvalidArgument,
                  "plan table has a broken predecessor chain");
          a += static_cast<std::size_t>(CeilDiv(
              costs[i].in_bytes(grid[bi] - grid[*p]), table.memory_step()));
          bi = *p;
        }
        chain[0] = grid[bi];
        return chain;
      });
}

BatchPlan PlanBatches(const std::vector<LayerCost>& costs,
                      const std::vector<std::size_t>& batch_grid,
                      const PlannerConstraints& constraints) {
  const PlanTable table = PlanTable::Build(costs, batch_grid, constraints);
  return BestPlan(table, costs, constraints);
}

BatchPlan FixedBatchBaseline(const std::vector<LayerCost>& costs,
                             const std::vector<std::size_t>& batch_grid,
                             const PlannerConstraints& constraints) {
  const std::vector<std::size_t> grid = Normalize(batch_grid);
  CheckInputs(costs, grid, constraints);
  const double latency = constraints.latency_ms.value_or(kInfinity);
  return PlanInRounds(
      costs, grid, constraints,
      [&](std::size_t remaining) -> std::optional<std::vector<std::size_t>> {
        std::optional<std::size_t> best;
        double best_round = kInfinity;
        for (std::size_t b : grid) {
          if (b > remaining) break;
          double round = 0.0;
          bool fits = true;
          for (const LayerCost& layer : costs) {
            fits = fits && Feasible(layer, b, 0, constraints.total_memory);
            round += layer.time(b);
          }
          if (!fits || round > latency) continue;
          if (!best || BetterRate(round, b, best_round, *best)) {
            best = b;
            best_round = round;
          }
        }
        if (!best) return std::nullopt;
        return std::vector<std::size_t>(costs.size(), *best);
      });
}

BatchPlan BruteForcePlan(const std::vector<LayerCost>& costs,
                         const std::vector<std::size_t>& batch_grid,
                         const PlannerConstraints& constraints) {
  const std::vector<std::size_t> grid = Normalize(batch_grid);
  CheckInputs(costs, grid, constraints);
  Require(costs.size() <= 5 && grid.size() <= 8, ErrorCode::kInvalidArgument,
          "instance too large for exhaustive search");
  const double latency = constraints.latency_ms.value_or(kInfinity);
  return PlanInRounds(
      costs, grid, constraints,
      [&](std::size_t remaining) -> std::optional<std::vector<std::size_t>> {
        std::optional<std::vector<std::size_t>> best;
        double best_round = kInfinity;
        std::vector<std::size_t> chain;
        std::function<void()> extend = [&] {
          if (chain.size() == costs.size()) {
            const std::size_t outer = chain.back();
            if (outer > remaining) return;
            if (SimulatePeakBytes(costs, chain) > constraints.total_memory) {
              return;
            }
            double round = 0.0;
            for (std::size_t i = 0; i < chain.size(); ++i) {
              round += costs[i].time(chain[i]) *
                       static_cast<double>(outer / chain[i]);
            }
            if (round > latency) return;
            if (!best || BetterRate(round, outer, best_round, best->back())) {
              best = chain;
              best_round = round;
            }
            return;
          }
          for (std::size_t b : grid) {
            if (b > remaining) break;
            if (!chain.empty() && b % chain.back() != 0) continue;
            chain.push_back(b);
            extend();
            chain.pop_back();
          }
        };
        extend();
        return best;
      });
}

}  // namespace cramnet::planner
