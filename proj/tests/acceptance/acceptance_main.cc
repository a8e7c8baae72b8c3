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


// Acceptance suite: one PASS/FAIL line per criterion, followed by the
// measurements behind it. Exits non-zero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "alexnet_fixture.h"
#include "cramnet/codec/encoded_layer.h"
#include "cramnet/codec/model_io.h"
#include "cramnet/codec/sparse_matrix.h"
#include "cramnet/common/error.h"
#include "cramnet/engine/cli.h"
#include "cramnet/engine/executor.h"
#include "cramnet/engine/network.h"
#include "cramnet/kernels/layers.h"
#include "cramnet/kernels/sparse_kernels.h"
#include "cramnet/planner/planner.h"
#include "network_fixtures.h"
#include "planner_instances.h"
#include "test_util.h"

namespace cramnet::acceptance {
namespace {

using codec::CompressionConfig;
using codec::DenseMatrix;
using codec::EncodedLayer;
using kernels::ActivationMatrix;
using planner::BatchPlan;
using planner::LayerCost;
using planner::PlannerConstraints;
using planner::PlanSegment;

using Clock = std::chrono::steady_clock;

double SecondsSince(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
  bool pass = true;
  std::string detail;
  std::vector<std::string> notes;

  void Check(bool ok, const std::string& what) {
    if (!ok) {
      if (pass) detail = what;
      pass = false;
      notes.push_back("failed: " + what);
    }
  }
  void Note(const std::string& text) { notes.push_back(text); }
};

std::string Fmt(const char* format, double a, double b = 0.0,
                double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), format, a, b, c);
  return buf;
}

template <typename T>
T Pick(const std::vector<T>& options, std::mt19937_64& rng) {
  return options[rng() % options.size()];
}

// --- 1 ---------------------------------------------------------------------

Outcome CodecRoundTrip() {
  Outcome o;
  const auto start = Clock::now();
  std::mt19937_64 rng(1001);
  int exact = 0;
  const int trials = 1000;
  for (int t = 0; t < trials; ++t) {
    const std::size_t rows = 1 + rng() % 256;
    const std::size_t cols = 1 + rng() % 256;
    const double sparsity =
        std::uniform_real_distribution<double>(0.0, 0.99)(rng);
    const DenseMatrix m =
        testing::RandomMatrix(rows, cols, sparsity, rng, t % 2 == 0);
    CompressionConfig config;
    config.index_bits = Pick<int>({2, 4, 5, 8}, rng);
    config.quant_bits = Pick<int>({1, 2, 4, 5, 8}, rng);
    config.prune_threshold =
        t % 3 == 0 ? 0.0f
                   : std::uniform_real_distribution<float>(0.0f, 0.08f)(rng);
    if (t % 4 != 0) {
      config.block_h = 1 + rng() % 64;
      config.block_w = 1 + rng() % 64;
    }
    codec::CompressedModel model;
    model.layers.push_back(codec::CompressLayer(m, config));
    const codec::CompressedModel back =
        codec::Deserialize(codec::Serialize(model));
    const DenseMatrix got = codec::DecompressLayer(back.layers.at(0));
    const DenseMatrix want = testing::PruneQuantizeOracle(
        m, config.prune_threshold, config.quant_bits);
    if (got == want) {
      ++exact;
    } else if (o.pass) {
      o.Check(false, "trial " + std::to_string(t) + " differs from oracle");
    }
  }
  const double secs = SecondsSince(start);
  o.Check(exact == trials, "not every roundtrip was exact");
  o.Check(secs < 60.0, "runtime over 60 s");
  if (o.pass) {
    o.detail = std::to_string(exact) + "/" + std::to_string(trials) +
               " exact through the model file, " + Fmt("%.1f s", secs);
  }
  return o;
}

// --- 2 ---------------------------------------------------------------------

Outcome RelativeIndexExample() {
  Outcome o;
  codec::SparseCsr row;
  row.rows = 1;
  row.cols = 12;
  row.val = {0.5f, -0.3f, 0.9f};
  row.col_ind = {0, 5, 11};
  row.row_ptr = {0, 3};
  const codec::RelativeCsr rel = codec::EncodeRelative(row, 2);
  o.Check(rel.rel_col == std::vector<std::uint32_t>{0, 3, 0, 3, 1},
          "encoded gaps are not [0,3,0,3,1]");
  o.Check(rel.val == std::vector<float>{0.5f, 0.0f, -0.3f, 0.0f, 0.9f},
          "padding zeros are not at entries 1 and 3");
  codec::RelativeCsr given;
  given.rows = 1;
  given.cols = 12;
  given.index_bits = 2;
  given.val = {0.5f, 0.0f, -0.3f, 0.0f, 0.9f};
  given.rel_col = {0, 3, 0, 3, 1};
  given.row_ptr = {0, 5};
  o.Check(codec::DecodeRelative(given) == row,
          "decoding [0,3,0,3,1] does not give columns {0,5,11}");
  if (o.pass) o.detail = "cols {0,5,11} <-> gaps [0,3,0,3,1], 2 pads";
  return o;
}

// --- 3 ---------------------------------------------------------------------

Outcome KernelEquivalence() {
  Outcome o;
  const auto start = Clock::now();
  std::mt19937_64 rng(3003);
  constexpr double kTol = 1e-5;
  double worst = 0.0;
  int fc_cases = 0;
  int conv_cases = 0;
  const std::vector<std::size_t> blocks = {16, 32, 64, 128, 0};
  for (int t = 0; t < 200; ++t) {
    const int r = Pick<int>({2, 4, 5, 8}, rng);
    const int k = Pick<int>({2, 4, 5, 8}, rng);
    const double sparsity =
        std::uniform_real_distribution<double>(0.0, 0.99)(rng);
    if (t % 4 == 3) {
      // Convolution: lowered layer against direct convolution.
      ++conv_cases;
      kernels::TensorShape in{1 + rng() % 4, 5 + rng() % 12, 5 + rng() % 12};
      const std::size_t kern = 1 + rng() % std::min<std::size_t>(5, in.height);
      kernels::ConvGeometry g{kern, kern, 1 + rng() % 2, rng() % 2};
      const std::size_t out_c = 1 + rng() % 16;
      const DenseMatrix filters = testing::RandomMatrix(
          out_c, in.channels * kern * kern, sparsity, rng, true);
      const ActivationMatrix x =
          testing::RandomActivations(in.size(), 1 + rng() % 6, rng);
      for (std::size_t b : blocks) {
        CompressionConfig config;
        config.quant_bits = r;
        config.index_bits = k;
        config.block_h = b == 0 ? filters.rows : b;
        config.block_w = b == 0 ? filters.cols : b;
        auto enc = std::make_shared<const EncodedLayer>(
            codec::CompressLayer(filters, config));
        const kernels::ConvLayer conv("conv", enc, in, g, 1);
        const ActivationMatrix ref = testing::DirectConv(
            x, in, codec::DecompressLayer(*enc), g);
        const double err = testing::MaxRelError(conv.Forward(x), ref);
        worst = std::max(worst, err);
        o.Check(err <= kTol, "conv case " + std::to_string(t) + " block " +
                                 std::to_string(b) + Fmt(" error %.2e", err));
      }
      continue;
    }
    ++fc_cases;
    const std::size_t rows = 1 + rng() % 300;
    const std::size_t cols = 1 + rng() % 300;
    const DenseMatrix m =
        testing::RandomMatrix(rows, cols, sparsity, rng, t % 2 == 0);
    const ActivationMatrix a =
        testing::RandomActivations(cols, 1 + rng() % 64, rng);
    CompressionConfig flat_config;
    flat_config.quant_bits = r;
    flat_config.index_bits = k;
    const EncodedLayer flat = codec::CompressLayer(m, flat_config);
    const ActivationMatrix ref =
        testing::DenseGemm(codec::DecompressLayer(flat), a);
    const double naive = testing::MaxRelError(kernels::InferNaive(flat, a), ref);
    worst = std::max(worst, naive);
    o.Check(naive <= kTol, "naive case " + std::to_string(t));
    for (std::size_t b : blocks) {
      CompressionConfig config = flat_config;
      config.block_h = b == 0 ? rows : b;
      config.block_w = b == 0 ? cols : b;
      const EncodedLayer enc = codec::CompressLayer(m, config);
      kernels::WorkBuffer buf(enc);
      const double err =
          testing::MaxRelError(kernels::InferBlocked(enc, a, buf), ref);
      worst = std::max(worst, err);
      o.Check(err <= kTol, "blocked case " + std::to_string(t) + " block " +
                               std::to_string(b) + Fmt(" error %.2e", err));
    }
  }
  const double secs = SecondsSince(start);
  o.Check(secs < 300.0, "runtime over 5 min");
  if (o.pass) {
    o.detail = std::to_string(fc_cases) + " fc + " +
               std::to_string(conv_cases) +
               " conv cases x 5 block sizes, worst error " +
               Fmt("%.2e, %.1f s", worst, secs);
  }
  return o;
}

// --- 4 ---------------------------------------------------------------------

Outcome AlexNetCompressionRatio() {
  Outcome o;
  const auto start = Clock::now();
  struct Shape {
    const char* name;
    std::size_t rows, cols;
    double prune;
    int quant_bits;
    bool fc;
  };
  // Filters as output channels x (input channels * kernel area).
  const Shape shapes[] = {
      {"conv1", 96, 3 * 11 * 11, 0.16, 8, false},
      {"conv2", 256, 96 * 5 * 5, 0.62, 8, false},
      {"conv3", 384, 256 * 3 * 3, 0.65, 8, false},
      {"conv4", 384, 384 * 3 * 3, 0.63, 8, false},
      {"conv5", 256, 384 * 3 * 3, 0.37, 8, false},
      {"fc6", 4096, 9216, 0.91, 5, true},
      {"fc7", 4096, 4096, 0.91, 5, true},
      {"fc8", 1000, 4096, 0.75, 5, true},
  };
  std::mt19937_64 rng(4004);
  codec::CompressedModel model;
  std::uint64_t dense_bytes = 0;
  for (const Shape& s : shapes) {
    DenseMatrix w = testing::GaussianMatrix(s.rows, s.cols, rng, 0.01f);
    w.bias = std::vector<float>(s.rows, 0.01f);
    CompressionConfig config;
    config.prune_threshold = testing::ThresholdForSparsity(w, s.prune);
    config.quant_bits = s.quant_bits;
    config.index_bits = 4;
    if (s.fc) {
      config.block_h = 128;
      config.block_w = 128;
    }
    model.layers.push_back(codec::CompressLayer(w, config));
    const std::uint64_t dense = 4 * (w.data.size() + s.rows);
    const std::uint64_t packed = codec::SerializedSize(model.layers.back());
    dense_bytes += dense;
    o.Note(std::string(s.name) +
           Fmt(": %.0f%% pruned, %.2f%% of dense", 100 * s.prune,
               100.0 * static_cast<double>(packed) / dense));
  }
  const auto file_bytes = codec::Serialize(model).size();
  const double ratio =
      static_cast<double>(file_bytes) / static_cast<double>(dense_bytes);
  o.Check(ratio < 0.10, Fmt("model is %.2f%% of dense", 100 * ratio));
  if (o.pass) {
    o.detail = Fmt("%.2f MiB of %.1f MiB dense = %.2f%%",
                   file_bytes / testing::kMiB, dense_bytes / testing::kMiB,
                   100 * ratio) +
               Fmt(" (bound 10%%, %.1f s)", SecondsSince(start));
  }
  return o;
}

// --- 5 ---------------------------------------------------------------------

Outcome DpExactness() {
  Outcome o;
  const auto start = Clock::now();
  std::mt19937_64 rng(5005);
  int feasible = 0;
  int cells = 0;
  for (int t = 0; t < 500; ++t) {
    const testing::PlanningInstance inst =
        testing::RandomPlanningInstance(rng, 4, 8);
    std::optional<BatchPlan> dp;
    std::optional<BatchPlan> brute;
    try {
      dp = planner::PlanBatches(inst.costs, inst.grid, inst.constraints);
    } catch (const Error& e) {
      o.Check(e.code() == ErrorCode::kInfeasible, e.what());
    }
    try {
      brute = planner::BruteForcePlan(inst.costs, inst.grid, inst.constraints);
    } catch (const Error& e) {
      o.Check(e.code() == ErrorCode::kInfeasible, e.what());
    }
    const std::string tag = "instance " + std::to_string(t);
    o.Check(dp.has_value() == brute.has_value(), tag + " feasibility differs");
    if (dp && brute) {
      ++feasible;
      o.Check(dp->segments.size() == brute->segments.size(),
              tag + " segment count differs");
      for (std::size_t s = 0;
           s < std::min(dp->segments.size(), brute->segments.size()); ++s) {
        const auto& d = dp->segments[s];
        const auto& b = brute->segments[s];
        o.Check(d.outer_batch == b.outer_batch && d.rounds == b.rounds,
                tag + " batches differ");
        o.Check(std::fabs(d.round_ms - b.round_ms) <= 1e-9 * b.round_ms,
                tag + " cost differs");
      }
    }
    // Sampled table cells against the recursion.
    const planner::PlanTable table =
        planner::PlanTable::Build(inst.costs, inst.grid, inst.constraints);
    for (int s = 0; s < 24; ++s) {
      const std::size_t i = rng() % inst.costs.size();
      const std::size_t bi = rng() % inst.grid.size();
      const std::size_t a = rng() % table.memory_points();
      const double want = testing::OracleOpt(inst.costs, inst.grid,
                                             inst.constraints, i,
                                             inst.grid[bi], a);
      const double got = table.opt(i, bi, a);
      const bool same = std::isinf(want)
                            ? std::isinf(got)
                            : std::fabs(got - want) <= 1e-6 * want;
      o.Check(same, tag + " cell differs from recursion");
      ++cells;
    }
  }
  const double secs = SecondsSince(start);
  o.Check(secs < 120.0, "runtime over 2 min");
  if (o.pass) {
    o.detail = "500 instances (" + std::to_string(feasible) +
               " feasible) match brute force; " + std::to_string(cells) +
               " table cells match the recursion; " + Fmt("%.1f s", secs);
  }
  return o;
}

// --- 6 ---------------------------------------------------------------------

Outcome DpDominance() {
  Outcome o;
  std::mt19937_64 rng(6006);
  int compared = 0;
  int request_worse = 0;
  double worst_request = 0.0;
  for (int t = 0; t < 500; ++t) {
    testing::PlanningInstance inst = testing::RandomPlanningInstance(rng, 6, 8);
    inst.constraints.memory_step = 1 + static_cast<std::uint64_t>(t % 5);
    std::optional<BatchPlan> base;
    try {
      base = planner::FixedBatchBaseline(inst.costs, inst.grid,
                                         inst.constraints);
    } catch (const Error&) {
      continue;
    }
    const BatchPlan dp =
        planner::PlanBatches(inst.costs, inst.grid, inst.constraints);
    ++compared;
    o.Check(dp.segments[0].images_per_second() >=
                base->segments[0].images_per_second() * (1 - 1e-12),
            "random instance " + std::to_string(t) +
                " has a slower steady-state rate than the baseline");
    if (dp.throughput() < base->throughput() * (1 - 1e-12)) {
      ++request_worse;
      worst_request = std::max(worst_request,
                               1.0 - dp.throughput() / base->throughput());
    }
  }
  o.Note(std::to_string(compared) +
         " random instances with a feasible baseline: steady-state rate >= "
         "baseline in all");
  o.Note(std::to_string(request_worse) +
         Fmt(" of them are slower over the whole request once the "
             "remainder rounds are counted (worst by %.1f%%)",
             100 * worst_request));

  const auto costs = testing::AlexNetCosts(64);
  std::string gains;
  for (double factor : {1.5, 2.0, 2.5}) {
    PlannerConstraints c;
    c.total_memory =
        static_cast<std::uint64_t>(factor * testing::kAlexNetModelBytes);
    c.requested = 64;
    const auto grid = planner::CommonBatches(costs);
    const BatchPlan dp = planner::PlanBatches(costs, grid, c);
    const BatchPlan base = planner::FixedBatchBaseline(costs, grid, c);
    const std::string tag = Fmt("%.1fx", factor);
    const double gain = dp.throughput() / base.throughput() - 1.0;
    o.Check(dp.throughput() > base.throughput(),
            tag + " plan does not beat the baseline");
    std::string chain;
    std::size_t max_conv = 0;
    bool fc_at_outer = true;
    for (const PlanSegment& s : dp.segments) {
      for (const auto& l : s.layers) {
        if (l.layer.starts_with("conv")) max_conv = std::max(max_conv, l.batch);
        if (l.layer.starts_with("fc") && l.batch != s.outer_batch) {
          fc_at_outer = false;
        }
      }
    }
    for (const auto& l : dp.segments[0].layers) {
      chain += " " + l.layer + "=" + std::to_string(l.batch);
    }
    o.Check(max_conv <= 8, tag + " plan runs a conv layer at batch " +
                               std::to_string(max_conv));
    o.Check(fc_at_outer, tag + " plan runs an fc layer below the outer batch");
    o.Note(tag + Fmt(": gain %+.1f%% over fixed batch %.0f;", 100 * gain,
                     static_cast<double>(base.segments[0].outer_batch)) +
           chain + " (" + std::to_string(dp.segments.size()) + " segment" +
           (dp.segments.size() > 1 ? "s)" : ")"));
    gains += (gains.empty() ? "" : ", ") + tag + Fmt(" %+.1f%%", 100 * gain);
  }
  if (o.pass) {
    o.detail = std::to_string(compared) +
               " random instances dominate; AlexNet fixture gains " + gains;
  } else {
    o.detail += "; AlexNet fixture gains " + gains;
  }
  return o;
}

// --- 7 ---------------------------------------------------------------------

Outcome FeasibilityAudit() {
  Outcome o;
  const auto start = Clock::now();
  std::mt19937_64 rng(7007);
  const std::vector<std::uint64_t> steps = {1, 10 * 1024, 100 * 1024,
                                            1024 * 1024};
  const std::vector<std::size_t> grid = {1, 2, 3, 4, 6, 8, 12, 16};
  int executed = 0;
  int infeasible = 0;
  int latency_checked = 0;
  for (int t = 0; t < 200; ++t) {
    const engine::NetworkDescriptor desc = testing::RandomNetwork(rng, 40);
    const engine::Network net = testing::BuildNetwork(desc, rng());
    const std::vector<LayerCost> costs =
        testing::NetworkCosts(net, grid, rng);
    PlannerConstraints base;
    base.requested = 1 + rng() % 40;
    const std::uint64_t floor = planner::SimulatePeakBytes(
        costs, std::vector<std::size_t>(costs.size(), 1));
    base.total_memory = static_cast<std::uint64_t>(
        floor * std::uniform_real_distribution<double>(0.9, 10.0)(rng));
    if (rng() % 3 == 0) {
      double single = 0.0;
      for (const LayerCost& c : costs) single += c.time(1);
      base.latency_ms =
          single * std::uniform_real_distribution<double>(0.9, 6.0)(rng);
    }
    const ActivationMatrix images =
        testing::RandomImages(net.in_features(), base.requested, rng);
    std::optional<double> exact_rate;
    for (std::uint64_t step : steps) {
      PlannerConstraints c = base;
      c.memory_step = step;
      const std::string tag =
          "instance " + std::to_string(t) + " step " + std::to_string(step);
      BatchPlan plan;
      try {
        plan = planner::PlanBatches(costs, grid, c);
      } catch (const Error& e) {
        o.Check(e.code() == ErrorCode::kInfeasible, tag + ": " + e.what());
        ++infeasible;
        continue;
      }
      for (const PlanSegment& s : plan.segments) {
        o.Check(planner::SimulatePeakBytes(costs, s.batches()) <=
                    c.total_memory,
                tag + " simulated peak over budget");
      }
      if (c.latency_ms) {
        ++latency_checked;
        o.Check(plan.latency_ms() <= *c.latency_ms,
                tag + " predicted latency over the bound");
      }
      try {
        const engine::RunResult run =
            engine::RunPlan(net, plan, images, c.total_memory);
        o.Check(run.metrics.peak_bytes <= c.total_memory,
                tag + " measured peak over budget");
        o.Check(run.metrics.peak_bytes == plan.peak_bytes(),
                tag + " measured peak differs from the simulation");
        o.Check(testing::MaxRelError(run.outputs, net.Forward(images)) <= 1e-5,
                tag + " outputs differ from a plain forward pass");
        ++executed;
      } catch (const Error& e) {
        o.Check(false, tag + ": " + e.what());
      }
      // A coarser memory grid may lose plans but never finds a faster one.
      const double rate = plan.segments[0].images_per_second();
      if (step == 1) {
        exact_rate = rate;
      } else {
        o.Check(exact_rate.has_value() && rate <= *exact_rate * (1 + 1e-9),
                tag + " beats the exact memory grid");
      }
    }
  }
  const double secs = SecondsSince(start);
  if (o.pass) {
    o.detail = std::to_string(executed) + " plans executed within budget (" +
               std::to_string(latency_checked) + " with a latency bound), " +
               std::to_string(infeasible) + " reported infeasible, " +
               Fmt("%.1f s", secs);
  }
  return o;
}

// --- 8 ---------------------------------------------------------------------

Outcome TableSize() {
  Outcome o;
  std::vector<LayerCost> costs;
  for (int i = 0; i < 14; ++i) {
    LayerCost c;
    c.name = "layer" + std::to_string(i);
    c.in_per_image = 1000;
    c.out_per_image = 1000;
    for (std::size_t b = 1; b <= 64; ++b) c.time_ms[b] = 1.0 + b;
    costs.push_back(std::move(c));
  }
  PlannerConstraints c;
  c.memory_step = 100 * 1024;
  c.total_memory = 140 * c.memory_step;
  c.requested = 64;
  std::vector<std::size_t> grid(64);
  for (std::size_t b = 0; b < grid.size(); ++b) grid[b] = b + 1;
  const planner::PlanTable table = planner::PlanTable::Build(costs, grid, c);
  const double kb = static_cast<double>(table.storage_bytes()) / 1000.0;
  o.Check(kb >= 250.0 && kb <= 1000.0,
          Fmt("%.0f KB is not within 2x of 500 KB", kb));
  o.detail = std::to_string(table.layer_count()) + " x " +
             std::to_string(table.batch_grid().size()) + " x " +
             std::to_string(table.memory_points()) + " cells x 5 B = " +
             Fmt("%.0f KB (%.2fx of 500 KB)", kb, kb / 500.0);
  return o;
}

// --- 9 ---------------------------------------------------------------------

Outcome BlockSweep() {
  Outcome o;
  const auto start = Clock::now();
  const std::filesystem::path csv =
      std::filesystem::temp_directory_path() / "cramnet_acceptance_sweep.csv";
  const std::vector<std::string> args = {
      "cramnet", "bench", "--sweep-blocks", "--rows", "4096", "--cols",
      "9216", "--prune-fraction", "0.91", "--batches", "16,256",
      "--repetitions", "3", "-o", csv.string()};
  std::vector<const char*> argv;
  for (const std::string& a : args) argv.push_back(a.c_str());
  std::ostringstream out;
  std::ostringstream err;
  const int code = engine::RunCli(static_cast<int>(argv.size()), argv.data(),
                                  out, err);
  o.Check(code == 0, "bench exited with " + std::to_string(code) + ": " +
                         err.str());
  if (!o.pass) return o;

  struct Row {
    std::size_t block, batch;
    double decode, compute;
    std::uint64_t ws;
  };
  std::vector<Row> rows;
  std::ifstream in(csv);
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    Row r{};
    double total = 0;
    unsigned long long decoded = 0;
    unsigned long long ws = 0;
    std::sscanf(line.c_str(), "%zu,%zu,%lf,%lf,%lf,%llu,%llu", &r.block,
                &r.batch, &r.decode, &r.compute, &total, &ws, &decoded);
    r.ws = ws;
    rows.push_back(r);
  }
  std::filesystem::remove(csv);

  double decode16 = 0, compute16 = 0, decode256 = 0, compute256 = 0;
  int compute_wins = 0;
  int blocks = 0;
  std::uint64_t last_ws = 0;
  for (const Row& r : rows) {
    if (r.batch == 16) {
      decode16 += r.decode;
      compute16 += r.compute;
      o.Check(r.decode > r.compute, "decode does not dominate at B=16, block " +
                                        std::to_string(r.block));
      o.Check(r.ws > last_ws, "ws_bytes does not grow at block " +
                                  std::to_string(r.block));
      last_ws = r.ws;
    } else {
      ++blocks;
      decode256 += r.decode;
      compute256 += r.compute;
      compute_wins += r.compute > r.decode;
    }
    o.Note(Fmt("block %.0f B=%.0f: ", static_cast<double>(r.block),
               static_cast<double>(r.batch)) +
           Fmt("decode %.0f ms, compute %.0f ms, ", r.decode, r.compute) +
           "ws " + std::to_string(r.ws) + " B");
  }
  o.Check(compute256 > decode256, "compute does not dominate at B=256");
  if (o.pass) {
    o.detail = Fmt("decode share %.0f%% at B=16, %.0f%% at B=256; ",
                   100 * decode16 / (decode16 + compute16),
                   100 * decode256 / (decode256 + compute256)) +
               "compute leads at B=256 for " + std::to_string(compute_wins) +
               "/" + std::to_string(blocks) + " blocks; ws grows " +
               "monotonically; " + Fmt("%.0f s", SecondsSince(start));
  }
  return o;
}

}  // namespace
}  // namespace cramnet::acceptance

// With arguments, runs only the listed criterion numbers.
int main(int argc, char** argv) {
  using cramnet::acceptance::Outcome;
  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
  };
  const Criterion criteria[] = {
      {1, "codec roundtrip", cramnet::acceptance::CodecRoundTrip},
      {2, "relative index example", cramnet::acceptance::RelativeIndexExample},
      {3, "kernel equivalence", cramnet::acceptance::KernelEquivalence},
      {4, "compression ratio", cramnet::acceptance::AlexNetCompressionRatio},
      {5, "planner exactness", cramnet::acceptance::DpExactness},
      {6, "planner dominance", cramnet::acceptance::DpDominance},
      {7, "feasibility audit", cramnet::acceptance::FeasibilityAudit},
      {8, "table size", cramnet::acceptance::TableSize},
      {9, "block sweep", cramnet::acceptance::BlockSweep},
  };
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) selected.push_back(std::atoi(argv[i]));
  int failures = 0;
  int ran = 0;
  for (const Criterion& c : criteria) {
    if (!selected.empty() &&
        std::find(selected.begin(), selected.end(), c.id) == selected.end()) {
      continue;
    }
    ++ran;
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    failures += o.pass ? 0 : 1;
    std::cout << (o.pass ? "PASS" : "FAIL") << " " << c.id << " " << c.name
              << ": " << o.detail << "\n";
    for (const std::string& n : o.notes) std::cout << "    " << n << "\n";
    std::cout.flush();
  }
  std::cout << (ran - failures) << "/" << ran << " criteria passed\n";
  return failures == 0 ? 0 : 1;
}
