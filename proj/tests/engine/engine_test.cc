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


#include <cmath>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cramnet/codec/encoded_layer.h"
#include "cramnet/common/error.h"
#include "cramnet/engine/executor.h"
#include "cramnet/engine/network.h"
#include "cramnet/engine/network_profile.h"
#include "cramnet/engine/weights.h"
#include "cramnet/kernels/layer_ops.h"
#include "cramnet/planner/planner.h"
#include "gmock/gmock.h"
#include "gtest/gtest.h"
#include "network_fixtures.h"
#include "test_util.h"

namespace cramnet::engine {
namespace {

using ::cramnet::testing::BuildNetwork;
using ::cramnet::testing::ConvSpec;
using ::cramnet::testing::FcSpec;
using ::cramnet::testing::MaxRelError;
using ::cramnet::testing::MiniAlexNet;
using ::cramnet::testing::NetworkCosts;
using ::cramnet::testing::RandomImages;
using ::cramnet::testing::RandomNetwork;
using ::cramnet::testing::SimpleSpec;
using kernels::ActivationMatrix;
using kernels::LayerKind;
using planner::BatchPlan;
using planner::LayerCost;

ErrorCode CodeOf(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an error";
  return ErrorCode::kInvalidArgument;
}

std::string TinyNetText() {
  std::ifstream in(std::string(CRAMNET_TEST_DATA_DIR) + "/tiny_net.json");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

BatchPlan PlanFor(const std::vector<LayerCost>& costs,
                  const std::vector<std::vector<std::size_t>>& chains,
                  const std::vector<std::size_t>& rounds) {
  BatchPlan plan;
  for (std::size_t s = 0; s < chains.size(); ++s) {
    plan.segments.push_back(planner::MakeSegment(costs, chains[s], rounds[s]));
    plan.requested += chains[s].back() * rounds[s];
  }
  return plan;
}

std::vector<LayerCost> ExactCosts(const Network& net) {
  std::mt19937_64 rng(3);
  return NetworkCosts(net, {1, 2, 4, 8, 16, 32, 60, 64}, rng);
}

// ---------------------------------------------------------------------------
// Descriptors

TEST(NetworkDescriptorTest, ParsesTinyNet) {
  const NetworkDescriptor net = ParseNetwork(TinyNetText());
  EXPECT_EQ(net.name, "tiny");
  ASSERT_EQ(net.layers.size(), 10u);
  EXPECT_EQ(net.layers[2].kind, LayerKind::kLrn);
  EXPECT_EQ(net.layers[3].stride, 2u);
  ASSERT_TRUE(net.layers[7].compression.has_value());
  EXPECT_EQ(net.layers[7].compression->block_w, 64u);
  const auto shapes = net.WeightShapes();
  ASSERT_EQ(shapes.size(), 4u);
  EXPECT_EQ(shapes[0], (WeightShape{"conv1", 8, 27}));
  EXPECT_EQ(shapes[1], (WeightShape{"conv2", 16, 72}));
  EXPECT_EQ(shapes[2], (WeightShape{"fc3", 64, 256}));
  EXPECT_EQ(shapes[3], (WeightShape{"fc4", 10, 64}));
}

TEST(NetworkDescriptorTest, JsonRoundTrip) {
  const NetworkDescriptor net = ParseNetwork(TinyNetText());
  EXPECT_EQ(ParseNetwork(NetworkToJson(net)), net);
  const NetworkDescriptor mini = MiniAlexNet();
  EXPECT_EQ(ParseNetwork(NetworkToJson(mini)), mini);
}

TEST(NetworkDescriptorTest, RejectsBadDocuments) {
  EXPECT_EQ(CodeOf([] { ParseNetwork("{"); }), ErrorCode::kParse);
  EXPECT_EQ(CodeOf([] {
              ParseNetwork(R"({"name":"x","input":{"channels":1,"height":4,
                "width":4},"layers":[{"kind":"fc","out_features":2,
                "colour":1}]})");
            }),
            ErrorCode::kParse);
  EXPECT_EQ(CodeOf([] {
              ParseNetwork(R"({"name":"x","input":{"channels":1,"height":4,
                "width":4},"layers":[{"kind":"softmax"}]})");
            }),
            ErrorCode::kParse);
  EXPECT_EQ(CodeOf([] {
              ParseNetwork(R"({"name":"x","input":{"channels":1,"height":4,
                "width":4},"layers":[{"name":"a","kind":"relu"},
                {"name":"a","kind":"fc","out_features":2}]})");
            }),
            ErrorCode::kParse);
  // A 7x7 kernel does not fit a 4x4 input.
  EXPECT_EQ(CodeOf([] {
              ParseNetwork(R"({"name":"x","input":{"channels":1,"height":4,
                "width":4},"layers":[{"kind":"conv","out_channels":2,
                "kernel":7}]})");
            }),
            ErrorCode::kShapeMismatch);
}

TEST(NetworkDescriptorTest, UnnamedLayersGetKindNames) {
  const NetworkDescriptor net = ParseNetwork(
      R"({"name":"x","input":{"channels":1,"height":4,"width":4},
          "layers":[{"kind":"relu"},{"kind":"fc","out_features":3}]})");
  EXPECT_EQ(net.layers[0].name, "relu1");
  EXPECT_EQ(net.layers[1].name, "fc2");
}

TEST(CompressionSpecTest, OverridesFieldByField) {
  CompressionSpec base;
  base.prune_fraction = 0.5;
  base.quant_bits = 5;
  CompressionSpec top;
  top.quant_bits = 8;
  top.prune_threshold = 0.1f;
  const CompressionSpec merged = top.Over(base);
  EXPECT_EQ(merged.quant_bits, 8);
  EXPECT_EQ(merged.prune_threshold, 0.1f);
  // Setting one prune field replaces the other.
  EXPECT_FALSE(merged.prune_fraction.has_value());
}

TEST(CompressionSpecTest, FractionPrunesThatShare) {
  std::mt19937_64 rng(5);
  const codec::DenseMatrix w = testing::GaussianMatrix(40, 50, rng);
  CompressionSpec spec;
  spec.prune_fraction = 0.8;
  const codec::CompressionConfig config = spec.Resolve(w);
  std::size_t kept = 0;
  for (float v : w.data) kept += std::fabs(v) > config.prune_threshold;
  EXPECT_EQ(kept, 400u);
}

// ---------------------------------------------------------------------------
// Weights

TEST(WeightsTest, BlobRoundTrip) {
  const NetworkDescriptor net = ParseNetwork(TinyNetText());
  const auto weights = RandomWeights(net, 11);
  const auto back = ReadWeights(WeightManifestJson(weights), WeightBlob(weights));
  ASSERT_EQ(back.size(), weights.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    EXPECT_EQ(back[i].name, weights[i].name);
    EXPECT_EQ(back[i].matrix, weights[i].matrix);
  }
}

TEST(WeightsTest, BlobIsLittleEndianFloat32) {
  NamedWeights w{"fc", codec::DenseMatrix(1, 1)};
  w.matrix.data[0] = 1.0f;
  EXPECT_THAT(WeightBlob({w}), ::testing::ElementsAre(0x00, 0x00, 0x80, 0x3F));
}

TEST(WeightsTest, RejectsShortAndLongBlobs) {
  const NetworkDescriptor net = ParseNetwork(TinyNetText());
  const auto weights = RandomWeights(net, 2);
  const std::string manifest = WeightManifestJson(weights);
  auto blob = WeightBlob(weights);
  auto shorter = blob;
  shorter.pop_back();
  EXPECT_EQ(CodeOf([&] { ReadWeights(manifest, shorter); }),
            ErrorCode::kTruncated);
  blob.push_back(0);
  EXPECT_EQ(CodeOf([&] { ReadWeights(manifest, blob); }),
            ErrorCode::kMalformedStream);
  EXPECT_EQ(CodeOf([&] { ReadWeights("[]", blob); }), ErrorCode::kParse);
}

TEST(WeightsTest, CompressionPrecedence) {
  const NetworkDescriptor net = ParseNetwork(TinyNetText());
  const auto weights = RandomWeights(net, 4);
  // No config: descriptor settings apply.
  const codec::CompressedModel plain = CompressWeights(weights, {}, &net);
  EXPECT_EQ(plain.layers[2].block_h, 16u);
  EXPECT_EQ(plain.layers[2].block_w, 64u);
  EXPECT_LE(plain.layers[0].codebook.centers.size(), 32u);

  const CompressionPlan config = ParseCompressionPlan(
      R"({"quant_bits": 2, "layers": {"fc3": {"quant_bits": 3,
          "block_w": 128}}})");
  const codec::CompressedModel model = CompressWeights(weights, config, &net);
  // Config default beats the descriptor.
  EXPECT_LE(model.layers[0].codebook.centers.size(), 4u);
  // Config per-layer beats the config default; untouched fields stay.
  EXPECT_LE(model.layers[2].codebook.centers.size(), 8u);
  EXPECT_GT(model.layers[2].codebook.centers.size(), 4u);
  EXPECT_EQ(model.layers[2].block_h, 16u);
  EXPECT_EQ(model.layers[2].block_w, 128u);
}

TEST(WeightsTest, RejectsUnknownLayerAndWrongShape) {
  const NetworkDescriptor net = ParseNetwork(TinyNetText());
  auto weights = RandomWeights(net, 4);
  const CompressionPlan config =
      ParseCompressionPlan(R"({"layers": {"fc9": {"quant_bits": 3}}})");
  EXPECT_EQ(CodeOf([&] { CompressWeights(weights, config, &net); }),
            ErrorCode::kInvalidArgument);
  weights[1].matrix = codec::DenseMatrix(16, 71);
  EXPECT_EQ(CodeOf([&] { CompressWeights(weights, {}, &net); }),
            ErrorCode::kShapeMismatch);
  EXPECT_EQ(CodeOf([] { ParseCompressionPlan("[1]"); }), ErrorCode::kParse);
}

// ---------------------------------------------------------------------------
// Network

TEST(NetworkTest, ForwardMatchesDirectComposition) {
  NetworkDescriptor desc;
  desc.name = "composed";
  desc.input = {2, 7, 6};
  desc.compression.prune_fraction = 0.5;
  desc.layers = {ConvSpec("conv", 5, 3, 2, 1),
                 SimpleSpec("relu", LayerKind::kRelu), FcSpec("fc", 9)};
  const auto weights = RandomWeights(desc, 8);
  const codec::CompressedModel model = CompressWeights(weights, {}, &desc);
  const Network net = Network::Build(desc, model, 1);

  std::mt19937_64 rng(9);
  const ActivationMatrix in = testing::RandomActivations(84, 5, rng);
  // Reference with the decompressed weights and independent loops.
  kernels::ConvGeometry g{3, 3, 2, 1};
  ActivationMatrix hidden = testing::DirectConv(
      in, desc.input, codec::DecompressLayer(model.layers[0]), g);
  for (float& v : hidden.data) v = std::max(v, 0.0f);
  const ActivationMatrix want =
      testing::DenseGemm(codec::DecompressLayer(model.layers[1]), hidden);

  const ActivationMatrix got = net.Forward(in);
  EXPECT_EQ(got.rows, 9u);
  EXPECT_LT(MaxRelError(got, want), 1e-5);
}

TEST(NetworkTest, BuildRejectsMismatchedModel) {
  const NetworkDescriptor net = ParseNetwork(TinyNetText());
  codec::CompressedModel model =
      CompressWeights(RandomWeights(net, 1), {}, &net);
  std::swap(model.layers[0], model.layers[1]);
  EXPECT_EQ(CodeOf([&] { Network::Build(net, model, 1); }),
            ErrorCode::kShapeMismatch);
  model.layers.pop_back();
  EXPECT_EQ(CodeOf([&] { Network::Build(net, model, 1); }),
            ErrorCode::kShapeMismatch);
}

TEST(NetworkTest, ForwardIsIndependentOfBatchSize) {
  const Network net = BuildNetwork(ParseNetwork(TinyNetText()), 6);
  std::mt19937_64 rng(1);
  const ActivationMatrix in = RandomImages(net.in_features(), 7, rng);
  const ActivationMatrix all = net.Forward(in);
  for (std::size_t b = 0; b < 7; ++b) {
    const ActivationMatrix one = net.Forward(in.view().columns(b, 1));
    for (std::size_t r = 0; r < all.rows; ++r) {
      EXPECT_NEAR(one.at(r, 0), all.at(r, b), 1e-5f * (1 + std::fabs(all.at(r, b))));
    }
  }
}

// ---------------------------------------------------------------------------
// Ledger

TEST(MemoryLedgerTest, TracksPeakAndEnforcesLimit) {
  MemoryLedger ledger(100);
  ledger.Acquire(60, "a");
  ledger.Acquire(40, "b");
  EXPECT_EQ(ledger.current(), 100u);
  ledger.Release(70);
  ledger.Acquire(10, "c");
  EXPECT_EQ(ledger.current(), 40u);
  EXPECT_EQ(ledger.peak(), 100u);
  EXPECT_EQ(CodeOf([&] { ledger.Acquire(61, "d"); }),
            ErrorCode::kConstraintViolation);
}

// ---------------------------------------------------------------------------
// Executor

TEST(ExecutorTest, ConstantPlanReproducesForward) {
  const Network net = BuildNetwork(ParseNetwork(TinyNetText()), 6);
  std::mt19937_64 rng(2);
  const ActivationMatrix in = RandomImages(net.in_features(), 10, rng);
  const BatchPlan plan = ConstantPlan(net, 4, 10);
  ASSERT_EQ(plan.segments.size(), 2u);
  EXPECT_EQ(plan.segments[0].rounds, 2u);
  EXPECT_EQ(plan.segments[1].outer_batch, 2u);
  for (const auto& a : plan.segments[0].layers) EXPECT_EQ(a.phases, 1u);

  const RunResult run = RunPlan(net, plan, in);
  EXPECT_LT(MaxRelError(run.outputs, net.Forward(in)), 1e-5);
  EXPECT_EQ(run.metrics.round_ms.size(), 3u);
  EXPECT_EQ(run.metrics.image_latency_ms.size(), 10u);
  EXPECT_THAT(run.metrics.layer_runs, ::testing::Each(3u));
  EXPECT_GT(run.metrics.images_per_second(), 0.0);
}

TEST(ExecutorTest, PhasedPlanMatchesReferenceAndPlannedPeak) {
  const Network net = BuildNetwork(MiniAlexNet(), 12);
  const auto costs = ExactCosts(net);
  // Convolutions at 4, fully connected layers at 64.
  std::vector<std::size_t> chain(net.size(), 4);
  for (std::size_t i = 10; i < chain.size(); ++i) chain[i] = 64;
  const BatchPlan plan = PlanFor(costs, {chain}, {1});
  EXPECT_EQ(plan.segments[0].layers[0].phases, 16u);

  std::mt19937_64 rng(4);
  const ActivationMatrix in = RandomImages(net.in_features(), 64, rng);
  const std::uint64_t planned = planner::SimulatePeakBytes(costs, chain);
  const RunResult run = RunPlan(net, plan, in, planned);
  EXPECT_LT(MaxRelError(run.outputs, net.Forward(in)), 1e-5);
  EXPECT_EQ(run.metrics.peak_bytes, planned);
  EXPECT_EQ(run.metrics.layer_runs[0], 16u);
  EXPECT_EQ(run.metrics.layer_runs[12], 1u);

  // One byte less than planned is caught by the ledger.
  EXPECT_EQ(CodeOf([&] { RunPlan(net, plan, in, planned - 1); }),
            ErrorCode::kConstraintViolation);
}

TEST(ExecutorTest, RemainderRoundCoversEveryImage) {
  const Network net = BuildNetwork(MiniAlexNet(), 13);
  const auto costs = ExactCosts(net);
  std::vector<std::size_t> main(net.size(), 4);
  for (std::size_t i = 10; i < main.size(); ++i) main[i] = 60;
  std::vector<std::size_t> rest(net.size(), 4);
  const BatchPlan plan = PlanFor(costs, {main, rest}, {1, 1});
  ASSERT_EQ(plan.requested, 64u);

  std::mt19937_64 rng(5);
  const ActivationMatrix in = RandomImages(net.in_features(), 64, rng);
  const RunResult run = RunPlan(net, plan, in);
  EXPECT_EQ(run.outputs.batch, 64u);
  EXPECT_LT(MaxRelError(run.outputs, net.Forward(in)), 1e-5);
  EXPECT_EQ(run.metrics.peak_bytes,
            std::max(planner::SimulatePeakBytes(costs, main),
                     planner::SimulatePeakBytes(costs, rest)));
}

TEST(ExecutorTest, RandomChainsMatchReferenceAndPeak) {
  std::mt19937_64 rng(77);
  const std::vector<std::size_t> sizes = {1, 2, 4, 8};
  for (int trial = 0; trial < 25; ++trial) {
    const NetworkDescriptor desc = RandomNetwork(rng);
    const Network net = BuildNetwork(desc, rng());
    std::mt19937_64 time_rng(trial);
    const auto costs = NetworkCosts(net, sizes, time_rng);
    std::vector<std::size_t> chain;
    std::size_t b = 1;
    for (std::size_t i = 0; i < net.size(); ++i) {
      if (rng() % 3 == 0 && b < 8) b *= 2;
      chain.push_back(b);
    }
    const std::size_t rounds = 1 + rng() % 2;
    const BatchPlan plan = PlanFor(costs, {chain}, {rounds});
    const ActivationMatrix in =
        RandomImages(net.in_features(), plan.requested, rng);
    const RunResult run = RunPlan(net, plan, in);
    EXPECT_LT(MaxRelError(run.outputs, net.Forward(in)), 1e-5) << trial;
    EXPECT_EQ(run.metrics.peak_bytes, planner::SimulatePeakBytes(costs, chain))
        << trial;
  }
}

TEST(ExecutorTest, PlannerOutputRunsWithinBudget) {
  const Network net = BuildNetwork(MiniAlexNet(), 14);
  const auto costs = ExactCosts(net);
  planner::PlannerConstraints c;
  c.requested = 64;
  c.memory_step = 1024;
  c.total_memory = 3 * planner::SimulatePeakBytes(
                           costs, std::vector<std::size_t>(net.size(), 1));
  const BatchPlan plan =
      planner::PlanBatches(costs, {1, 2, 4, 8, 16, 32, 64}, c);
  std::mt19937_64 rng(6);
  const ActivationMatrix in = RandomImages(net.in_features(), 64, rng);
  const RunResult run = RunPlan(net, plan, in, c.total_memory);
  EXPECT_LE(run.metrics.peak_bytes, c.total_memory);
  EXPECT_EQ(run.metrics.peak_bytes, plan.peak_bytes());
  EXPECT_LT(MaxRelError(run.outputs, net.Forward(in)), 1e-5);
}

TEST(ExecutorTest, RejectsPlansThatDoNotFit) {
  const Network net = BuildNetwork(ParseNetwork(TinyNetText()), 6);
  std::mt19937_64 rng(2);
  const ActivationMatrix in = RandomImages(net.in_features(), 8, rng);
  const auto costs = ExactCosts(net);
  const std::vector<std::size_t> good(net.size(), 2);

  BatchPlan wrong_count = PlanFor(costs, {good}, {3});
  EXPECT_EQ(CodeOf([&] { RunPlan(net, wrong_count, in); }),
            ErrorCode::kInvalidArgument);

  BatchPlan renamed = PlanFor(costs, {good}, {4});
  renamed.segments[0].layers[3].layer = "other";
  EXPECT_EQ(CodeOf([&] { RunPlan(net, renamed, in); }),
            ErrorCode::kInvalidArgument);

  BatchPlan short_plan = PlanFor(costs, {good}, {4});
  short_plan.segments[0].layers.pop_back();
  EXPECT_EQ(CodeOf([&] { RunPlan(net, short_plan, in); }),
            ErrorCode::kInvalidArgument);

  BatchPlan bad = PlanFor(costs, {good}, {4});
  bad.segments[0].layers[1].batch = 3;
  EXPECT_EQ(CodeOf([&] { RunPlan(net, bad, in); }),
            ErrorCode::kInvalidArgument);
}

TEST(ExecutorTest, MetricsJsonHasPeak) {
  RunMetrics m;
  m.peak_bytes = 1234;
  m.total_ms = 10;
  m.round_ms = {10};
  m.image_latency_ms = {10, 10};
  m.layer_runs = {1};
  EXPECT_THAT(MetricsToJson(m), ::testing::HasSubstr("1234"));
}

// ---------------------------------------------------------------------------
// Profiling

TEST(NetworkProfileTest, RecordsEveryLayerWithExactMemory) {
  const Network net = BuildNetwork(ParseNetwork(TinyNetText()), 6, 2);
  profiler::ProfileOptions options;
  options.batches = {1, 2, 4};
  options.repetitions = 3;
  const profiler::ProfileStore store = ProfileNetwork(net, options, 2);
  EXPECT_EQ(store.network, "tiny");
  EXPECT_EQ(store.metadata.at("threads"), "2");
  EXPECT_TRUE(store.metadata.contains("timestamp"));
  ASSERT_EQ(store.layers.size(), net.size());
  for (std::size_t i = 0; i < net.size(); ++i) {
    const auto& p = store.layers[i];
    EXPECT_EQ(p.name, net.layer(i).name());
    EXPECT_EQ(p.ws_bytes, net.layer(i).ws_bytes());
    EXPECT_EQ(p.in_bytes_per_image(), net.layer(i).in_features() * 4);
    EXPECT_EQ(p.out_bytes_per_image(), net.layer(i).out_features() * 4);
    EXPECT_EQ(p.batches(), (std::vector<std::size_t>{1, 2, 4}));
    EXPECT_LE(p.at(1).time_ms, p.at(2).time_ms);
    EXPECT_LE(p.at(2).time_ms, p.at(4).time_ms);
  }
  EXPECT_GT(store.layers[0].ws_bytes, 0u);
  EXPECT_EQ(store.layers[1].ws_bytes, 0u);
}

}  // namespace
}  // namespace cramnet::engine
