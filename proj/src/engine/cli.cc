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

#include "cramnet/engine/cli.h"

#include <algorithm>
#include <bit>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cramnet/codec/model_io.h"
#include "cramnet/common/error.h"
#include "cramnet/common/threading.h"
#include "cramnet/engine/executor.h"
#include "cramnet/engine/network.h"
#include "cramnet/engine/network_profile.h"
#include "cramnet/engine/weights.h"
#include "cramnet/planner/plan_json.h"
#include "cramnet/planner/planner.h"
#include "cramnet/profiler/block_sweep.h"
#include "cramnet/profiler/profile.h"
#include "json.hpp"

namespace cramnet::engine {
namespace {

namespace fs = std::filesystem;

std::string ReadText(const fs::path& path) {
  std::ifstream in(path);
  Require(static_cast<bool>(in), ErrorCode::kIo,
          "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void WriteText(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  Require(static_cast<bool>(out), ErrorCode::kIo,
          "cannot open " + path.string() + " for writing");
  out << text;
  Require(out.good(), ErrorCode::kIo, "failed writing " + path.string());
}

std::string Format(const char* fmt, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), fmt, v);
  return buf;
}

// Images are raw little-endian f32 files (*.f32) in name order.
kernels::ActivationMatrix ReadImages(const fs::path& dir,
                                     std::size_t features,
                                     std::vector<std::string>& names) {
  Require(fs::is_directory(dir), ErrorCode::kIo,
          dir.string() + " is not a directory");
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".f32") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  Require(!files.empty(), ErrorCode::kIo,
          "no .f32 images in " + dir.string());
  kernels::ActivationMatrix images(features, files.size());
  for (std::size_t n = 0; n < files.size(); ++n) {
    std::ifstream in(files[n], std::ios::binary);
    Require(static_cast<bool>(in), ErrorCode::kIo,
            "cannot open " + files[n].string());
    const std::vector<char> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
    Require(bytes.size() == features * 4, ErrorCode::kShapeMismatch,
            files[n].string() + " has " + std::to_string(bytes.size()) +
                " bytes, expected " + std::to_string(features * 4));
    for (std::size_t r = 0; r < features; ++r) {
      std::uint32_t u = 0;
      for (int b = 0; b < 4; ++b) {
        u |= static_cast<std::uint32_t>(
                 static_cast<unsigned char>(bytes[r * 4 + b]))
             << (8 * b);
      }
      images.at(r, n) = std::bit_cast<float>(u);
    }
    names.push_back(files[n].stem().string());
  }
  return images;
}

void WriteOutputs(const fs::path& path, const kernels::ActivationMatrix& out,
                  const std::vector<std::string>& names) {
  std::ofstream f(path);
  Require(static_cast<bool>(f), ErrorCode::kIo,
          "cannot open " + path.string() + " for writing");
  f << "image";
  for (std::size_t r = 0; r < out.rows; ++r) f << ",out_" << r;
  f << "\n";
  char buf[32];
  for (std::size_t n = 0; n < out.batch; ++n) {
    f << names[n];
    for (std::size_t r = 0; r < out.rows; ++r) {
      std::snprintf(buf, sizeof(buf), ",%.9g",
                    static_cast<double>(out.at(r, n)));
      f << buf;
    }
    f << "\n";
  }
  Require(f.good(), ErrorCode::kIo, "failed writing " + path.string());
}

struct Context {
  std::ostream& out;
  int threads;
};

void SynthWeights(Context& ctx, const std::string& net_path,
                  const std::string& blob, const std::string& shapes,
                  std::uint64_t seed) {
  const NetworkDescriptor net = LoadNetwork(net_path);
  const auto weights = RandomWeights(net, seed);
  SaveWeights(weights, blob, shapes);
  ctx.out << "wrote " << weights.size() << " weight matrices to " << blob
          << "\n";
}

void Compress(Context& ctx, const std::string& blob, const std::string& shapes,
              const std::string& config, const std::string& net_path,
              const std::string& output) {
  const auto weights = LoadWeights(blob, shapes);
  const CompressionPlan plan =
      config.empty() ? CompressionPlan{} : ParseCompressionPlan(ReadText(config));
  std::optional<NetworkDescriptor> net;
  if (!net_path.empty()) net = LoadNetwork(net_path);
  const codec::CompressedModel model =
      CompressWeights(weights, plan, net ? &*net : nullptr);
  codec::SaveModel(model, output);
  std::uint64_t dense = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const auto& m = weights[i].matrix;
    const std::uint64_t d =
        (m.data.size() + (m.bias ? m.rows : 0)) * sizeof(float);
    const std::uint64_t c = codec::SerializedSize(model.layers[i]);
    dense += d;
    ctx.out << weights[i].name << ": " << d << " -> " << c << " bytes ("
            << Format("%.2f", 100.0 * static_cast<double>(c) /
                                  static_cast<double>(std::max<std::uint64_t>(
                                      d, 1)))
            << "%)\n";
  }
  const auto total = static_cast<double>(fs::file_size(output));
  ctx.out << "model: " << dense << " -> " << fs::file_size(output)
          << " bytes ("
          << Format("%.2f", 100.0 * total /
                                static_cast<double>(std::max<std::uint64_t>(
                                    dense, 1)))
          << "%)\n";
}

void Decompress(Context& ctx, const std::string& model_path,
                const std::string& net_path, const std::string& blob,
                const std::string& shapes) {
  const codec::CompressedModel model = codec::LoadModel(model_path);
  std::vector<std::string> names;
  if (!net_path.empty()) {
    for (const WeightShape& s : LoadNetwork(net_path).WeightShapes()) {
      names.push_back(s.layer);
    }
    Require(names.size() == model.layers.size(), ErrorCode::kShapeMismatch,
            "network and model disagree on the number of weighted layers");
  }
  std::vector<NamedWeights> weights;
  for (std::size_t i = 0; i < model.layers.size(); ++i) {
    weights.push_back(
        {names.empty() ? "layer" + std::to_string(i) : names[i],
         codec::DecompressLayer(model.layers[i])});
  }
  SaveWeights(weights, blob, shapes);
  ctx.out << "wrote " << weights.size() << " weight matrices to " << blob
          << "\n";
}

void Profile(Context& ctx, const std::string& model_path,
             const std::string& net_path, const std::string& batches,
             int repetitions, bool raw_time, const std::string& output) {
  const Network net = Network::Build(
      LoadNetwork(net_path), codec::LoadModel(model_path), ctx.threads);
  profiler::ProfileOptions options;
  options.batches = profiler::ParseBatchList(batches);
  options.repetitions = repetitions;
  options.monotone_time = !raw_time;
  const profiler::ProfileStore store = ProfileNetwork(net, options, ctx.threads);
  profiler::SaveProfile(store, output);
  ctx.out << "profiled " << store.layers.size() << " layers at "
          << options.batches.size() << " batch sizes -> " << output << "\n";
}

void Plan(Context& ctx, const std::string& profile_path, std::uint64_t tot,
          std::optional<double> latency, std::size_t k, std::uint64_t step,
          const std::string& batches, const std::string& output) {
  const auto costs =
      planner::CostsFromProfile(profiler::LoadProfile(profile_path));
  Require(!costs.empty(), ErrorCode::kParse, "profile has no layers");
  std::vector<std::size_t> grid = batches.empty()
                                      ? planner::CommonBatches(costs)
                                      : profiler::ParseBatchList(batches);
  std::erase_if(grid, [k](std::size_t b) { return b > k; });
  planner::PlannerConstraints c;
  c.total_memory = tot;
  c.latency_ms = latency;
  c.requested = k;
  c.memory_step = step;
  const planner::BatchPlan plan = planner::PlanBatches(costs, grid, c);
  std::optional<planner::BatchPlan> baseline;
  try {
    baseline = planner::FixedBatchBaseline(costs, grid, c);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kInfeasible) throw;
  }
  const std::string json =
      planner::PlanToJson(plan, c, baseline ? &*baseline : nullptr);
  if (output.empty()) {
    ctx.out << json;
  } else {
    planner::SavePlan(json, output);
  }
  for (const planner::PlanSegment& s : plan.segments) {
    ctx.out << "segment " << s.outer_batch << " x " << s.rounds << ":";
    for (const planner::LayerAssignment& l : s.layers) {
      ctx.out << " " << l.layer << "=" << l.batch;
    }
    ctx.out << "\n";
  }
  ctx.out << "throughput " << Format("%.3f", plan.throughput())
          << " img/s, peak " << plan.peak_bytes() << " bytes\n";
  if (baseline) {
    ctx.out << "fixed batch " << baseline->segments.front().outer_batch
            << ": " << Format("%.3f", baseline->throughput()) << " img/s ("
            << Format("%+.1f", 100.0 * (plan.throughput() /
                                            baseline->throughput() -
                                        1.0))
            << "%)\n";
  } else {
    ctx.out << "no fixed batch size fits\n";
  }
}

void Infer(Context& ctx, const std::string& model_path,
           const std::string& net_path, const std::string& plan_path,
           std::size_t batch, const std::string& input_dir,
           std::optional<std::uint64_t> tot, const std::string& metrics_path,
           const std::string& output) {
  const Network net = Network::Build(
      LoadNetwork(net_path), codec::LoadModel(model_path), ctx.threads);
  std::vector<std::string> names;
  const kernels::ActivationMatrix images =
      ReadImages(input_dir, net.in_features(), names);
  planner::BatchPlan plan;
  if (plan_path.empty()) {
    plan = ConstantPlan(net, batch, images.batch);
  } else {
    const std::string text = ReadText(plan_path);
    plan = planner::PlanFromJson(text);
    if (!tot) {
      const auto doc = nlohmann::json::parse(text);
      if (doc.contains("constraints")) {
        tot = doc["constraints"].value("total_memory", std::uint64_t{0});
      }
    }
  }
  const RunResult result = RunPlan(net, plan, images.view(), tot);
  WriteOutputs(output, result.outputs, names);
  if (!metrics_path.empty()) {
    WriteText(metrics_path, MetricsToJson(result.metrics));
  }
  ctx.out << "inferred " << images.batch << " images in "
          << Format("%.3f", result.metrics.total_ms) << " ms ("
          << Format("%.3f", result.metrics.images_per_second())
          << " img/s), peak " << result.metrics.peak_bytes << " bytes\n";
}

struct BenchArgs {
  bool sweep = false;
  std::size_t rows = 4096;
  std::size_t cols = 9216;
  double prune_fraction = 0.91;
  int quant_bits = 5;
  int index_bits = 4;
  std::string blocks = "16,32,64,128,256,512,1024,2048,4096";
  std::string batches = "16,256";
  int repetitions = 3;
  std::uint64_t seed = 1;
  std::string output;
};

void Bench(Context& ctx, const BenchArgs& a) {
  Require(a.sweep, ErrorCode::kInvalidArgument,
          "bench needs a mode; use --sweep-blocks");
  codec::DenseMatrix dense(a.rows, a.cols);
  std::mt19937_64 rng(a.seed);
  std::normal_distribution<float> dist(0.0f, 0.05f);
  for (float& v : dense.data) v = dist(rng);
  CompressionSpec spec;
  spec.prune_fraction = a.prune_fraction;
  spec.quant_bits = a.quant_bits;
  spec.index_bits = a.index_bits;
  profiler::SweepOptions options;
  options.compression = spec.Resolve(dense);
  options.blocks = profiler::ParseBatchList(a.blocks);
  options.batches = profiler::ParseBatchList(a.batches);
  options.repetitions = a.repetitions;
  options.threads = ctx.threads;
  options.seed = a.seed;
  const auto rows = profiler::SweepBlockSizes(dense, options);
  if (a.output.empty()) {
    profiler::WriteSweepCsv(rows, ctx.out);
  } else {
    std::ofstream f(a.output);
    Require(static_cast<bool>(f), ErrorCode::kIo,
            "cannot open " + a.output + " for writing");
    profiler::WriteSweepCsv(rows, f);
    ctx.out << "wrote " << rows.size() << " rows to " << a.output << "\n";
  }
}

}  // namespace

int RunCli(int argc, const char* const* argv, std::ostream& out,
           std::ostream& err) {
  CLI::App app{"Compressed-model inference engine"};
  app.require_subcommand(1);
  Context ctx{out, DefaultThreadCount()};
  std::function<void()> action;

  {
    auto* cmd = app.add_subcommand(
        "synth-weights", "Random weights for a network descriptor");
    auto net = std::make_shared<std::string>();
    auto blob = std::make_shared<std::string>();
    auto shapes = std::make_shared<std::string>();
    auto seed = std::make_shared<std::uint64_t>(1);
    cmd->add_option("net", *net, "Network JSON")->required();
    cmd->add_option("-o,--output", *blob, "Weight blob")->required();
    cmd->add_option("--shapes", *shapes, "Shape manifest JSON")->required();
    cmd->add_option("--seed", *seed);
    cmd->callback([&, net, blob, shapes, seed] {
      action = [&, net, blob, shapes, seed] {
        SynthWeights(ctx, *net, *blob, *shapes, *seed);
      };
    });
  }
  {
    auto* cmd = app.add_subcommand("compress", "Compress raw weights");
    auto blob = std::make_shared<std::string>();
    auto shapes = std::make_shared<std::string>();
    auto config = std::make_shared<std::string>();
    auto net = std::make_shared<std::string>();
    auto output = std::make_shared<std::string>();
    cmd->add_option("weights", *blob, "Raw f32 weight blob")->required();
    cmd->add_option("shapes", *shapes, "Shape manifest JSON")->required();
    cmd->add_option("--config", *config, "Compression config JSON");
    cmd->add_option("--net", *net, "Network JSON (shape check, defaults)");
    cmd->add_option("-o,--output", *output, "Output .cdni")->required();
    cmd->callback([&, blob, shapes, config, net, output] {
      action = [&, blob, shapes, config, net, output] {
        Compress(ctx, *blob, *shapes, *config, *net, *output);
      };
    });
  }
  {
    auto* cmd = app.add_subcommand("decompress", "Expand a .cdni model");
    auto model = std::make_shared<std::string>();
    auto net = std::make_shared<std::string>();
    auto blob = std::make_shared<std::string>();
    auto shapes = std::make_shared<std::string>();
    cmd->add_option("model", *model, "Input .cdni")->required();
    cmd->add_option("--net", *net, "Network JSON for layer names");
    cmd->add_option("-o,--output", *blob, "Weight blob")->required();
    cmd->add_option("--shapes", *shapes, "Shape manifest JSON")->required();
    cmd->callback([&, model, net, blob, shapes] {
      action = [&, model, net, blob, shapes] {
        Decompress(ctx, *model, *net, *blob, *shapes);
      };
    });
  }
  {
    auto* cmd = app.add_subcommand("profile", "Per-layer cost profile");
    auto model = std::make_shared<std::string>();
    auto net = std::make_shared<std::string>();
    auto batches = std::make_shared<std::string>("1..64");
    auto reps = std::make_shared<int>(3);
    auto raw = std::make_shared<bool>(false);
    auto output = std::make_shared<std::string>();
    cmd->add_option("model", *model, "Model .cdni")->required();
    cmd->add_option("net", *net, "Network JSON")->required();
    cmd->add_option("--batches", *batches, "e.g. 1..64 or 1,2,4");
    cmd->add_option("--repetitions", *reps)->check(CLI::Range(3, 1000));
    cmd->add_flag("--raw-time", *raw, "Keep measured times as they are");
    cmd->add_option("-o,--output", *output, "Profile CSV")->required();
    cmd->callback([&, model, net, batches, reps, raw, output] {
      action = [&, model, net, batches, reps, raw, output] {
        Profile(ctx, *model, *net, *batches, *reps, *raw, *output);
      };
    });
  }
  {
    auto* cmd = app.add_subcommand("plan", "Per-layer batch plan");
    auto profile = std::make_shared<std::string>();
    auto tot = std::make_shared<std::uint64_t>(0);
    auto latency = std::make_shared<double>(0.0);
    auto k = std::make_shared<std::size_t>(1);
    auto step = std::make_shared<std::uint64_t>(100 * 1024);
    auto batches = std::make_shared<std::string>();
    auto output = std::make_shared<std::string>();
    cmd->add_option("profile", *profile, "Profile CSV")->required();
    cmd->add_option("--tot", *tot, "Total memory (bytes; KB/MB suffixes)")
        ->required()
        ->transform(CLI::AsSizeValue(false));
    auto* lat = cmd->add_option("--latency", *latency, "Latency bound (ms)")
                    ->check(CLI::PositiveNumber);
    cmd->add_option("-K,--requested", *k, "Images to infer")
        ->required()
        ->check(CLI::PositiveNumber);
    cmd->add_option("--step", *step, "Memory grid step")
        ->transform(CLI::AsSizeValue(false))
        ->check(CLI::PositiveNumber);
    cmd->add_option("--batches", *batches, "Batch grid (default: profiled)");
    cmd->add_option("-o,--output", *output, "Plan JSON (default: stdout)");
    cmd->callback([&, profile, tot, latency, k, step, batches, output, lat] {
      std::optional<double> bound;
      if (lat->count() > 0) bound = *latency;
      action = [&, profile, tot, bound, k, step, batches, output] {
        Plan(ctx, *profile, *tot, bound, *k, *step, *batches, *output);
      };
    });
  }
  {
    auto* cmd = app.add_subcommand("infer", "Run a network under a plan");
    auto model = std::make_shared<std::string>();
    auto net = std::make_shared<std::string>();
    auto plan = std::make_shared<std::string>();
    auto batch = std::make_shared<std::size_t>(1);
    auto input = std::make_shared<std::string>();
    auto tot = std::make_shared<std::uint64_t>(0);
    auto metrics = std::make_shared<std::string>();
    auto output = std::make_shared<std::string>();
    cmd->add_option("model", *model, "Model .cdni")->required();
    cmd->add_option("net", *net, "Network JSON")->required();
    auto* plan_opt = cmd->add_option("--plan", *plan, "Plan JSON");
    cmd->add_option("--batch", *batch, "Constant batch when no plan is given")
        ->check(CLI::PositiveNumber)
        ->excludes(plan_opt);
    cmd->add_option("--input", *input, "Directory of .f32 images")
        ->required();
    auto* tot_opt = cmd->add_option("--tot", *tot, "Memory limit override")
                        ->transform(CLI::AsSizeValue(false));
    cmd->add_option("--metrics", *metrics, "Metrics JSON");
    cmd->add_option("-o,--output", *output, "Output CSV")->required();
    cmd->callback(
        [&, model, net, plan, batch, input, tot, metrics, output, tot_opt] {
          std::optional<std::uint64_t> limit;
          if (tot_opt->count() > 0) limit = *tot;
          action = [&, model, net, plan, batch, input, limit, metrics,
                    output] {
            Infer(ctx, *model, *net, *plan, *batch, *input, limit, *metrics,
                  *output);
          };
        });
  }
  {
    auto* cmd = app.add_subcommand("bench", "Kernel benchmarks");
    auto a = std::make_shared<BenchArgs>();
    cmd->add_flag("--sweep-blocks", a->sweep,
                  "Decode/compute time across block sizes");
    cmd->add_option("--rows", a->rows)->check(CLI::PositiveNumber);
    cmd->add_option("--cols", a->cols)->check(CLI::PositiveNumber);
    cmd->add_option("--prune-fraction", a->prune_fraction)
        ->check(CLI::Range(0.0, 1.0));
    cmd->add_option("--quant-bits", a->quant_bits);
    cmd->add_option("--index-bits", a->index_bits);
    cmd->add_option("--blocks", a->blocks);
    cmd->add_option("--batches", a->batches);
    cmd->add_option("--repetitions", a->repetitions)->check(CLI::Range(1, 1000));
    cmd->add_option("--seed", a->seed);
    cmd->add_option("-o,--output", a->output, "CSV (default: stdout)");
    cmd->callback([&, a] { action = [&, a] { Bench(ctx, *a); }; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }
  try {
    action();
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return e.code() == ErrorCode::kInfeasible ? kExitInfeasible
                                              : kExitDataError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitDataError;
  }
  return kExitOk;
}

}  // namespace cramnet::engine
