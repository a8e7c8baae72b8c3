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

#include "cramnet/profiler/block_sweep.h"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ostream>
#include <random>

#include "cramnet/common/error.h"
#include "cramnet/kernels/sparse_kernels.h"

namespace cramnet::profiler {

std::vector<SweepRow> SweepBlockSizes(const codec::DenseMatrix& dense,
                                      const SweepOptions& options) {
  Require(!options.blocks.empty() && !options.batches.empty(),
          ErrorCode::kInvalidArgument, "sweep needs blocks and batches");
  Require(options.repetitions >= 1, ErrorCode::kInvalidArgument,
          "sweep needs at least one repetition");
  using Clock = std::chrono::steady_clock;

  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<float> dist(-1.0f, 1.0f);
  std::vector<SweepRow> rows;
  for (std::size_t block : options.blocks) {
    Require(block >= 1, ErrorCode::kInvalidArgument, "block must be >= 1");
    codec::CompressionConfig config = options.compression;
    config.block_h = std::min(block, dense.rows);
    config.block_w = std::min(block, dense.cols);
    const codec::EncodedLayer layer = codec::CompressLayer(dense, config);
    kernels::WorkBuffer buf(layer);

    for (std::size_t batch : options.batches) {
      kernels::ActivationMatrix a(dense.cols, batch);
      for (float& v : a.data) v = dist(rng);
      kernels::ActivationMatrix out(dense.rows, batch);
      kernels::InferBlockedInto(layer, a, out.mutable_view(), buf, nullptr,
                                options.threads);

      std::vector<std::pair<double, kernels::KernelStats>> runs;
      for (int rep = 0; rep < options.repetitions; ++rep) {
        kernels::KernelStats stats;
        const auto t0 = Clock::now();
        kernels::InferBlockedInto(layer, a, out.mutable_view(), buf, &stats,
                                  options.threads);
        runs.push_back(
            {std::chrono::duration<double, std::milli>(Clock::now() - t0)
                 .count(),
             stats});
      }
      std::sort(runs.begin(), runs.end(),
                [](const auto& x, const auto& y) { return x.first < y.first; });
      const auto& [total, stats] = runs[runs.size() / 2];
      SweepRow row;
      row.block = block;
      row.batch = batch;
      row.decode_ms = stats.decode_ms;
      row.compute_ms = stats.compute_ms;
      row.total_ms = total;
      row.ws_bytes = buf.bytes();
      row.rows_decoded = stats.rows_decoded;
      rows.push_back(row);
    }
  }
  return rows;
}

void WriteSweepCsv(const std::vector<SweepRow>& rows, std::ostream& out) {
  out << kSweepCsvHeader << '\n';
  char line[256];
  for (const SweepRow& r : rows) {
    std::snprintf(line, sizeof(line), "%zu,%zu,%.6f,%.6f,%.6f,%llu,%llu\n",
                  r.block, r.batch, r.decode_ms, r.compute_ms, r.total_ms,
                  static_cast<unsigned long long>(r.ws_bytes),
                  static_cast<unsigned long long>(r.rows_decoded));
    out << line;
  }
}

}  // namespace cramnet::profiler
