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

// Decode/compute breakdown of blocked inference across block sizes.

#ifndef CRAMNET_PROFILER_BLOCK_SWEEP_H_
#define CRAMNET_PROFILER_BLOCK_SWEEP_H_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "cramnet/codec/encoded_layer.h"
#include "cramnet/codec/sparse_matrix.h"

namespace cramnet::profiler {

struct SweepOptions {
  // Square block edges; clipped to the matrix shape.
  std::vector<std::size_t> blocks = {16, 32, 64, 128, 256, 512, 1024, 2048,
                                     4096};
  std::vector<std::size_t> batches = {16, 256};
  int repetitions = 3;
  int threads = 1;
  // Threshold, quant and index bits; the block fields are overridden.
  codec::CompressionConfig compression;
  std::uint64_t seed = 1;
};

struct SweepRow {
  std::size_t block = 0;
  std::size_t batch = 0;
  double decode_ms = 0.0;
  double compute_ms = 0.0;
  double total_ms = 0.0;
  std::uint64_t ws_bytes = 0;
  std::uint64_t rows_decoded = 0;
};

// For each block size the layer is compressed once, then run at every batch
// size (one warm-up, median of `repetitions`).
std::vector<SweepRow> SweepBlockSizes(const codec::DenseMatrix& dense,
                                      const SweepOptions& options);

inline constexpr char kSweepCsvHeader[] =
    "block,batch,decode_ms,compute_ms,total_ms,ws_bytes,rows_decoded";

void WriteSweepCsv(const std::vector<SweepRow>& rows, std::ostream& out);

}  // namespace cramnet::profiler

#endif  // CRAMNET_PROFILER_BLOCK_SWEEP_H_
