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

// Inference directly from an EncodedLayer. Each storage row is Huffman
// decoded exactly once per call and the decoded block is applied to every
// sample of the batch before the next row is decoded.

#ifndef CRAMNET_KERNELS_SPARSE_KERNELS_H_
#define CRAMNET_KERNELS_SPARSE_KERNELS_H_

#include <cstddef>
#include <cstdint>
#include <vector>

#include "cramnet/codec/encoded_layer.h"
#include "cramnet/kernels/activation.h"

namespace cramnet::kernels {

// Decoded blocks denser than this are multiplied as dense panels.
inline constexpr double kDensifyThreshold = 0.5;

struct KernelStats {
  std::uint64_t rows_decoded = 0;
  double decode_ms = 0.0;
  double compute_ms = 0.0;
};

// One decoded storage row as a bh x bw CSR sub-matrix of cluster centers.
// (row_id, col_id) is the block's origin in the logical matrix.
struct DecodedBlock {
  std::size_t index = 0;
  std::size_t row_id = 0;
  std::size_t col_id = 0;
  std::size_t block_h = 0;
  std::size_t block_w = 0;
  std::vector<std::uint32_t> row_ptr;  // block_h + 1
  std::vector<std::uint32_t> cols;     // within-block column
  std::vector<float> vals;

  std::size_t nnz() const { return vals.size(); }
};

// Scratch for decoding and multiplying one block. Capacity is fixed by the
// block geometry, so the footprint does not depend on the batch size.
class WorkBuffer {
 public:
  WorkBuffer() = default;
  WorkBuffer(std::size_t block_h, std::size_t block_w);
  explicit WorkBuffer(const codec::EncodedLayer& layer)
      : WorkBuffer(layer.block_h, layer.block_w) {}

  // Bytes reserved for one decoded block plus its dense staging panel.
  static std::uint64_t BytesFor(std::size_t block_h, std::size_t block_w);
  std::uint64_t bytes() const { return BytesFor(block_h_, block_w_); }

  bool fits(const codec::EncodedLayer& layer) const {
    return block_h_ == layer.block_h && block_w_ == layer.block_w;
  }

  DecodedBlock& block() { return block_; }
  std::vector<float>& dense() { return dense_; }

 private:
  std::size_t block_h_ = 0;
  std::size_t block_w_ = 0;
  DecodedBlock block_;
  std::vector<float> dense_;
};

// Decodes storage row `index` of `layer` into buf.block().
void DecodeBlock(const codec::EncodedLayer& layer, std::size_t index,
                 WorkBuffer& buf);

// out[row_id + r, :] += block[r, :] * a[col_id .. col_id + bw, :]. Rows and
// columns of the block past the edges of `out` / `a` are ignored (they only
// ever hold padding). Accumulates in ascending nonzero order.
void SparseBlockMatmul(const DecodedBlock& block, ConstActivationView a,
                       ActivationView out);

// Same product through a densified bh x bw panel (row-major, `dense`).
void DenseBlockMatmul(const DecodedBlock& block, std::vector<float>& dense,
                      ConstActivationView a, ActivationView out);

// Row-at-a-time inference for unblocked layers: per weight row, decode both
// streams, scan gaps to absolute columns, substitute centers and accumulate
// the sparse row against every sample.
void InferNaiveInto(const codec::EncodedLayer& layer, ConstActivationView a,
                    ActivationView out, KernelStats* stats = nullptr);
ActivationMatrix InferNaive(const codec::EncodedLayer& layer,
                            ConstActivationView a,
                            KernelStats* stats = nullptr);

// Blocked inference. `out` is overwritten with W a + v. With threads > 1,
// each worker owns whole block rows (disjoint output row bands) and gets its
// own scratch; results are bitwise identical for any worker count.
void InferBlockedInto(const codec::EncodedLayer& layer, ConstActivationView a,
                      ActivationView out, WorkBuffer& buf,
                      KernelStats* stats = nullptr, int threads = 1);
ActivationMatrix InferBlocked(const codec::EncodedLayer& layer,
                              ConstActivationView a, WorkBuffer& buf,
                              KernelStats* stats = nullptr, int threads = 1);

}  // namespace cramnet::kernels

#endif  // CRAMNET_KERNELS_SPARSE_KERNELS_H_
