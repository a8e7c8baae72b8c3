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

// The fully compressed weight matrix: block-contiguous storage rows, pruned,
// relative-indexed and quantized, with the codebook indices and the column
// gaps each carried by their own canonical Huffman bitstream.

#ifndef CRAMNET_CODEC_ENCODED_LAYER_H_
#define CRAMNET_CODEC_ENCODED_LAYER_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cramnet/codec/bit_stream.h"
#include "cramnet/codec/huffman.h"
#include "cramnet/codec/quantizer.h"
#include "cramnet/codec/sparse_matrix.h"
#include "cramnet/common/error.h"

namespace cramnet::codec {

struct CompressionConfig {
  float prune_threshold = 0.0f;
  int quant_bits = 5;
  int index_bits = 4;
  std::size_t block_h = 1;
  std::size_t block_w = 0;  // 0 means the full row width (unblocked)

  void Validate() const;
};

// Start of one storage row in each stream, as absolute bit positions.
struct BitOffsets {
  std::uint64_t val = 0;
  std::uint64_t col = 0;

  bool operator==(const BitOffsets&) const = default;
};

struct EncodedLayer {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t block_h = 1;
  std::size_t block_w = 1;
  int index_bits = 4;
  Codebook codebook;
  HuffmanTable val_table;
  HuffmanTable col_table;
  std::vector<std::uint8_t> val_bits;
  std::vector<std::uint8_t> col_bits;
  std::vector<BitOffsets> row_ptr;  // storage_rows + 1 entries
  std::optional<std::vector<float>> bias;

  BlockGeometry geometry() const { return {rows, cols, block_h, block_w}; }
  std::size_t storage_rows() const { return geometry().storage_rows(); }
  bool unblocked() const { return block_h == 1 && block_w == cols; }

  // Checks geometry, offsets and table/codebook consistency. Stream contents
  // are only checked when decoded.
  void Validate() const;

  bool operator==(const EncodedLayer&) const = default;
};

EncodedLayer CompressLayer(const DenseMatrix& dense,
                           const CompressionConfig& config);

DenseMatrix DecompressLayer(const EncodedLayer& layer);

// Decodes storage row `row` and calls emit(position, value) for every entry
// whose cluster center is nonzero, where position indexes the bh x bw block
// in row-major order. Val and col tokens are decoded in lockstep; mismatched
// counts, out-of-row positions and unknown codebook indices throw
// kMalformedStream.
template <typename Emit>
void DecodeStorageRow(const EncodedLayer& layer, std::size_t row,
                      Emit&& emit) {
  const BitOffsets begin = layer.row_ptr[row];
  const BitOffsets end = layer.row_ptr[row + 1];
  BitReader vals(layer.val_bits, begin.val, end.val);
  BitReader cols(layer.col_bits, begin.col, end.col);
  const auto row_len =
      static_cast<std::int64_t>(layer.block_h * layer.block_w);
  const auto& centers = layer.codebook.centers;
  std::int64_t position = -1;
  while (!vals.exhausted()) {
    const Symbol v = layer.val_table.DecodeOne(vals);
    const Symbol g = layer.col_table.DecodeOne(cols);
    position += static_cast<std::int64_t>(g) + 1;
    if (position >= row_len || v >= centers.size()) {
      Fail(ErrorCode::kMalformedStream,
           "storage row " + std::to_string(row) + " decodes out of range");
    }
    const float value = centers[v];
    if (value != 0.0f) emit(static_cast<std::size_t>(position), value);
  }
  if (!cols.exhausted()) {
    Fail(ErrorCode::kMalformedStream,
         "storage row " + std::to_string(row) +
             " has more column tokens than values");
  }
}

}  // namespace cramnet::codec

#endif  // CRAMNET_CODEC_ENCODED_LAYER_H_
