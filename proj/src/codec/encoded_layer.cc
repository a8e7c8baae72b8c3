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

#include "cramnet/codec/encoded_layer.h"

#include <cmath>
#include <map>

namespace cramnet::codec {

void CompressionConfig::Validate() const {
  Require(prune_threshold >= 0.0f && std::isfinite(prune_threshold),
          ErrorCode::kInvalidArgument, "prune threshold must be >= 0");
  Require(quant_bits >= 1 && quant_bits <= 15, ErrorCode::kInvalidArgument,
          "quant_bits must lie in [1, 15]");
  Require(index_bits >= 1 && index_bits <= 15, ErrorCode::kInvalidArgument,
          "index_bits must lie in [1, 15]");
  Require(block_h >= 1, ErrorCode::kInvalidArgument,
          "block_h must be positive");
}

void EncodedLayer::Validate() const {
  Require(rows >= 1 && cols >= 1 && block_h >= 1 && block_w >= 1,
          ErrorCode::kMalformedStream, "layer geometry must be positive");
  Require(index_bits >= 1 && index_bits <= 15, ErrorCode::kMalformedStream,
          "index_bits must lie in [1, 15]");
  codebook.Validate();
  Require(row_ptr.size() == storage_rows() + 1, ErrorCode::kMalformedStream,
          "row_ptr has " + std::to_string(row_ptr.size()) +
              " entries, expected " + std::to_string(storage_rows() + 1));
  Require(row_ptr.front() == BitOffsets{}, ErrorCode::kMalformedStream,
          "row_ptr must start at bit 0");
  for (std::size_t i = 1; i < row_ptr.size(); ++i) {
    Require(row_ptr[i - 1].val <= row_ptr[i].val &&
                row_ptr[i - 1].col <= row_ptr[i].col,
            ErrorCode::kMalformedStream, "row_ptr offsets decrease");
  }
  const BitOffsets total = row_ptr.back();
  Require((total.val + 7) / 8 == val_bits.size() &&
              (total.col + 7) / 8 == col_bits.size(),
          ErrorCode::kMalformedStream,
          "stream byte lengths disagree with final row_ptr offsets");
  Require((total.val == 0) == val_table.empty() &&
              (total.col == 0) == col_table.empty(),
          ErrorCode::kMalformedStream,
          "Huffman tables must be present exactly when streams are non-empty");
  for (const auto& c : val_table.codes()) {
    Require(c.symbol < codebook.size(), ErrorCode::kMalformedStream,
            "value table references a missing codebook entry");
  }
  for (const auto& c : col_table.codes()) {
    Require(c.symbol < (1u << index_bits), ErrorCode::kMalformedStream,
            "column table symbol exceeds index bits");
  }
  if (bias) {
    Require(bias->size() == rows, ErrorCode::kMalformedStream,
            "bias length does not match rows");
  }
}

EncodedLayer CompressLayer(const DenseMatrix& dense,
                           const CompressionConfig& config) {
  config.Validate();
  dense.Validate();
  Require(dense.rows >= 1 && dense.cols >= 1, ErrorCode::kInvalidArgument,
          "cannot compress an empty matrix");

  EncodedLayer layer;
  layer.rows = dense.rows;
  layer.cols = dense.cols;
  layer.block_h = config.block_h;
  layer.block_w = config.block_w == 0 ? dense.cols : config.block_w;
  layer.index_bits = config.index_bits;
  layer.bias = dense.bias;

  const DenseMatrix storage =
      BlockReorder(dense, layer.block_h, layer.block_w);
  const SparseCsr csr = Prune(storage, config.prune_threshold);
  Quantized quantized = Quantize(csr.val, config.quant_bits);
  layer.codebook = std::move(quantized.codebook);
  const RelativeCsr rel = EncodeRelative(csr, config.index_bits);

  std::vector<Symbol> val_tokens(rel.val.size());
  std::map<Symbol, std::uint64_t> val_freq;
  std::map<Symbol, std::uint64_t> col_freq;
  for (std::size_t j = 0; j < rel.val.size(); ++j) {
    val_tokens[j] = layer.codebook.Lookup(rel.val[j]);
    ++val_freq[val_tokens[j]];
    ++col_freq[rel.rel_col[j]];
  }
  if (!rel.val.empty()) {
    layer.val_table = HuffmanTable::Build(val_freq);
    layer.col_table = HuffmanTable::Build(col_freq);
  }

  BitWriter val_writer;
  BitWriter col_writer;
  layer.row_ptr.reserve(rel.rows + 1);
  layer.row_ptr.push_back({});
  for (std::size_t r = 0; r < rel.rows; ++r) {
    for (std::uint64_t j = rel.row_ptr[r]; j < rel.row_ptr[r + 1]; ++j) {
      layer.val_table.Encode(val_tokens[j], val_writer);
      layer.col_table.Encode(rel.rel_col[j], col_writer);
    }
    layer.row_ptr.push_back({val_writer.bit_count(), col_writer.bit_count()});
  }
  layer.val_bits = val_writer.Release();
  layer.col_bits = col_writer.Release();
  return layer;
}

DenseMatrix DecompressLayer(const EncodedLayer& layer) {
  layer.Validate();
  const BlockGeometry geom = layer.geometry();
  DenseMatrix storage(geom.storage_rows(), geom.storage_cols());
  for (std::size_t i = 0; i < geom.storage_rows(); ++i) {
    float* dst = storage.data.data() + i * storage.cols;
    DecodeStorageRow(layer, i,
                     [dst](std::size_t pos, float value) { dst[pos] = value; });
  }
  DenseMatrix out = BlockRestore(storage, geom);
  out.bias = layer.bias;
  return out;
}

}  // namespace cramnet::codec
