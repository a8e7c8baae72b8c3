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

// Dense and sparse weight-matrix forms that sit between a raw layer and its
// Huffman-encoded representation, plus the transforms between them.

#ifndef CRAMNET_CODEC_SPARSE_MATRIX_H_
#define CRAMNET_CODEC_SPARSE_MATRIX_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

namespace cramnet::codec {

// Row-major weight matrix W with optional bias v (b = W a + v).
struct DenseMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<float> data;
  std::optional<std::vector<float>> bias;

  DenseMatrix() = default;
  DenseMatrix(std::size_t r, std::size_t c)
      : rows(r), cols(c), data(r * c, 0.0f) {}

  float& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  float at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

  // Throws kShapeMismatch when data/bias lengths disagree with the geometry.
  void Validate() const;

  bool operator==(const DenseMatrix&) const = default;
};

// Standard CSR with absolute column indices.
struct SparseCsr {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<float> val;
  std::vector<std::uint32_t> col_ind;
  std::vector<std::uint64_t> row_ptr;  // rows + 1 entries

  std::size_t nnz() const { return val.size(); }
  void Validate() const;

  bool operator==(const SparseCsr&) const = default;
};

// CSR whose column entries are k-bit zero-gaps from the previous stored entry
// of the row. Gaps that do not fit are bridged by padding entries with value
// 0.0 and gap 2^k - 1, each of which consumes 2^k columns.
struct RelativeCsr {
  std::size_t rows = 0;
  std::size_t cols = 0;
  int index_bits = 0;
  std::vector<float> val;
  std::vector<std::uint32_t> rel_col;
  std::vector<std::uint64_t> row_ptr;

  std::uint32_t max_gap() const { return (1u << index_bits) - 1u; }

  bool operator==(const RelativeCsr&) const = default;
};

// Keeps exactly the entries with |w| > threshold, in row-major order.
SparseCsr Prune(const DenseMatrix& dense, float threshold);

SparseCsr ToCsr(const DenseMatrix& dense);  // Prune with threshold 0.
DenseMatrix ToDense(const SparseCsr& csr);

RelativeCsr EncodeRelative(const SparseCsr& csr, int index_bits);

// Inverse of EncodeRelative. Column c_j = c_{j-1} + g_j + 1 with c_{-1} = -1;
// entries whose value is exactly 0.0 are dropped. Throws kMalformedStream
// when a decoded column falls outside the row.
SparseCsr DecodeRelative(const RelativeCsr& rel);

// Geometry of a block-contiguous layout. The logical matrix is zero-padded to
// multiples of the block dimensions; storage row i holds block i of the
// padded matrix (blocks ordered row-major over the grid), each block itself
// row-major.
struct BlockGeometry {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t block_h = 1;
  std::size_t block_w = 1;

  std::size_t padded_rows() const {
    return (rows + block_h - 1) / block_h * block_h;
  }
  std::size_t padded_cols() const {
    return (cols + block_w - 1) / block_w * block_w;
  }
  std::size_t blocks_per_row() const { return padded_cols() / block_w; }
  std::size_t block_rows() const { return padded_rows() / block_h; }
  std::size_t storage_rows() const { return block_rows() * blocks_per_row(); }
  std::size_t storage_cols() const { return block_h * block_w; }

  // Origin of storage row i in the padded logical matrix.
  std::size_t row_origin(std::size_t i) const {
    return (i / blocks_per_row()) * block_h;
  }
  std::size_t col_origin(std::size_t i) const {
    return (i % blocks_per_row()) * block_w;
  }

  void Validate() const;
};

// Block-contiguous reordering. The result carries no bias; storage rows do
// not correspond to output rows.
DenseMatrix BlockReorder(const DenseMatrix& dense, std::size_t block_h,
                         std::size_t block_w);

// Inverse of BlockReorder: scatters storage rows back into a rows x cols
// matrix, dropping the padded region.
DenseMatrix BlockRestore(const DenseMatrix& storage, const BlockGeometry& geom);

}  // namespace cramnet::codec

#endif  // CRAMNET_CODEC_SPARSE_MATRIX_H_
