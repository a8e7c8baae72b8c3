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

#include "cramnet/codec/sparse_matrix.h"

#include <cmath>
#include <string>

#include "cramnet/common/error.h"

namespace cramnet::codec {

void DenseMatrix::Validate() const {
  Require(data.size() == rows * cols, ErrorCode::kShapeMismatch,
          "dense matrix holds " + std::to_string(data.size()) +
              " values, expected " + std::to_string(rows * cols));
  if (bias) {
    Require(bias->size() == rows, ErrorCode::kShapeMismatch,
            "bias length " + std::to_string(bias->size()) +
                " does not match row count " + std::to_string(rows));
  }
}

void SparseCsr::Validate() const {
  Require(row_ptr.size() == rows + 1, ErrorCode::kMalformedStream,
          "row_ptr must have rows + 1 entries");
  Require(col_ind.size() == val.size(), ErrorCode::kMalformedStream,
          "col_ind and val lengths differ");
  Require(row_ptr.front() == 0 && row_ptr.back() == val.size(),
          ErrorCode::kMalformedStream, "row_ptr endpoints are wrong");
  for (std::size_t r = 0; r < rows; ++r) {
    Require(row_ptr[r] <= row_ptr[r + 1], ErrorCode::kMalformedStream,
            "row_ptr decreases at row " + std::to_string(r));
    for (std::uint64_t j = row_ptr[r]; j < row_ptr[r + 1]; ++j) {
      Require(col_ind[j] < cols, ErrorCode::kMalformedStream,
              "column index out of range in row " + std::to_string(r));
      Require(j == row_ptr[r] || col_ind[j - 1] < col_ind[j],
              ErrorCode::kMalformedStream,
              "columns not strictly increasing in row " + std::to_string(r));
    }
  }
}

SparseCsr Prune(const DenseMatrix& dense, float threshold) {
  Require(threshold >= 0.0f, ErrorCode::kInvalidArgument,
          "prune threshold must be non-negative");
  dense.Validate();
  SparseCsr csr;
  csr.rows = dense.rows;
  csr.cols = dense.cols;
  csr.row_ptr.reserve(dense.rows + 1);
  csr.row_ptr.push_back(0);
  for (std::size_t r = 0; r < dense.rows; ++r) {
    const float* row = dense.data.data() + r * dense.cols;
    for (std::size_t c = 0; c < dense.cols; ++c) {
      if (std::fabs(row[c]) > threshold) {
        csr.val.push_back(row[c]);
        csr.col_ind.push_back(static_cast<std::uint32_t>(c));
      }
    }
    csr.row_ptr.push_back(csr.val.size());
  }
  return csr;
}

SparseCsr ToCsr(const DenseMatrix& dense) { return Prune(dense, 0.0f); }

DenseMatrix ToDense(const SparseCsr& csr) {
  DenseMatrix dense(csr.rows, csr.cols);
  for (std::size_t r = 0; r < csr.rows; ++r) {
    for (std::uint64_t j = csr.row_ptr[r]; j < csr.row_ptr[r + 1]; ++j) {
      dense.at(r, csr.col_ind[j]) = csr.val[j];
    }
  }
  return dense;
}

RelativeCsr EncodeRelative(const SparseCsr& csr, int index_bits) {
  Require(index_bits >= 1 && index_bits <= 16, ErrorCode::kInvalidArgument,
          "index bits must lie in [1, 16]");
  RelativeCsr rel;
  rel.rows = csr.rows;
  rel.cols = csr.cols;
  rel.index_bits = index_bits;
  const std::int64_t max_gap = (std::int64_t{1} << index_bits) - 1;
  const std::int64_t pad_span = max_gap + 1;

  rel.row_ptr.reserve(csr.rows + 1);
  rel.row_ptr.push_back(0);
  for (std::size_t r = 0; r < csr.rows; ++r) {
    std::int64_t prev = -1;
    for (std::uint64_t j = csr.row_ptr[r]; j < csr.row_ptr[r + 1]; ++j) {
      const auto col = static_cast<std::int64_t>(csr.col_ind[j]);
      std::int64_t gap = col - prev - 1;
      while (gap > max_gap) {
        rel.val.push_back(0.0f);
        rel.rel_col.push_back(static_cast<std::uint32_t>(max_gap));
        prev += pad_span;
        gap = col - prev - 1;
      }
      rel.val.push_back(csr.val[j]);
      rel.rel_col.push_back(static_cast<std::uint32_t>(gap));
      prev = col;
    }
    rel.row_ptr.push_back(rel.val.size());
  }
  return rel;
}

SparseCsr DecodeRelative(const RelativeCsr& rel) {
  Require(rel.row_ptr.size() == rel.rows + 1 &&
              rel.val.size() == rel.rel_col.size() &&
              rel.row_ptr.back() == rel.val.size(),
          ErrorCode::kMalformedStream, "relative CSR arrays are inconsistent");
  SparseCsr csr;
  csr.rows = rel.rows;
  csr.cols = rel.cols;
  csr.row_ptr.reserve(rel.rows + 1);
  csr.row_ptr.push_back(0);
  const auto cols = static_cast<std::int64_t>(rel.cols);
  for (std::size_t r = 0; r < rel.rows; ++r) {
    std::int64_t col = -1;
    for (std::uint64_t j = rel.row_ptr[r]; j < rel.row_ptr[r + 1]; ++j) {
      Require(rel.rel_col[j] <= rel.max_gap(), ErrorCode::kMalformedStream,
              "relative index exceeds index bits in row " + std::to_string(r));
      col += static_cast<std::int64_t>(rel.rel_col[j]) + 1;
      Require(col < cols, ErrorCode::kMalformedStream,
              "decoded column " + std::to_string(col) + " out of range in row " +
                  std::to_string(r));
      if (rel.val[j] != 0.0f) {
        csr.val.push_back(rel.val[j]);
        csr.col_ind.push_back(static_cast<std::uint32_t>(col));
      }
    }
    csr.row_ptr.push_back(csr.val.size());
  }
  return csr;
}

void BlockGeometry::Validate() const {
  Require(block_h >= 1 && block_w >= 1, ErrorCode::kInvalidArgument,
          "block dimensions must be positive");
}

DenseMatrix BlockReorder(const DenseMatrix& dense, std::size_t block_h,
                         std::size_t block_w) {
  dense.Validate();
  const BlockGeometry geom{dense.rows, dense.cols, block_h, block_w};
  geom.Validate();
  DenseMatrix out(geom.storage_rows(), geom.storage_cols());
  for (std::size_t i = 0; i < geom.storage_rows(); ++i) {
    const std::size_t r0 = geom.row_origin(i);
    const std::size_t c0 = geom.col_origin(i);
    float* dst = out.data.data() + i * out.cols;
    for (std::size_t br = 0; br < block_h && r0 + br < dense.rows; ++br) {
      for (std::size_t bc = 0; bc < block_w && c0 + bc < dense.cols; ++bc) {
        dst[br * block_w + bc] = dense.at(r0 + br, c0 + bc);
      }
    }
  }
  return out;
}

DenseMatrix BlockRestore(const DenseMatrix& storage, const BlockGeometry& geom) {
  geom.Validate();
  Require(storage.rows == geom.storage_rows() &&
              storage.cols == geom.storage_cols(),
          ErrorCode::kShapeMismatch,
          "storage matrix does not match block geometry");
  DenseMatrix out(geom.rows, geom.cols);
  for (std::size_t i = 0; i < geom.storage_rows(); ++i) {
    const std::size_t r0 = geom.row_origin(i);
    const std::size_t c0 = geom.col_origin(i);
    const float* src = storage.data.data() + i * storage.cols;
    for (std::size_t br = 0; br < geom.block_h && r0 + br < geom.rows; ++br) {
      for (std::size_t bc = 0; bc < geom.block_w && c0 + bc < geom.cols;
           ++bc) {
        out.at(r0 + br, c0 + bc) = src[br * geom.block_w + bc];
      }
    }
  }
  return out;
}

}  // namespace cramnet::codec
