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

#include "cramnet/kernels/sparse_kernels.h"

#include <algorithm>
#include <chrono>
#include <string>

#include "cramnet/common/error.h"
#include "cramnet/common/threading.h"

namespace cramnet::kernels {
namespace {

using Clock = std::chrono::steady_clock;

double MillisSince(Clock::time_point start, Clock::time_point end) {
  return std::chrono::duration<double, std::milli>(end - start).count();
}

void CheckShapes(const codec::EncodedLayer& layer, ConstActivationView a,
                 ActivationView out) {
  Require(a.rows == layer.cols, ErrorCode::kShapeMismatch,
          "activation has " + std::to_string(a.rows) +
              " features, layer expects " + std::to_string(layer.cols));
  Require(out.rows == layer.rows && out.batch == a.batch,
          ErrorCode::kShapeMismatch, "output view has the wrong shape");
  Require(a.data.size() == a.rows * a.batch &&
              out.data.size() == out.rows * out.batch,
          ErrorCode::kShapeMismatch, "activation view size mismatch");
}

void InitWithBias(const codec::EncodedLayer& layer, ActivationView out) {
  for (std::size_t b = 0; b < out.batch; ++b) {
    auto col = out.column(b);
    if (layer.bias) {
      std::copy(layer.bias->begin(), layer.bias->end(), col.begin());
    } else {
      std::fill(col.begin(), col.end(), 0.0f);
    }
  }
}

// Decodes and multiplies the storage rows of block row `band`.
void RunBand(const codec::EncodedLayer& layer, std::size_t band,
             ConstActivationView a, ActivationView out, WorkBuffer& buf,
             KernelStats* stats) {
  const std::size_t per_row = layer.geometry().blocks_per_row();
  const double dense_nnz =
      kDensifyThreshold * static_cast<double>(layer.block_h * layer.block_w);
  for (std::size_t i = band * per_row; i < (band + 1) * per_row; ++i) {
    if (stats) {
      const auto t0 = Clock::now();
      DecodeBlock(layer, i, buf);
      const auto t1 = Clock::now();
      const DecodedBlock& block = buf.block();
      if (static_cast<double>(block.nnz()) > dense_nnz) {
        DenseBlockMatmul(block, buf.dense(), a, out);
      } else if (block.nnz() > 0) {
        SparseBlockMatmul(block, a, out);
      }
      const auto t2 = Clock::now();
      ++stats->rows_decoded;
      stats->decode_ms += MillisSince(t0, t1);
      stats->compute_ms += MillisSince(t1, t2);
    } else {
      DecodeBlock(layer, i, buf);
      const DecodedBlock& block = buf.block();
      if (static_cast<double>(block.nnz()) > dense_nnz) {
        DenseBlockMatmul(block, buf.dense(), a, out);
      } else if (block.nnz() > 0) {
        SparseBlockMatmul(block, a, out);
      }
    }
  }
}

}  // namespace

WorkBuffer::WorkBuffer(std::size_t block_h, std::size_t block_w)
    : block_h_(block_h), block_w_(block_w) {
  const std::size_t cells = block_h * block_w;
  block_.block_h = block_h;
  block_.block_w = block_w;
  block_.row_ptr.reserve(block_h + 1);
  block_.cols.reserve(cells);
  block_.vals.reserve(cells);
  dense_.resize(cells);
}

std::uint64_t WorkBuffer::BytesFor(std::size_t block_h, std::size_t block_w) {
  const std::uint64_t cells = static_cast<std::uint64_t>(block_h) * block_w;
  // CSR columns + values + dense panel, plus the block row pointer.
  return cells * (sizeof(std::uint32_t) + 2 * sizeof(float)) +
         (block_h + 1) * sizeof(std::uint32_t);
}

void DecodeBlock(const codec::EncodedLayer& layer, std::size_t index,
                 WorkBuffer& buf) {
  Require(buf.fits(layer), ErrorCode::kInvalidArgument,
          "work buffer geometry does not match the layer");
  const codec::BlockGeometry geom = layer.geometry();
  DecodedBlock& block = buf.block();
  block.index = index;
  block.row_id = geom.row_origin(index);
  block.col_id = geom.col_origin(index);
  block.row_ptr.clear();
  block.cols.clear();
  block.vals.clear();
  block.row_ptr.push_back(0);

  const std::size_t bw = layer.block_w;
  const std::size_t row_limit = layer.rows - block.row_id;
  const std::size_t col_limit = layer.cols - block.col_id;
  std::size_t current_row = 0;
  codec::DecodeStorageRow(layer, index, [&](std::size_t pos, float value) {
    const std::size_t r = pos / bw;
    const std::size_t c = pos - r * bw;
    if (r >= row_limit || c >= col_limit) {
      Fail(ErrorCode::kMalformedStream,
           "nonzero weight in the padded region of block " +
               std::to_string(index));
    }
    while (current_row < r) {
      block.row_ptr.push_back(static_cast<std::uint32_t>(block.vals.size()));
      ++current_row;
    }
    block.cols.push_back(static_cast<std::uint32_t>(c));
    block.vals.push_back(value);
  });
  while (block.row_ptr.size() < layer.block_h + 1) {
    block.row_ptr.push_back(static_cast<std::uint32_t>(block.vals.size()));
  }
}

void SparseBlockMatmul(const DecodedBlock& block, ConstActivationView a,
                       ActivationView out) {
  const std::size_t rows =
      block.row_id < out.rows ? std::min(block.block_h, out.rows - block.row_id)
                              : 0;
  for (std::size_t b = 0; b < a.batch; ++b) {
    const float* in = a.data.data() + b * a.rows + block.col_id;
    float* dst = out.data.data() + b * out.rows + block.row_id;
    for (std::size_t r = 0; r < rows; ++r) {
      const std::uint32_t begin = block.row_ptr[r];
      const std::uint32_t end = block.row_ptr[r + 1];
      if (begin == end) continue;
      float acc = 0.0f;
      for (std::uint32_t j = begin; j < end; ++j) {
        acc += block.vals[j] * in[block.cols[j]];
      }
      dst[r] += acc;
    }
  }
}

void DenseBlockMatmul(const DecodedBlock& block, std::vector<float>& dense,
                      ConstActivationView a, ActivationView out) {
  const std::size_t bw = block.block_w;
  dense.assign(block.block_h * bw, 0.0f);
  for (std::size_t r = 0; r < block.block_h; ++r) {
    for (std::uint32_t j = block.row_ptr[r]; j < block.row_ptr[r + 1]; ++j) {
      dense[r * bw + block.cols[j]] = block.vals[j];
    }
  }
  const std::size_t rows =
      block.row_id < out.rows ? std::min(block.block_h, out.rows - block.row_id)
                              : 0;
  const std::size_t cols =
      block.col_id < a.rows ? std::min(bw, a.rows - block.col_id) : 0;
  for (std::size_t b = 0; b < a.batch; ++b) {
    const float* in = a.data.data() + b * a.rows + block.col_id;
    float* dst = out.data.data() + b * out.rows + block.row_id;
    for (std::size_t r = 0; r < rows; ++r) {
      const float* w = dense.data() + r * bw;
      float acc = 0.0f;
      for (std::size_t c = 0; c < cols; ++c) acc += w[c] * in[c];
      dst[r] += acc;
    }
  }
}

void InferNaiveInto(const codec::EncodedLayer& layer, ConstActivationView a,
                    ActivationView out, KernelStats* stats) {
  Require(layer.unblocked(), ErrorCode::kInvalidArgument,
          "row-at-a-time inference needs an unblocked layer");
  CheckShapes(layer, a, out);
  InitWithBias(layer, out);

  std::vector<std::uint32_t> abs_col;
  std::vector<float> abs_val;
  abs_col.reserve(layer.cols);
  abs_val.reserve(layer.cols);
  for (std::size_t i = 0; i < layer.rows; ++i) {
    const auto t0 = Clock::now();
    abs_col.clear();
    abs_val.clear();
    codec::DecodeStorageRow(layer, i, [&](std::size_t pos, float value) {
      abs_col.push_back(static_cast<std::uint32_t>(pos));
      abs_val.push_back(value);
    });
    const auto t1 = Clock::now();
    for (std::size_t b = 0; b < a.batch; ++b) {
      const float* in = a.data.data() + b * a.rows;
      float acc = 0.0f;
      for (std::size_t j = 0; j < abs_col.size(); ++j) {
        acc += abs_val[j] * in[abs_col[j]];
      }
      out.data[b * out.rows + i] += acc;
    }
    if (stats) {
      ++stats->rows_decoded;
      stats->decode_ms += MillisSince(t0, t1);
      stats->compute_ms += MillisSince(t1, Clock::now());
    }
  }
}

ActivationMatrix InferNaive(const codec::EncodedLayer& layer,
                            ConstActivationView a, KernelStats* stats) {
  ActivationMatrix out(layer.rows, a.batch);
  InferNaiveInto(layer, a, out.mutable_view(), stats);
  return out;
}

void InferBlockedInto(const codec::EncodedLayer& layer, ConstActivationView a,
                      ActivationView out, WorkBuffer& buf, KernelStats* stats,
                      int threads) {
  CheckShapes(layer, a, out);
  Require(buf.fits(layer), ErrorCode::kInvalidArgument,
          "work buffer geometry does not match the layer");
  InitWithBias(layer, out);

  const std::size_t bands = layer.geometry().block_rows();
  const int workers =
      static_cast<int>(std::min<std::size_t>(std::max(threads, 1), bands));
  if (workers <= 1) {
    for (std::size_t band = 0; band < bands; ++band) {
      RunBand(layer, band, a, out, buf, stats);
    }
    return;
  }

  std::vector<WorkBuffer> extra;
  extra.reserve(static_cast<std::size_t>(workers - 1));
  for (int w = 1; w < workers; ++w) extra.emplace_back(layer);
  std::vector<KernelStats> local(static_cast<std::size_t>(workers));
  ParallelFor(bands, workers, [&](int w, std::size_t band) {
    WorkBuffer& mine = w == 0 ? buf : extra[static_cast<std::size_t>(w - 1)];
    RunBand(layer, band, a, out, mine, stats ? &local[w] : nullptr);
  });
  if (stats) {
    // Time along the busiest worker; decode counts add up.
    const KernelStats* slowest = &local[0];
    for (const auto& s : local) {
      stats->rows_decoded += s.rows_decoded;
      if (s.decode_ms + s.compute_ms >
          slowest->decode_ms + slowest->compute_ms) {
        slowest = &s;
      }
    }
    stats->decode_ms += slowest->decode_ms;
    stats->compute_ms += slowest->compute_ms;
  }
}

ActivationMatrix InferBlocked(const codec::EncodedLayer& layer,
                              ConstActivationView a, WorkBuffer& buf,
                              KernelStats* stats, int threads) {
  ActivationMatrix out(layer.rows, a.batch);
  InferBlockedInto(layer, a, out.mutable_view(), buf, stats, threads);
  return out;
}

}  // namespace cramnet::kernels
