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

#include "cramnet/codec/model_io.h"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <string>

namespace cramnet::codec {
namespace {

class ByteWriter {
 public:
  template <typename T>
  void Put(T value) {
    static_assert(std::is_integral_v<T>);
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      out_.push_back(static_cast<std::uint8_t>(
          static_cast<std::make_unsigned_t<T>>(value) >> (8 * i)));
    }
  }
  void PutF32(float v) { Put(std::bit_cast<std::uint32_t>(v)); }
  void PutBytes(std::span<const std::uint8_t> bytes) {
    out_.insert(out_.end(), bytes.begin(), bytes.end());
  }
  std::vector<std::uint8_t> Release() { return std::move(out_); }

 private:
  std::vector<std::uint8_t> out_;
};

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  template <typename T>
  T Get() {
    Need(sizeof(T));
    std::make_unsigned_t<T> v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      v |= static_cast<std::make_unsigned_t<T>>(bytes_[pos_ + i]) << (8 * i);
    }
    pos_ += sizeof(T);
    return static_cast<T>(v);
  }
  float GetF32() { return std::bit_cast<float>(Get<std::uint32_t>()); }
  std::vector<std::uint8_t> GetBytes(std::uint64_t n) {
    Need(n);
    std::vector<std::uint8_t> out(bytes_.begin() + static_cast<std::ptrdiff_t>(pos_),
                                  bytes_.begin() + static_cast<std::ptrdiff_t>(pos_ + n));
    pos_ += n;
    return out;
  }
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  void Need(std::uint64_t n) const {
    if (n > bytes_.size() - pos_) {
      Fail(ErrorCode::kTruncated,
           "model stream truncated at byte " + std::to_string(pos_));
    }
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

std::uint32_t CheckedU32(std::size_t v, const char* what) {
  Require(v <= std::numeric_limits<std::uint32_t>::max(),
          ErrorCode::kInvalidArgument, std::string(what) + " exceeds 32 bits");
  return static_cast<std::uint32_t>(v);
}

void PutTable(ByteWriter& w, const HuffmanTable& table) {
  w.Put(static_cast<std::uint16_t>(table.symbol_count()));
  for (const auto& c : table.codes()) {
    w.Put(static_cast<std::uint16_t>(c.symbol));
    w.Put(static_cast<std::uint8_t>(c.length));
  }
}

HuffmanTable GetTable(ByteReader& r) {
  const auto n = r.Get<std::uint16_t>();
  std::vector<std::pair<Symbol, int>> lengths;
  lengths.reserve(n);
  for (std::uint16_t i = 0; i < n; ++i) {
    const auto symbol = r.Get<std::uint16_t>();
    const auto length = r.Get<std::uint8_t>();
    lengths.emplace_back(symbol, length);
  }
  return HuffmanTable::FromLengths(std::move(lengths));
}

void PutLayer(ByteWriter& w, const EncodedLayer& layer) {
  layer.Validate();
  w.Put(CheckedU32(layer.rows, "rows"));
  w.Put(CheckedU32(layer.cols, "cols"));
  w.Put(CheckedU32(layer.block_h, "block_h"));
  w.Put(CheckedU32(layer.block_w, "block_w"));
  w.Put(static_cast<std::uint8_t>(layer.index_bits));
  w.Put(static_cast<std::uint8_t>(layer.codebook.quant_bits));
  w.Put(static_cast<std::uint16_t>(layer.codebook.centers.size()));
  for (float c : layer.codebook.centers) w.PutF32(c);
  PutTable(w, layer.val_table);
  PutTable(w, layer.col_table);
  for (const auto& off : layer.row_ptr) {
    w.Put(off.val);
    w.Put(off.col);
  }
  w.PutBytes(layer.val_bits);
  w.PutBytes(layer.col_bits);
  w.Put(static_cast<std::uint8_t>(layer.bias ? 1 : 0));
  if (layer.bias) {
    for (float b : *layer.bias) w.PutF32(b);
  }
}

EncodedLayer GetLayer(ByteReader& r) {
  EncodedLayer layer;
  layer.rows = r.Get<std::uint32_t>();
  layer.cols = r.Get<std::uint32_t>();
  layer.block_h = r.Get<std::uint32_t>();
  layer.block_w = r.Get<std::uint32_t>();
  Require(layer.rows >= 1 && layer.cols >= 1 && layer.block_h >= 1 &&
              layer.block_w >= 1,
          ErrorCode::kMalformedStream, "layer geometry must be positive");
  layer.index_bits = r.Get<std::uint8_t>();
  layer.codebook.quant_bits = r.Get<std::uint8_t>();
  const auto n_centers = r.Get<std::uint16_t>();
  layer.codebook.centers.clear();
  for (std::uint16_t i = 0; i < n_centers; ++i) {
    layer.codebook.centers.push_back(r.GetF32());
  }
  layer.codebook.zero_index = 0;
  layer.val_table = GetTable(r);
  layer.col_table = GetTable(r);

  // Guard the allocation below against absurd geometry in corrupt headers.
  const BlockGeometry geom = layer.geometry();
  const std::uint64_t max_rows = r.remaining() / 16;
  Require(geom.blocks_per_row() <= max_rows &&
              geom.block_rows() <= max_rows / geom.blocks_per_row() &&
              geom.storage_rows() + 1 <= max_rows,
          ErrorCode::kTruncated,
          "model stream too short for the row pointer array");
  const std::uint64_t storage_rows = geom.storage_rows();
  layer.row_ptr.resize(storage_rows + 1);
  for (auto& off : layer.row_ptr) {
    off.val = r.Get<std::uint64_t>();
    off.col = r.Get<std::uint64_t>();
  }
  layer.val_bits = r.GetBytes((layer.row_ptr.back().val + 7) / 8);
  layer.col_bits = r.GetBytes((layer.row_ptr.back().col + 7) / 8);
  const auto has_bias = r.Get<std::uint8_t>();
  Require(has_bias <= 1, ErrorCode::kMalformedStream, "bad bias flag");
  if (has_bias) {
    Require(layer.rows <= r.remaining() / 4, ErrorCode::kTruncated,
            "model stream too short for the bias block");
    std::vector<float> bias(layer.rows);
    for (float& b : bias) b = r.GetF32();
    layer.bias = std::move(bias);
  }
  layer.Validate();
  return layer;
}

}  // namespace

std::vector<std::uint8_t> Serialize(const CompressedModel& model) {
  ByteWriter w;
  for (char c : kModelMagic) w.Put(static_cast<std::uint8_t>(c));
  w.Put(kModelVersion);
  w.Put(CheckedU32(model.layers.size(), "layer count"));
  for (const auto& layer : model.layers) PutLayer(w, layer);
  return w.Release();
}

CompressedModel Deserialize(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  for (char c : kModelMagic) {
    if (r.remaining() == 0) Fail(ErrorCode::kTruncated, "missing magic");
    Require(r.Get<std::uint8_t>() == static_cast<std::uint8_t>(c),
            ErrorCode::kBadMagic, "not a CDNI model (bad magic)");
  }
  const auto version = r.Get<std::uint16_t>();
  Require(version == kModelVersion, ErrorCode::kBadVersion,
          "unsupported CDNI version " + std::to_string(version));
  const auto n_layers = r.Get<std::uint32_t>();
  CompressedModel model;
  for (std::uint32_t i = 0; i < n_layers; ++i) {
    model.layers.push_back(GetLayer(r));
  }
  Require(r.remaining() == 0, ErrorCode::kMalformedStream,
          "trailing bytes after the last layer");
  return model;
}

std::uint64_t SerializedSize(const EncodedLayer& layer) {
  ByteWriter w;
  PutLayer(w, layer);
  return w.Release().size();
}

void SaveModel(const CompressedModel& model,
               const std::filesystem::path& path) {
  const auto bytes = Serialize(model);
  std::ofstream out(path, std::ios::binary);
  Require(static_cast<bool>(out), ErrorCode::kIo,
          "cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  Require(static_cast<bool>(out), ErrorCode::kIo,
          "failed writing " + path.string());
}

CompressedModel LoadModel(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  Require(static_cast<bool>(in), ErrorCode::kIo,
          "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return Deserialize(bytes);
}

}  // namespace cramnet::codec
