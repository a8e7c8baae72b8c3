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

// The CDNI container. All integers are little-endian.
//
//   "CDNI" | version u16 | layer count u32 | layer*
//
// layer:
//   rows u32 | cols u32 | block_h u32 | block_w u32 | index_bits u8 |
//   quant_bits u8 | center count u16 | centers f32* |
//   val table | col table | (val_bit u64, col_bit u64) * (storage_rows + 1) |
//   val stream bytes | col stream bytes | has_bias u8 | bias f32 * rows
//
// table: symbol count u16 | (symbol u16, length u8)* in canonical order.
// Stream byte lengths are ceil(final bit offset / 8).

#ifndef CRAMNET_CODEC_MODEL_IO_H_
#define CRAMNET_CODEC_MODEL_IO_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "cramnet/codec/encoded_layer.h"

namespace cramnet::codec {

inline constexpr char kModelMagic[4] = {'C', 'D', 'N', 'I'};
inline constexpr std::uint16_t kModelVersion = 1;

struct CompressedModel {
  std::vector<EncodedLayer> layers;

  bool operator==(const CompressedModel&) const = default;
};

std::vector<std::uint8_t> Serialize(const CompressedModel& model);

// Throws kBadMagic, kBadVersion, kTruncated or kMalformedStream.
CompressedModel Deserialize(std::span<const std::uint8_t> bytes);

// Size in bytes of one layer's serialized record.
std::uint64_t SerializedSize(const EncodedLayer& layer);

void SaveModel(const CompressedModel& model, const std::filesystem::path& path);
CompressedModel LoadModel(const std::filesystem::path& path);

}  // namespace cramnet::codec

#endif  // CRAMNET_CODEC_MODEL_IO_H_
