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

#ifndef CRAMNET_CODEC_BIT_STREAM_H_
#define CRAMNET_CODEC_BIT_STREAM_H_

#include <cstdint>
#include <span>
#include <vector>

namespace cramnet::codec {

// Appends bits MSB-first within each byte. The final partial byte is
// zero-filled.
class BitWriter {
 public:
  // Writes the low `length` bits of `code`, most significant first.
  void Write(std::uint64_t code, int length) {
    for (int b = length - 1; b >= 0; --b) {
      const auto bit = static_cast<std::uint8_t>((code >> b) & 1u);
      if ((bit_count_ & 7u) == 0) bytes_.push_back(0);
      bytes_.back() |= static_cast<std::uint8_t>(bit << (7 - (bit_count_ & 7u)));
      ++bit_count_;
    }
  }

  std::uint64_t bit_count() const { return bit_count_; }
  const std::vector<std::uint8_t>& bytes() const { return bytes_; }
  std::vector<std::uint8_t> Release() { return std::move(bytes_); }

 private:
  std::vector<std::uint8_t> bytes_;
  std::uint64_t bit_count_ = 0;
};

// Reads bits of a byte stream within [begin, end) absolute bit positions.
class BitReader {
 public:
  BitReader(std::span<const std::uint8_t> bytes, std::uint64_t begin,
            std::uint64_t end)
      : bytes_(bytes), pos_(begin), end_(end) {}

  bool exhausted() const { return pos_ >= end_; }
  std::uint64_t position() const { return pos_; }

  // Caller guarantees !exhausted().
  unsigned Next() {
    const unsigned bit = (bytes_[pos_ >> 3] >> (7 - (pos_ & 7u))) & 1u;
    ++pos_;
    return bit;
  }

 private:
  std::span<const std::uint8_t> bytes_;
  std::uint64_t pos_;
  std::uint64_t end_;
};

}  // namespace cramnet::codec

#endif  // CRAMNET_CODEC_BIT_STREAM_H_
