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

// Canonical Huffman codes over small integer alphabets (codebook indices and
// relative column gaps).

#ifndef CRAMNET_CODEC_HUFFMAN_H_
#define CRAMNET_CODEC_HUFFMAN_H_

#include <cstdint>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "cramnet/codec/bit_stream.h"

namespace cramnet::codec {

using Symbol = std::uint32_t;

struct HuffmanCode {
  Symbol symbol = 0;
  int length = 0;
  std::uint64_t code = 0;

  bool operator==(const HuffmanCode&) const = default;
};

class HuffmanTable {
 public:
  static constexpr int kMaxCodeLength = 64;
  static constexpr Symbol kMaxSymbol = 0xFFFF;

  HuffmanTable() = default;

  // Optimal code by repeatedly merging the two least frequent subtrees; equal
  // weights merge the subtree holding the smaller symbol id first. Symbols
  // with zero count are ignored. Throws kInvalidArgument when no symbol has a
  // positive count. A single-symbol alphabet gets the 1-bit code "0".
  static HuffmanTable Build(const std::map<Symbol, std::uint64_t>& frequencies);

  // Canonical reconstruction from (symbol, length) pairs. Codes are assigned
  // in (length, symbol) order. Throws kMalformedStream on duplicate symbols or
  // lengths that violate the Kraft equality.
  static HuffmanTable FromLengths(
      std::vector<std::pair<Symbol, int>> symbol_lengths);

  bool empty() const { return codes_.empty(); }
  std::size_t symbol_count() const { return codes_.size(); }

  // Codes in canonical (length, symbol) order.
  const std::vector<HuffmanCode>& codes() const { return codes_; }

  bool Contains(Symbol s) const {
    return s < by_symbol_.size() && by_symbol_[s] >= 0;
  }
  const HuffmanCode& CodeFor(Symbol s) const;
  int LengthOf(Symbol s) const { return CodeFor(s).length; }

  void Encode(Symbol s, BitWriter& out) const;

  // Decodes one symbol. Throws kMalformedStream when the reader runs out of
  // range mid-code or the bits match no code.
  Symbol DecodeOne(BitReader& in) const;

  bool operator==(const HuffmanTable& other) const {
    return codes_ == other.codes_;
  }

 private:
  void Finalize();

  std::vector<HuffmanCode> codes_;
  std::vector<int> by_symbol_;  // symbol -> index into codes_, -1 if absent
  // Canonical decoding tables, indexed by code length.
  std::vector<std::uint64_t> first_code_;
  std::vector<std::uint64_t> count_;
  std::vector<std::size_t> first_index_;
  int max_length_ = 0;
};

std::vector<std::uint8_t> HuffmanEncode(std::span<const Symbol> tokens,
                                        const HuffmanTable& table,
                                        std::uint64_t* bit_count = nullptr);

// Decodes every symbol in the bit range [begin, end).
std::vector<Symbol> HuffmanDecode(std::span<const std::uint8_t> bytes,
                                  std::uint64_t begin, std::uint64_t end,
                                  const HuffmanTable& table);

// Decodes exactly `count` symbols from the start of a stream holding
// `bit_limit` valid bits.
std::vector<Symbol> HuffmanDecodeCount(std::span<const std::uint8_t> bytes,
                                       std::uint64_t bit_limit,
                                       std::size_t count,
                                       const HuffmanTable& table);

}  // namespace cramnet::codec

#endif  // CRAMNET_CODEC_HUFFMAN_H_
