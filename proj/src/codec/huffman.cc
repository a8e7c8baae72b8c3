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

#include "cramnet/codec/huffman.h"

#include <algorithm>
#include <queue>
#include <string>
#include <tuple>

#include "cramnet/common/error.h"

namespace cramnet::codec {
namespace {

struct Node {
  std::uint64_t weight;
  Symbol min_symbol;
  int left;   // -1 for leaves
  int right;
  Symbol symbol;
};

struct NodeOrder {
  const std::vector<Node>* nodes;
  // std::priority_queue is a max-heap; invert to pop the lightest node, then
  // the one holding the smallest symbol id.
  bool operator()(int a, int b) const {
    const Node& x = (*nodes)[a];
    const Node& y = (*nodes)[b];
    return std::tie(x.weight, x.min_symbol) > std::tie(y.weight, y.min_symbol);
  }
};

}  // namespace

HuffmanTable HuffmanTable::Build(
    const std::map<Symbol, std::uint64_t>& frequencies) {
  std::vector<Node> nodes;
  for (const auto& [symbol, count] : frequencies) {
    if (count == 0) continue;
    Require(symbol <= kMaxSymbol, ErrorCode::kInvalidArgument,
            "symbol id " + std::to_string(symbol) + " exceeds 16 bits");
    nodes.push_back({count, symbol, -1, -1, symbol});
  }
  Require(!nodes.empty(), ErrorCode::kInvalidArgument,
          "cannot build a Huffman code from an empty frequency map");

  if (nodes.size() == 1) return FromLengths({{nodes[0].symbol, 1}});

  const std::size_t leaves = nodes.size();
  nodes.reserve(2 * leaves);
  std::priority_queue<int, std::vector<int>, NodeOrder> heap(NodeOrder{&nodes});
  for (std::size_t i = 0; i < leaves; ++i) heap.push(static_cast<int>(i));
  while (heap.size() > 1) {
    const int a = heap.top();
    heap.pop();
    const int b = heap.top();
    heap.pop();
    nodes.push_back({nodes[a].weight + nodes[b].weight,
                     std::min(nodes[a].min_symbol, nodes[b].min_symbol), a, b,
                     0});
    heap.push(static_cast<int>(nodes.size() - 1));
  }

  std::vector<std::pair<Symbol, int>> lengths;
  std::vector<std::pair<int, int>> stack{{heap.top(), 0}};
  while (!stack.empty()) {
    auto [n, depth] = stack.back();
    stack.pop_back();
    if (nodes[n].left < 0) {
      lengths.emplace_back(nodes[n].symbol, depth);
    } else {
      stack.emplace_back(nodes[n].left, depth + 1);
      stack.emplace_back(nodes[n].right, depth + 1);
    }
  }
  return FromLengths(std::move(lengths));
}

HuffmanTable HuffmanTable::FromLengths(
    std::vector<std::pair<Symbol, int>> symbol_lengths) {
  HuffmanTable table;
  if (symbol_lengths.empty()) return table;

  std::sort(symbol_lengths.begin(), symbol_lengths.end(),
            [](const auto& a, const auto& b) {
              return std::tie(a.second, a.first) < std::tie(b.second, b.first);
            });

  unsigned __int128 kraft = 0;
  const unsigned __int128 one = static_cast<unsigned __int128>(1)
                                << kMaxCodeLength;
  for (std::size_t i = 0; i < symbol_lengths.size(); ++i) {
    const auto [symbol, length] = symbol_lengths[i];
    Require(length >= 1 && length <= kMaxCodeLength,
            ErrorCode::kMalformedStream,
            "code length " + std::to_string(length) + " out of range");
    Require(symbol <= kMaxSymbol, ErrorCode::kMalformedStream,
            "symbol id exceeds 16 bits");
    kraft += one >> length;
  }
  if (symbol_lengths.size() == 1) {
    Require(symbol_lengths[0].second == 1, ErrorCode::kMalformedStream,
            "single-symbol code must be one bit long");
  } else {
    Require(kraft == one, ErrorCode::kMalformedStream,
            "code lengths violate the Kraft equality");
  }

  std::uint64_t code = 0;
  int prev_length = symbol_lengths.front().second;
  for (std::size_t i = 0; i < symbol_lengths.size(); ++i) {
    const auto [symbol, length] = symbol_lengths[i];
    if (i > 0) code = (code + 1) << (length - prev_length);
    prev_length = length;
    table.codes_.push_back({symbol, length, code});
  }
  table.Finalize();
  return table;
}

void HuffmanTable::Finalize() {
  Symbol max_symbol = 0;
  for (const auto& c : codes_) max_symbol = std::max(max_symbol, c.symbol);
  by_symbol_.assign(static_cast<std::size_t>(max_symbol) + 1, -1);
  max_length_ = codes_.back().length;
  first_code_.assign(max_length_ + 1, 0);
  count_.assign(max_length_ + 1, 0);
  first_index_.assign(max_length_ + 1, 0);
  for (std::size_t i = 0; i < codes_.size(); ++i) {
    const HuffmanCode& c = codes_[i];
    Require(by_symbol_[c.symbol] < 0, ErrorCode::kMalformedStream,
            "duplicate symbol " + std::to_string(c.symbol) + " in code table");
    by_symbol_[c.symbol] = static_cast<int>(i);
    if (count_[c.length]++ == 0) {
      first_code_[c.length] = c.code;
      first_index_[c.length] = i;
    }
  }
}

const HuffmanCode& HuffmanTable::CodeFor(Symbol s) const {
  Require(Contains(s), ErrorCode::kInvalidArgument,
          "symbol " + std::to_string(s) + " is not in the code table");
  return codes_[static_cast<std::size_t>(by_symbol_[s])];
}

void HuffmanTable::Encode(Symbol s, BitWriter& out) const {
  const HuffmanCode& c = CodeFor(s);
  out.Write(c.code, c.length);
}

Symbol HuffmanTable::DecodeOne(BitReader& in) const {
  std::uint64_t code = 0;
  for (int length = 1; length <= max_length_; ++length) {
    Require(!in.exhausted(), ErrorCode::kMalformedStream,
            "bit range ends in the middle of a code");
    code = (code << 1) | in.Next();
    const std::uint64_t n = count_[length];
    if (n != 0 && code >= first_code_[length] &&
        code - first_code_[length] < n) {
      return codes_[first_index_[length] + (code - first_code_[length])].symbol;
    }
  }
  Fail(ErrorCode::kMalformedStream, "bit pattern matches no code");
}

std::vector<std::uint8_t> HuffmanEncode(std::span<const Symbol> tokens,
                                        const HuffmanTable& table,
                                        std::uint64_t* bit_count) {
  BitWriter writer;
  for (Symbol s : tokens) table.Encode(s, writer);
  if (bit_count) *bit_count = writer.bit_count();
  return writer.Release();
}

std::vector<Symbol> HuffmanDecode(std::span<const std::uint8_t> bytes,
                                  std::uint64_t begin, std::uint64_t end,
                                  const HuffmanTable& table) {
  Require(begin <= end && end <= bytes.size() * 8, ErrorCode::kMalformedStream,
          "bit range lies outside the stream");
  std::vector<Symbol> out;
  BitReader reader(bytes, begin, end);
  while (!reader.exhausted()) out.push_back(table.DecodeOne(reader));
  return out;
}

std::vector<Symbol> HuffmanDecodeCount(std::span<const std::uint8_t> bytes,
                                       std::uint64_t bit_limit,
                                       std::size_t count,
                                       const HuffmanTable& table) {
  Require(bit_limit <= bytes.size() * 8, ErrorCode::kMalformedStream,
          "bit limit lies outside the stream");
  std::vector<Symbol> out;
  out.reserve(count);
  BitReader reader(bytes, 0, bit_limit);
  while (out.size() < count) out.push_back(table.DecodeOne(reader));
  return out;
}

}  // namespace cramnet::codec
