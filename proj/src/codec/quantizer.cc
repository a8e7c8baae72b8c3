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

#include "cramnet/codec/quantizer.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "cramnet/common/error.h"

namespace cramnet::codec {

std::uint32_t Codebook::Lookup(float value) const {
  if (value == 0.0f || centers.size() <= 1) return zero_index;
  // Nonzero centers occupy [1, size) in ascending order.
  const auto first = centers.begin() + 1;
  auto it = std::lower_bound(first, centers.end(), value);
  if (it == centers.end()) return static_cast<std::uint32_t>(centers.size() - 1);
  if (it == first) return 1;
  const double hi = std::fabs(static_cast<double>(*it) - value);
  const double lo = std::fabs(static_cast<double>(*(it - 1)) - value);
  const auto idx = static_cast<std::uint32_t>(it - centers.begin());
  return lo <= hi ? idx - 1 : idx;
}

void Codebook::Validate() const {
  Require(quant_bits >= 1 && quant_bits <= 15, ErrorCode::kMalformedStream,
          "quantization bits must lie in [1, 15]");
  Require(!centers.empty() && centers.size() <= (std::size_t{1} << quant_bits),
          ErrorCode::kMalformedStream,
          "codebook holds " + std::to_string(centers.size()) +
              " centers for " + std::to_string(quant_bits) + " bits");
  Require(zero_index < centers.size() && centers[zero_index] == 0.0f,
          ErrorCode::kMalformedStream, "codebook lacks the reserved zero");
  Require(zero_index == 0, ErrorCode::kMalformedStream,
          "reserved zero must be the first center");
  for (std::size_t i = 1; i < centers.size(); ++i) {
    Require(std::isfinite(centers[i]) && centers[i] != 0.0f,
            ErrorCode::kMalformedStream, "invalid codebook center");
    Require(i == 1 || centers[i - 1] < centers[i], ErrorCode::kMalformedStream,
            "codebook centers must be distinct and ascending");
  }
}

namespace {

// Lloyd iterations over sorted samples. Cluster j owns the samples in
// (mid_{j-1}, mid_j], so each update is O(k log n) with prefix sums.
std::vector<double> LloydCenters(const std::vector<double>& sorted,
                                 std::size_t clusters,
                                 const QuantizerOptions& options) {
  const double lo = sorted.front();
  const double hi = sorted.back();
  std::vector<double> centers(clusters);
  if (clusters == 1) {
    centers[0] = 0.5 * (lo + hi);
  } else {
    for (std::size_t j = 0; j < clusters; ++j) {
      centers[j] = lo + (hi - lo) * static_cast<double>(j) /
                            static_cast<double>(clusters - 1);
    }
  }

  std::vector<double> prefix(sorted.size() + 1, 0.0);
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    prefix[i + 1] = prefix[i] + sorted[i];
  }

  auto cluster_end = [&](const std::vector<double>& c, std::size_t j) {
    if (j + 1 == c.size()) return sorted.size();
    const double mid = 0.5 * (c[j] + c[j + 1]);
    return static_cast<std::size_t>(
        std::upper_bound(sorted.begin(), sorted.end(), mid) - sorted.begin());
  };

  for (int iter = 0; iter < options.max_iterations; ++iter) {
    std::vector<double> next = centers;
    std::size_t begin = 0;
    for (std::size_t j = 0; j < clusters; ++j) {
      const std::size_t end = std::max(begin, cluster_end(centers, j));
      if (end > begin) {
        next[j] = (prefix[end] - prefix[begin]) / static_cast<double>(end - begin);
      }
      begin = end;
    }
    std::sort(next.begin(), next.end());
    double moved = 0.0;
    for (std::size_t j = 0; j < clusters; ++j) {
      moved = std::max(moved, std::fabs(next[j] - centers[j]));
    }
    centers = std::move(next);
    if (moved < options.tolerance) break;
  }

  // Drop clusters that own no samples under the final centers.
  std::vector<double> kept;
  std::size_t begin = 0;
  for (std::size_t j = 0; j < clusters; ++j) {
    const std::size_t end = std::max(begin, cluster_end(centers, j));
    if (end > begin) kept.push_back(centers[j]);
    begin = end;
  }
  return kept;
}

}  // namespace

Quantized Quantize(std::span<const float> values, int quant_bits,
                   const QuantizerOptions& options) {
  Require(quant_bits >= 1 && quant_bits <= 15, ErrorCode::kInvalidArgument,
          "quantization bits must lie in [1, 15]");
  const std::size_t clusters = (std::size_t{1} << quant_bits) - 1;

  std::vector<float> nonzero;
  nonzero.reserve(values.size());
  for (float v : values) {
    Require(std::isfinite(v), ErrorCode::kInvalidArgument,
            "cannot quantize non-finite weights");
    if (v != 0.0f) nonzero.push_back(v);
  }
  std::sort(nonzero.begin(), nonzero.end());

  std::vector<float> distinct = nonzero;
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());

  Quantized out;
  out.codebook.quant_bits = quant_bits;
  out.codebook.centers = {0.0f};
  out.codebook.zero_index = 0;

  std::vector<float> chosen;
  if (distinct.size() <= clusters) {
    chosen = distinct;
  } else {
    std::vector<double> sorted(nonzero.begin(), nonzero.end());
    for (double c : LloydCenters(sorted, clusters, options)) {
      chosen.push_back(static_cast<float>(c));
    }
    std::sort(chosen.begin(), chosen.end());
    chosen.erase(std::unique(chosen.begin(), chosen.end()), chosen.end());
    // A cluster straddling zero can average to exactly 0.0; the reserved
    // center already covers it.
    std::erase(chosen, 0.0f);
  }
  out.codebook.centers.insert(out.codebook.centers.end(), chosen.begin(),
                              chosen.end());

  out.indices.reserve(values.size());
  for (float v : values) out.indices.push_back(out.codebook.Lookup(v));
  return out;
}

}  // namespace cramnet::codec
