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

#ifndef CRAMNET_CODEC_QUANTIZER_H_
#define CRAMNET_CODEC_QUANTIZER_H_

#include <cstdint>
#include <span>
#include <vector>

namespace cramnet::codec {

// Shared-weight table. Entry zero_index holds exactly 0.0 so that padding
// entries are representable; the remaining centers are distinct, nonzero and
// sorted ascending.
struct Codebook {
  int quant_bits = 1;
  std::vector<float> centers{0.0f};
  std::uint32_t zero_index = 0;

  // Index of the center a value is stored as. 0.0 maps to zero_index; any
  // other value maps to the nearest nonzero center, ties to the lower index.
  // A codebook without nonzero centers maps everything to zero_index.
  std::uint32_t Lookup(float value) const;

  std::size_t size() const { return centers.size(); }

  // Throws kMalformedStream unless the invariants above hold.
  void Validate() const;

  bool operator==(const Codebook&) const = default;
};

struct QuantizerOptions {
  int max_iterations = 50;
  double tolerance = 1e-7;  // max center movement that counts as converged
};

struct Quantized {
  Codebook codebook;
  std::vector<std::uint32_t> indices;
};

// Clusters the nonzero values into at most 2^quant_bits - 1 centers with 1-D
// Lloyd k-means (centers initialised evenly over [min, max]). When there are
// no more distinct nonzero values than clusters, the distinct values are the
// centers and quantization is lossless. Empty clusters are dropped.
Quantized Quantize(std::span<const float> values, int quant_bits,
                   const QuantizerOptions& options = {});

}  // namespace cramnet::codec

#endif  // CRAMNET_CODEC_QUANTIZER_H_
