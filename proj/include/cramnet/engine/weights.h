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

// Uncompressed weights as a flat little-endian f32 blob plus a JSON
// manifest of shapes:
//
//   {"layers": [{"name": "fc1", "rows": 10, "cols": 64, "bias": true}]}
//
// The blob holds each layer in manifest order: rows * cols weights in
// row-major order, then `rows` bias values when "bias" is true.

#ifndef CRAMNET_ENGINE_WEIGHTS_H_
#define CRAMNET_ENGINE_WEIGHTS_H_

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "cramnet/codec/model_io.h"
#include "cramnet/codec/sparse_matrix.h"
#include "cramnet/engine/network.h"

namespace cramnet::engine {

struct NamedWeights {
  std::string name;
  codec::DenseMatrix matrix;

  bool operator==(const NamedWeights&) const = default;
};

std::string WeightManifestJson(const std::vector<NamedWeights>& weights);
std::vector<std::uint8_t> WeightBlob(const std::vector<NamedWeights>& weights);

// Throws kParse for bad manifests and kTruncated / kMalformedStream when
// the blob is shorter or longer than the manifest says.
std::vector<NamedWeights> ReadWeights(const std::string& manifest_json,
                                      const std::vector<std::uint8_t>& blob);

void SaveWeights(const std::vector<NamedWeights>& weights,
                 const std::filesystem::path& blob_path,
                 const std::filesystem::path& manifest_path);
std::vector<NamedWeights> LoadWeights(
    const std::filesystem::path& blob_path,
    const std::filesystem::path& manifest_path);

// Gaussian weights and biases for every weighted layer of `net`, scaled by
// 1 / sqrt(fan-in) so activations stay in range through deep networks.
std::vector<NamedWeights> RandomWeights(const NetworkDescriptor& net,
                                        std::uint64_t seed);

// Compression settings from a config file. When compressing, precedence is,
// highest first: the config's per-layer entry, the config's top-level
// settings, the layer's descriptor settings, the descriptor default.
struct CompressionPlan {
  CompressionSpec defaults;
  std::vector<std::pair<std::string, CompressionSpec>> per_layer;
};

// {"prune_fraction": 0.9, ..., "layers": {"fc6": {...}}}
CompressionPlan ParseCompressionPlan(const std::string& json);

// Compresses every layer in order. When `net` is given, shapes are checked
// against it and its compression settings apply under the config's.
codec::CompressedModel CompressWeights(
    const std::vector<NamedWeights>& weights, const CompressionPlan& plan,
    const NetworkDescriptor* net = nullptr);

}  // namespace cramnet::engine

#endif  // CRAMNET_ENGINE_WEIGHTS_H_
