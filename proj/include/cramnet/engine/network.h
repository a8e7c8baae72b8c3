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

// Network descriptors and the executable network built from a descriptor
// and a compressed model.
//
// Descriptor JSON:
//
//   {
//     "name": "tiny",
//     "input": {"channels": 3, "height": 16, "width": 16},
//     "compression": {...},                    // optional default
//     "layers": [
//       {"name": "conv1", "kind": "conv", "out_channels": 8, "kernel": 3,
//        "stride": 1, "pad": 1, "compression": {...}},
//       {"name": "relu1", "kind": "relu"},
//       {"name": "norm1", "kind": "lrn", "size": 5, "alpha": 1e-4,
//        "beta": 0.75, "k": 1.0},
//       {"name": "pool1", "kind": "pool", "kernel": 2, "stride": 2},
//       {"name": "fc1", "kind": "fc", "out_features": 10}
//     ]
//   }
//
// Compression objects hold any of prune_threshold, prune_fraction,
// quant_bits, index_bits, block_h and block_w. prune_fraction picks the
// magnitude threshold that removes that share of the weights.

#ifndef CRAMNET_ENGINE_NETWORK_H_
#define CRAMNET_ENGINE_NETWORK_H_

#include <cstddef>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cramnet/codec/encoded_layer.h"
#include "cramnet/codec/model_io.h"
#include "cramnet/kernels/layers.h"

namespace cramnet::engine {

struct CompressionSpec {
  std::optional<float> prune_threshold;
  std::optional<double> prune_fraction;
  std::optional<int> quant_bits;
  std::optional<int> index_bits;
  std::optional<std::size_t> block_h;
  std::optional<std::size_t> block_w;

  // Fields set here replace those of `base`.
  CompressionSpec Over(const CompressionSpec& base) const;
  // Resolves the threshold against the weights to compress.
  codec::CompressionConfig Resolve(const codec::DenseMatrix& weights) const;

  bool operator==(const CompressionSpec&) const = default;
};

struct LayerSpec {
  std::string name;
  kernels::LayerKind kind = kernels::LayerKind::kFc;
  std::size_t out_channels = 0;  // conv
  std::size_t out_features = 0;  // fc
  std::size_t kernel = 1;        // conv, pool
  std::size_t stride = 1;        // conv, pool
  std::size_t pad = 0;           // conv
  kernels::LrnParams lrn;
  std::optional<CompressionSpec> compression;

  bool has_weights() const {
    return kind == kernels::LayerKind::kConv ||
           kind == kernels::LayerKind::kFc;
  }

  bool operator==(const LayerSpec&) const = default;
};

// Rows and columns of a weight matrix.
struct WeightShape {
  std::string layer;
  std::size_t rows = 0;
  std::size_t cols = 0;

  bool operator==(const WeightShape&) const = default;
};

struct NetworkDescriptor {
  std::string name;
  kernels::TensorShape input;
  CompressionSpec compression;
  std::vector<LayerSpec> layers;

  // Input and output shape of every layer. Fully connected outputs are
  // 1 x 1 x out_features. Throws kShapeMismatch or kInvalidArgument.
  std::vector<kernels::TensorShape> InputShapes() const;
  std::vector<kernels::TensorShape> OutputShapes() const;
  // Weight matrices of the conv and fc layers, in order.
  std::vector<WeightShape> WeightShapes() const;

  bool operator==(const NetworkDescriptor&) const = default;
};

// Throws kParse on malformed documents and kShapeMismatch on incompatible
// layer shapes.
NetworkDescriptor ParseNetwork(const std::string& json);
std::string NetworkToJson(const NetworkDescriptor& net);
NetworkDescriptor LoadNetwork(const std::filesystem::path& path);

CompressionSpec ParseCompressionSpec(const std::string& json);

// Executable layers in order.
class Network {
 public:
  // Weighted layers take the model's encoded layers in order. Throws
  // kShapeMismatch when the model does not fit the descriptor.
  static Network Build(const NetworkDescriptor& descriptor,
                       const codec::CompressedModel& model, int threads);

  const NetworkDescriptor& descriptor() const { return descriptor_; }
  std::size_t size() const { return layers_.size(); }
  const kernels::Layer& layer(std::size_t i) const { return *layers_[i]; }
  std::size_t in_features() const { return layers_.front()->in_features(); }
  std::size_t out_features() const { return layers_.back()->out_features(); }

  // Runs every layer at the batch size of `in`.
  kernels::ActivationMatrix Forward(kernels::ConstActivationView in) const;

 private:
  NetworkDescriptor descriptor_;
  std::vector<std::unique_ptr<kernels::Layer>> layers_;
};

}  // namespace cramnet::engine

#endif  // CRAMNET_ENGINE_NETWORK_H_
