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

// Executable network layers over column-major activation batches.

#ifndef CRAMNET_KERNELS_LAYERS_H_
#define CRAMNET_KERNELS_LAYERS_H_

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>

#include "cramnet/codec/encoded_layer.h"
#include "cramnet/kernels/activation.h"
#include "cramnet/kernels/layer_ops.h"
#include "cramnet/kernels/sparse_kernels.h"

namespace cramnet::kernels {

enum class LayerKind { kConv, kFc, kRelu, kPool, kLrn };

std::string_view LayerKindName(LayerKind kind);
LayerKind ParseLayerKind(std::string_view name);

class Layer {
 public:
  explicit Layer(std::string name) : name_(std::move(name)) {}
  virtual ~Layer() = default;

  const std::string& name() const { return name_; }
  virtual LayerKind kind() const = 0;
  virtual std::size_t in_features() const = 0;
  virtual std::size_t out_features() const = 0;
  // Scratch held while Forward runs; independent of the batch size.
  virtual std::uint64_t ws_bytes() const { return 0; }

  // out must be out_features() x in.batch. Does not allocate anything that
  // grows with the batch size.
  virtual void Forward(ConstActivationView in, ActivationView out,
                       KernelStats* stats) const = 0;

  ActivationMatrix Forward(ConstActivationView in,
                           KernelStats* stats = nullptr) const;

 private:
  std::string name_;
};

using SharedEncodedLayer = std::shared_ptr<const codec::EncodedLayer>;

class FcLayer : public Layer {
 public:
  FcLayer(std::string name, SharedEncodedLayer weights, int threads);

  LayerKind kind() const override { return LayerKind::kFc; }
  std::size_t in_features() const override { return weights_->cols; }
  std::size_t out_features() const override { return weights_->rows; }
  std::uint64_t ws_bytes() const override;
  using Layer::Forward;
  void Forward(ConstActivationView in, ActivationView out,
               KernelStats* stats) const override;

  const codec::EncodedLayer& weights() const { return *weights_; }

 private:
  SharedEncodedLayer weights_;
  int threads_;
};

// Convolution via im2col: each sample is lowered to a patch matrix and run
// through blocked inference against the compressed filter matrix
// (out_channels x C*kh*kw). Lowering one sample at a time keeps the
// workspace independent of the batch size.
class ConvLayer : public Layer {
 public:
  ConvLayer(std::string name, SharedEncodedLayer weights, TensorShape input,
            ConvGeometry geometry, int threads);

  LayerKind kind() const override { return LayerKind::kConv; }
  std::size_t in_features() const override { return input_.size(); }
  std::size_t out_features() const override { return output_.size(); }
  std::uint64_t ws_bytes() const override;
  using Layer::Forward;
  void Forward(ConstActivationView in, ActivationView out,
               KernelStats* stats) const override;

  const TensorShape& input_shape() const { return input_; }
  const TensorShape& output_shape() const { return output_; }

 private:
  SharedEncodedLayer weights_;
  TensorShape input_;
  ConvGeometry geometry_;
  TensorShape output_;
  int threads_;
};

class ReluLayer : public Layer {
 public:
  ReluLayer(std::string name, std::size_t features)
      : Layer(std::move(name)), features_(features) {}

  LayerKind kind() const override { return LayerKind::kRelu; }
  std::size_t in_features() const override { return features_; }
  std::size_t out_features() const override { return features_; }
  using Layer::Forward;
  void Forward(ConstActivationView in, ActivationView out,
               KernelStats* stats) const override;

 private:
  std::size_t features_;
};

class PoolLayer : public Layer {
 public:
  PoolLayer(std::string name, TensorShape input, PoolGeometry geometry);

  LayerKind kind() const override { return LayerKind::kPool; }
  std::size_t in_features() const override { return input_.size(); }
  std::size_t out_features() const override { return output_.size(); }
  using Layer::Forward;
  void Forward(ConstActivationView in, ActivationView out,
               KernelStats* stats) const override;

  const TensorShape& output_shape() const { return output_; }

 private:
  TensorShape input_;
  PoolGeometry geometry_;
  TensorShape output_;
};

class LrnLayer : public Layer {
 public:
  LrnLayer(std::string name, TensorShape shape, LrnParams params)
      : Layer(std::move(name)), shape_(shape), params_(params) {}

  LayerKind kind() const override { return LayerKind::kLrn; }
  std::size_t in_features() const override { return shape_.size(); }
  std::size_t out_features() const override { return shape_.size(); }
  using Layer::Forward;
  void Forward(ConstActivationView in, ActivationView out,
               KernelStats* stats) const override;

 private:
  TensorShape shape_;
  LrnParams params_;
};

}  // namespace cramnet::kernels

#endif  // CRAMNET_KERNELS_LAYERS_H_
