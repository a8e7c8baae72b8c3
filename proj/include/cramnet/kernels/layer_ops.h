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

// Weight-free layer operations. Spatial tensors are stored per sample in CHW
// order, so a batch of them is an ActivationMatrix with C*H*W rows.

#ifndef CRAMNET_KERNELS_LAYER_OPS_H_
#define CRAMNET_KERNELS_LAYER_OPS_H_

#include <cstddef>
#include <span>

#include "cramnet/kernels/activation.h"

namespace cramnet::kernels {

struct TensorShape {
  std::size_t channels = 1;
  std::size_t height = 1;
  std::size_t width = 1;

  std::size_t size() const { return channels * height * width; }
  bool operator==(const TensorShape&) const = default;
};

struct ConvGeometry {
  std::size_t kernel_h = 1;
  std::size_t kernel_w = 1;
  std::size_t stride = 1;
  std::size_t pad = 0;

  // Output spatial shape for `out_channels` filters; throws kShapeMismatch
  // if the kernel does not fit the padded input.
  TensorShape Output(const TensorShape& in, std::size_t out_channels) const;
  std::size_t patch_size(const TensorShape& in) const {
    return in.channels * kernel_h * kernel_w;
  }
};

struct PoolGeometry {
  std::size_t kernel = 2;
  std::size_t stride = 2;

  TensorShape Output(const TensorShape& in) const;
};

// Cross-channel local response normalization:
//   out = x / (k + alpha / size * sum_{window} x^2)^beta
struct LrnParams {
  std::size_t size = 5;
  float alpha = 1e-4f;
  float beta = 0.75f;
  float k = 1.0f;

  bool operator==(const LrnParams&) const = default;
};

// Lowers one CHW sample to a (C*kh*kw) x (OH*OW) patch matrix: column
// p = oh*OW + ow, row c*kh*kw + i*kw + j. Out-of-image taps read zero.
void Im2ColInto(std::span<const float> image, const TensorShape& in,
                const ConvGeometry& geom, ActivationView out);

// Lowers a whole batch; sample n fills columns [n*OH*OW, (n+1)*OH*OW).
ActivationMatrix Im2Col(ConstActivationView input, const TensorShape& in,
                        const ConvGeometry& geom);

void ReluInPlace(ActivationView a);
ActivationMatrix Relu(ConstActivationView a);

void MaxPoolInto(ConstActivationView in, const TensorShape& shape,
                 const PoolGeometry& geom, ActivationView out);
ActivationMatrix MaxPool(ConstActivationView in, const TensorShape& shape,
                         const PoolGeometry& geom);

void LrnInto(ConstActivationView in, const TensorShape& shape,
             const LrnParams& params, ActivationView out);
ActivationMatrix Lrn(ConstActivationView in, const TensorShape& shape,
                     const LrnParams& params);

// Adds bias[r] to row r of every sample.
void BiasAddInPlace(ActivationView a, std::span<const float> bias);

}  // namespace cramnet::kernels

#endif  // CRAMNET_KERNELS_LAYER_OPS_H_
