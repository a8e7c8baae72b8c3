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

#include "cramnet/kernels/layer_ops.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "cramnet/common/error.h"

namespace cramnet::kernels {

TensorShape ConvGeometry::Output(const TensorShape& in,
                                 std::size_t out_channels) const {
  Require(kernel_h >= 1 && kernel_w >= 1 && stride >= 1,
          ErrorCode::kShapeMismatch, "bad convolution geometry");
  Require(in.height + 2 * pad >= kernel_h && in.width + 2 * pad >= kernel_w,
          ErrorCode::kShapeMismatch, "convolution kernel larger than input");
  return {out_channels, (in.height + 2 * pad - kernel_h) / stride + 1,
          (in.width + 2 * pad - kernel_w) / stride + 1};
}

TensorShape PoolGeometry::Output(const TensorShape& in) const {
  Require(kernel >= 1 && stride >= 1, ErrorCode::kShapeMismatch,
          "bad pooling geometry");
  Require(in.height >= kernel && in.width >= kernel, ErrorCode::kShapeMismatch,
          "pooling window larger than input");
  return {in.channels, (in.height - kernel) / stride + 1,
          (in.width - kernel) / stride + 1};
}

void Im2ColInto(std::span<const float> image, const TensorShape& in,
                const ConvGeometry& geom, ActivationView out) {
  const TensorShape o = geom.Output(in, 1);
  const std::size_t positions = o.height * o.width;
  Require(image.size() == in.size() && out.rows == geom.patch_size(in) &&
              out.batch == positions,
          ErrorCode::kShapeMismatch, "im2col buffer shape mismatch");
  const auto pad = static_cast<std::ptrdiff_t>(geom.pad);
  const auto height = static_cast<std::ptrdiff_t>(in.height);
  const auto width = static_cast<std::ptrdiff_t>(in.width);
  for (std::size_t oh = 0; oh < o.height; ++oh) {
    for (std::size_t ow = 0; ow < o.width; ++ow) {
      float* col = out.data.data() + (oh * o.width + ow) * out.rows;
      const auto y0 = static_cast<std::ptrdiff_t>(oh * geom.stride) - pad;
      const auto x0 = static_cast<std::ptrdiff_t>(ow * geom.stride) - pad;
      std::size_t row = 0;
      for (std::size_t c = 0; c < in.channels; ++c) {
        const float* plane = image.data() + c * in.height * in.width;
        for (std::size_t i = 0; i < geom.kernel_h; ++i) {
          const auto y = y0 + static_cast<std::ptrdiff_t>(i);
          for (std::size_t j = 0; j < geom.kernel_w; ++j, ++row) {
            const auto x = x0 + static_cast<std::ptrdiff_t>(j);
            col[row] = (y >= 0 && y < height && x >= 0 && x < width)
                           ? plane[y * width + x]
                           : 0.0f;
          }
        }
      }
    }
  }
}

ActivationMatrix Im2Col(ConstActivationView input, const TensorShape& in,
                        const ConvGeometry& geom) {
  Require(input.rows == in.size(), ErrorCode::kShapeMismatch,
          "im2col input does not match tensor shape");
  const TensorShape o = geom.Output(in, 1);
  const std::size_t positions = o.height * o.width;
  ActivationMatrix out(geom.patch_size(in), positions * input.batch);
  for (std::size_t n = 0; n < input.batch; ++n) {
    Im2ColInto(input.column(n), in, geom,
               out.mutable_view().columns(n * positions, positions));
  }
  return out;
}

void ReluInPlace(ActivationView a) {
  for (float& v : a.data) v = std::max(v, 0.0f);
}

ActivationMatrix Relu(ConstActivationView a) {
  ActivationMatrix out(a.rows, a.batch);
  std::copy(a.data.begin(), a.data.end(), out.data.begin());
  ReluInPlace(out.mutable_view());
  return out;
}

void MaxPoolInto(ConstActivationView in, const TensorShape& shape,
                 const PoolGeometry& geom, ActivationView out) {
  const TensorShape o = geom.Output(shape);
  Require(in.rows == shape.size() && out.rows == o.size() &&
              out.batch == in.batch,
          ErrorCode::kShapeMismatch, "max-pool shape mismatch");
  for (std::size_t n = 0; n < in.batch; ++n) {
    const float* src = in.data.data() + n * in.rows;
    float* dst = out.data.data() + n * out.rows;
    for (std::size_t c = 0; c < shape.channels; ++c) {
      const float* plane = src + c * shape.height * shape.width;
      for (std::size_t oh = 0; oh < o.height; ++oh) {
        for (std::size_t ow = 0; ow < o.width; ++ow) {
          float best = -std::numeric_limits<float>::infinity();
          for (std::size_t i = 0; i < geom.kernel; ++i) {
            const float* line =
                plane + (oh * geom.stride + i) * shape.width + ow * geom.stride;
            for (std::size_t j = 0; j < geom.kernel; ++j) {
              best = std::max(best, line[j]);
            }
          }
          dst[(c * o.height + oh) * o.width + ow] = best;
        }
      }
    }
  }
}

ActivationMatrix MaxPool(ConstActivationView in, const TensorShape& shape,
                         const PoolGeometry& geom) {
  ActivationMatrix out(geom.Output(shape).size(), in.batch);
  MaxPoolInto(in, shape, geom, out.mutable_view());
  return out;
}

void LrnInto(ConstActivationView in, const TensorShape& shape,
             const LrnParams& params, ActivationView out) {
  Require(params.size >= 1, ErrorCode::kInvalidArgument,
          "LRN window must be positive");
  Require(in.rows == shape.size() && out.rows == in.rows &&
              out.batch == in.batch,
          ErrorCode::kShapeMismatch, "LRN shape mismatch");
  const std::size_t plane = shape.height * shape.width;
  const std::size_t half = params.size / 2;
  const float scale_coeff = params.alpha / static_cast<float>(params.size);
  for (std::size_t n = 0; n < in.batch; ++n) {
    const float* src = in.data.data() + n * in.rows;
    float* dst = out.data.data() + n * out.rows;
    for (std::size_t c = 0; c < shape.channels; ++c) {
      const std::size_t lo = c >= half ? c - half : 0;
      const std::size_t hi = std::min(shape.channels - 1, c + half);
      for (std::size_t p = 0; p < plane; ++p) {
        float sum = 0.0f;
        for (std::size_t cc = lo; cc <= hi; ++cc) {
          const float v = src[cc * plane + p];
          sum += v * v;
        }
        const float x = src[c * plane + p];
        dst[c * plane + p] =
            x / std::pow(params.k + scale_coeff * sum, params.beta);
      }
    }
  }
}

ActivationMatrix Lrn(ConstActivationView in, const TensorShape& shape,
                     const LrnParams& params) {
  ActivationMatrix out(in.rows, in.batch);
  LrnInto(in, shape, params, out.mutable_view());
  return out;
}

void BiasAddInPlace(ActivationView a, std::span<const float> bias) {
  Require(bias.size() == a.rows, ErrorCode::kShapeMismatch,
          "bias length " + std::to_string(bias.size()) + " does not match " +
              std::to_string(a.rows) + " rows");
  for (std::size_t b = 0; b < a.batch; ++b) {
    auto col = a.column(b);
    for (std::size_t r = 0; r < a.rows; ++r) col[r] += bias[r];
  }
}

}  // namespace cramnet::kernels
