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

#include "cramnet/kernels/layers.h"

#include <gtest/gtest.h>

#include <cmath>
#include <memory>
#include <random>

#include "cramnet/codec/encoded_layer.h"
#include "cramnet/common/error.h"
#include "cramnet/kernels/layer_ops.h"
#include "test_util.h"

namespace cramnet::kernels {
namespace {

using codec::CompressionConfig;
using codec::DenseMatrix;

std::shared_ptr<const codec::EncodedLayer> Encode(const DenseMatrix& m,
                                                  std::size_t bh,
                                                  std::size_t bw) {
  CompressionConfig c;
  c.block_h = bh;
  c.block_w = bw;
  c.quant_bits = 8;
  return std::make_shared<const codec::EncodedLayer>(
      codec::CompressLayer(m, c));
}

TEST(Im2ColTest, ThreeByThreeOnFourByFour) {
  const TensorShape in{1, 4, 4};
  ActivationMatrix img(16, 1);
  for (std::size_t i = 0; i < 16; ++i) img.data[i] = float(i + 1);
  const ActivationMatrix cols = Im2Col(img, in, {3, 3, 1, 0});
  ASSERT_EQ(cols.rows, 9u);
  ASSERT_EQ(cols.batch, 4u);
  // Output position (oh, ow) reads the 3x3 window whose top-left is (oh, ow).
  for (std::size_t oh = 0; oh < 2; ++oh) {
    for (std::size_t ow = 0; ow < 2; ++ow) {
      for (std::size_t i = 0; i < 3; ++i) {
        for (std::size_t j = 0; j < 3; ++j) {
          EXPECT_EQ(cols.at(i * 3 + j, oh * 2 + ow),
                    img.data[(oh + i) * 4 + ow + j]);
        }
      }
    }
  }
}

TEST(Im2ColTest, OneByOneKernelIsAReshape) {
  const TensorShape in{3, 2, 5};
  std::mt19937_64 rng(1);
  const ActivationMatrix img = testing::RandomActivations(in.size(), 1, rng);
  const ActivationMatrix cols = Im2Col(img, in, {1, 1, 1, 0});
  ASSERT_EQ(cols.rows, 3u);
  ASSERT_EQ(cols.batch, 10u);
  for (std::size_t c = 0; c < 3; ++c) {
    for (std::size_t p = 0; p < 10; ++p) {
      EXPECT_EQ(cols.at(c, p), img.data[c * 10 + p]);
    }
  }
}

TEST(Im2ColTest, PaddingReadsZero) {
  const TensorShape in{1, 2, 2};
  ActivationMatrix img(4, 1);
  img.data = {1, 2, 3, 4};
  const ActivationMatrix cols = Im2Col(img, in, {3, 3, 1, 1});
  ASSERT_EQ(cols.batch, 4u);
  // Top-left output: the window centred on pixel (0,0).
  EXPECT_EQ(cols.at(0, 0), 0.0f);
  EXPECT_EQ(cols.at(4, 0), 1.0f);
  EXPECT_EQ(cols.at(8, 0), 4.0f);
}

TEST(ConvLayerTest, MatchesDirectConvolution) {
  std::mt19937_64 rng(12);
  struct Case {
    TensorShape in;
    std::size_t out_c;
    ConvGeometry g;
    std::size_t bh, bw;
  };
  const Case cases[] = {
      {{3, 9, 9}, 4, {3, 3, 1, 1}, 2, 9},
      {{2, 11, 7}, 5, {5, 3, 2, 2}, 4, 16},
      {{1, 6, 6}, 3, {1, 1, 1, 0}, 1, 0},
      {{4, 13, 13}, 8, {4, 4, 3, 0}, 8, 64},
  };
  for (const Case& c : cases) {
    DenseMatrix filters = testing::RandomMatrix(
        c.out_c, c.in.channels * c.g.kernel_h * c.g.kernel_w, 0.4, rng, true);
    const auto weights = Encode(filters, c.bh, c.bw);
    const ConvLayer conv("conv", weights, c.in, c.g, 2);
    const ActivationMatrix x = testing::RandomActivations(c.in.size(), 3, rng);
    const ActivationMatrix got = conv.Forward(x);
    const ActivationMatrix ref = testing::DirectConv(
        x, c.in, codec::DecompressLayer(*weights), c.g);
    EXPECT_LE(testing::MaxRelError(got, ref), 1e-5);
  }
}

TEST(ConvLayerTest, WorkspaceDoesNotDependOnBatch) {
  std::mt19937_64 rng(2);
  const TensorShape in{2, 8, 8};
  const auto weights =
      Encode(testing::GaussianMatrix(4, 18, rng), 2, 6);
  const ConvLayer conv("c", weights, in, {3, 3, 1, 0}, 1);
  const std::uint64_t ws = conv.ws_bytes();
  EXPECT_GT(ws, 0u);
  EXPECT_EQ(conv.out_features(), 4u * 6u * 6u);
  // Running any batch must not change the reported workspace.
  conv.Forward(testing::RandomActivations(in.size(), 1, rng));
  conv.Forward(testing::RandomActivations(in.size(), 17, rng));
  EXPECT_EQ(conv.ws_bytes(), ws);
}

TEST(ConvLayerTest, FilterShapeMismatchIsRejected) {
  std::mt19937_64 rng(3);
  const auto weights = Encode(testing::GaussianMatrix(4, 10, rng), 1, 0);
  EXPECT_THROW(ConvLayer("c", weights, {2, 8, 8}, {3, 3, 1, 0}, 1), Error);
}

TEST(FcLayerTest, ForwardMatchesGemmAndReportsWorkspace) {
  std::mt19937_64 rng(4);
  const DenseMatrix m = testing::RandomMatrix(30, 20, 0.5, rng, true);
  const auto weights = Encode(m, 4, 4);
  const FcLayer fc("fc", weights, 1);
  EXPECT_EQ(fc.ws_bytes(), WorkBuffer::BytesFor(4, 4));
  const ActivationMatrix x = testing::RandomActivations(20, 6, rng);
  EXPECT_LE(testing::MaxRelError(
                fc.Forward(x),
                testing::DenseGemm(codec::DecompressLayer(*weights), x)),
            1e-5);
  EXPECT_THROW(fc.Forward(testing::RandomActivations(21, 1, rng)), Error);
}

TEST(AuxOpsTest, Relu) {
  ActivationMatrix a(2, 1);
  a.data = {-1.0f, 2.0f};
  const ActivationMatrix r = Relu(a);
  EXPECT_EQ(r.data[0], 0.0f);
  EXPECT_EQ(r.data[1], 2.0f);
  const ReluLayer layer("relu", 2);
  EXPECT_EQ(layer.Forward(a), r);
}

TEST(AuxOpsTest, PoolOfConstantIsConstant) {
  const TensorShape shape{2, 6, 6};
  ActivationMatrix a(shape.size(), 2);
  a.data.assign(a.data.size(), 3.25f);
  const PoolLayer pool("pool", shape, {3, 2});
  const ActivationMatrix out = pool.Forward(a);
  EXPECT_EQ(pool.output_shape(), (TensorShape{2, 2, 2}));
  for (float v : out.data) EXPECT_EQ(v, 3.25f);
}

TEST(AuxOpsTest, PoolPicksWindowMaximum) {
  ActivationMatrix a(16, 1);
  for (std::size_t i = 0; i < 16; ++i) a.data[i] = float((i * 7) % 16);
  const ActivationMatrix out = MaxPool(a, {1, 4, 4}, {2, 2});
  ASSERT_EQ(out.rows, 4u);
  for (std::size_t oh = 0; oh < 2; ++oh) {
    for (std::size_t ow = 0; ow < 2; ++ow) {
      float best = -1.0f;
      for (std::size_t i = 0; i < 2; ++i) {
        for (std::size_t j = 0; j < 2; ++j) {
          best = std::max(best, a.data[(2 * oh + i) * 4 + 2 * ow + j]);
        }
      }
      EXPECT_EQ(out.data[oh * 2 + ow], best);
    }
  }
}

TEST(AuxOpsTest, LrnMatchesScalarFormula) {
  std::mt19937_64 rng(5);
  const TensorShape shape{7, 3, 4};
  const LrnParams p{5, 2e-2f, 0.75f, 2.0f};
  const ActivationMatrix a = testing::RandomActivations(shape.size(), 2, rng);
  const ActivationMatrix out = Lrn(a, shape, p);
  const std::size_t plane = shape.height * shape.width;
  for (std::size_t n = 0; n < 2; ++n) {
    for (std::size_t c = 0; c < shape.channels; ++c) {
      for (std::size_t q = 0; q < plane; ++q) {
        double sum = 0.0;
        for (long d = -2; d <= 2; ++d) {
          const long cc = static_cast<long>(c) + d;
          if (cc < 0 || cc >= static_cast<long>(shape.channels)) continue;
          const double v = a.at(cc * plane + q, n);
          sum += v * v;
        }
        const double x = a.at(c * plane + q, n);
        const double expected =
            x / std::pow(p.k + p.alpha / p.size * sum, p.beta);
        EXPECT_NEAR(out.at(c * plane + q, n), expected,
                    1e-6 * std::max(1.0, std::fabs(expected)));
      }
    }
  }
}

TEST(AuxOpsTest, BiasAdd) {
  ActivationMatrix a(2, 2);
  const std::vector<float> bias = {1.0f, -1.0f};
  BiasAddInPlace(a.mutable_view(), bias);
  EXPECT_EQ(a.data, (std::vector<float>{1, -1, 1, -1}));
  EXPECT_THROW(BiasAddInPlace(a.mutable_view(), std::vector<float>{1.0f}),
               Error);
}

TEST(LayerKindTest, NamesRoundTrip) {
  for (LayerKind k : {LayerKind::kConv, LayerKind::kFc, LayerKind::kRelu,
                      LayerKind::kPool, LayerKind::kLrn}) {
    EXPECT_EQ(ParseLayerKind(LayerKindName(k)), k);
  }
  EXPECT_THROW(ParseLayerKind("softmax"), Error);
}

}  // namespace
}  // namespace cramnet::kernels
