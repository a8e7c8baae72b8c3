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

#include <algorithm>
#include <chrono>
#include <string>

#include "cramnet/common/error.h"

namespace cramnet::kernels {
namespace {

using Clock = std::chrono::steady_clock;

void CheckIo(const Layer& layer, ConstActivationView in, ActivationView out) {
  Require(in.rows == layer.in_features(), ErrorCode::kShapeMismatch,
          "layer " + layer.name() + " expects " +
              std::to_string(layer.in_features()) + " input features, got " +
              std::to_string(in.rows));
  Require(out.rows == layer.out_features() && out.batch == in.batch,
          ErrorCode::kShapeMismatch,
          "layer " + layer.name() + " output buffer has the wrong shape");
}

template <typename Fn>
void Timed(KernelStats* stats, Fn&& fn) {
  if (!stats) {
    fn();
    return;
  }
  const auto t0 = Clock::now();
  fn();
  stats->compute_ms +=
      std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

int BandWorkers(const codec::EncodedLayer& w, int threads) {
  return static_cast<int>(std::clamp<std::size_t>(
      static_cast<std::size_t>(std::max(threads, 1)), 1,
      w.geometry().block_rows()));
}

}  // namespace

std::string_view LayerKindName(LayerKind kind) {
  switch (kind) {
    case LayerKind::kConv:
      return "conv";
    case LayerKind::kFc:
      return "fc";
    case LayerKind::kRelu:
      return "relu";
    case LayerKind::kPool:
      return "pool";
    case LayerKind::kLrn:
      return "lrn";
  }
  return "?";
}

LayerKind ParseLayerKind(std::string_view name) {
  for (LayerKind k : {LayerKind::kConv, LayerKind::kFc, LayerKind::kRelu,
                      LayerKind::kPool, LayerKind::kLrn}) {
    if (LayerKindName(k) == name) return k;
  }
  Fail(ErrorCode::kParse, "unknown layer kind '" + std::string(name) + "'");
}

ActivationMatrix Layer::Forward(ConstActivationView in,
                                KernelStats* stats) const {
  ActivationMatrix out(out_features(), in.batch);
  Forward(in, out.mutable_view(), stats);
  return out;
}

FcLayer::FcLayer(std::string name, SharedEncodedLayer weights, int threads)
    : Layer(std::move(name)), weights_(std::move(weights)), threads_(threads) {
  Require(weights_ != nullptr, ErrorCode::kInvalidArgument,
          "fc layer needs weights");
}

std::uint64_t FcLayer::ws_bytes() const {
  return WorkBuffer::BytesFor(weights_->block_h, weights_->block_w) *
         static_cast<std::uint64_t>(BandWorkers(*weights_, threads_));
}

void FcLayer::Forward(ConstActivationView in, ActivationView out,
                      KernelStats* stats) const {
  CheckIo(*this, in, out);
  WorkBuffer buf(*weights_);
  InferBlockedInto(*weights_, in, out, buf, stats, threads_);
}

ConvLayer::ConvLayer(std::string name, SharedEncodedLayer weights,
                     TensorShape input, ConvGeometry geometry, int threads)
    : Layer(std::move(name)),
      weights_(std::move(weights)),
      input_(input),
      geometry_(geometry),
      threads_(threads) {
  Require(weights_ != nullptr, ErrorCode::kInvalidArgument,
          "conv layer needs weights");
  Require(weights_->cols == geometry_.patch_size(input_),
          ErrorCode::kShapeMismatch,
          "conv layer " + this->name() + ": filter matrix has " +
              std::to_string(weights_->cols) + " columns, patch size is " +
              std::to_string(geometry_.patch_size(input_)));
  output_ = geometry_.Output(input_, weights_->rows);
}

std::uint64_t ConvLayer::ws_bytes() const {
  const std::uint64_t positions = output_.height * output_.width;
  return WorkBuffer::BytesFor(weights_->block_h, weights_->block_w) *
             static_cast<std::uint64_t>(BandWorkers(*weights_, threads_)) +
         (geometry_.patch_size(input_) + output_.channels) * positions *
             sizeof(float);
}

void ConvLayer::Forward(ConstActivationView in, ActivationView out,
                        KernelStats* stats) const {
  CheckIo(*this, in, out);
  const std::size_t positions = output_.height * output_.width;
  WorkBuffer buf(*weights_);
  ActivationMatrix lowered(geometry_.patch_size(input_), positions);
  ActivationMatrix product(output_.channels, positions);
  for (std::size_t n = 0; n < in.batch; ++n) {
    Timed(stats, [&] {
      Im2ColInto(in.column(n), input_, geometry_, lowered.mutable_view());
    });
    InferBlockedInto(*weights_, lowered, product.mutable_view(), buf, stats,
                     threads_);
    Timed(stats, [&] {
      // (channel, position) column-major product -> CHW sample.
      float* dst = out.data.data() + n * out.rows;
      for (std::size_t p = 0; p < positions; ++p) {
        const float* src = product.data.data() + p * output_.channels;
        for (std::size_t c = 0; c < output_.channels; ++c) {
          dst[c * positions + p] = src[c];
        }
      }
    });
  }
}

void ReluLayer::Forward(ConstActivationView in, ActivationView out,
                        KernelStats* stats) const {
  CheckIo(*this, in, out);
  Timed(stats, [&] {
    std::transform(in.data.begin(), in.data.end(), out.data.begin(),
                   [](float v) { return std::max(v, 0.0f); });
  });
}

PoolLayer::PoolLayer(std::string name, TensorShape input, PoolGeometry geometry)
    : Layer(std::move(name)),
      input_(input),
      geometry_(geometry),
      output_(geometry.Output(input)) {}

void PoolLayer::Forward(ConstActivationView in, ActivationView out,
                        KernelStats* stats) const {
  CheckIo(*this, in, out);
  Timed(stats, [&] { MaxPoolInto(in, input_, geometry_, out); });
}

void LrnLayer::Forward(ConstActivationView in, ActivationView out,
                       KernelStats* stats) const {
  CheckIo(*this, in, out);
  Timed(stats, [&] { LrnInto(in, shape_, params_, out); });
}

}  // namespace cramnet::kernels
