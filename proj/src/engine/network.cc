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

#include "cramnet/engine/network.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "cramnet/common/error.h"
#include "json.hpp"

namespace cramnet::engine {
namespace {

using Json = nlohmann::json;
using kernels::LayerKind;
using kernels::TensorShape;

void CheckKeys(const Json& obj, const std::set<std::string>& allowed,
               const std::string& where) {
  Require(obj.is_object(), ErrorCode::kParse, where + " must be an object");
  for (const auto& [key, value] : obj.items()) {
    Require(allowed.contains(key), ErrorCode::kParse,
            where + ": unknown key '" + key + "'");
  }
}

CompressionSpec CompressionFromJson(const Json& j, const std::string& where) {
  CheckKeys(j,
            {"prune_threshold", "prune_fraction", "quant_bits", "index_bits",
             "block_h", "block_w"},
            where);
  CompressionSpec c;
  if (j.contains("prune_threshold")) {
    c.prune_threshold = j["prune_threshold"].get<float>();
  }
  if (j.contains("prune_fraction")) {
    c.prune_fraction = j["prune_fraction"].get<double>();
    Require(*c.prune_fraction >= 0.0 && *c.prune_fraction <= 1.0,
            ErrorCode::kParse, where + ": prune_fraction must be in [0, 1]");
  }
  if (j.contains("quant_bits")) c.quant_bits = j["quant_bits"].get<int>();
  if (j.contains("index_bits")) c.index_bits = j["index_bits"].get<int>();
  if (j.contains("block_h")) c.block_h = j["block_h"].get<std::size_t>();
  if (j.contains("block_w")) c.block_w = j["block_w"].get<std::size_t>();
  return c;
}

Json CompressionToJson(const CompressionSpec& c) {
  Json j = Json::object();
  if (c.prune_threshold) j["prune_threshold"] = *c.prune_threshold;
  if (c.prune_fraction) j["prune_fraction"] = *c.prune_fraction;
  if (c.quant_bits) j["quant_bits"] = *c.quant_bits;
  if (c.index_bits) j["index_bits"] = *c.index_bits;
  if (c.block_h) j["block_h"] = *c.block_h;
  if (c.block_w) j["block_w"] = *c.block_w;
  return j;
}

LayerSpec LayerFromJson(const Json& j, std::size_t index) {
  const std::string where = "layer " + std::to_string(index);
  LayerSpec l;
  l.kind = kernels::ParseLayerKind(j.at("kind").get<std::string>());
  std::set<std::string> allowed = {"name", "kind"};
  switch (l.kind) {
    case LayerKind::kConv:
      allowed.insert({"out_channels", "kernel", "stride", "pad",
                      "compression"});
      l.out_channels = j.at("out_channels").get<std::size_t>();
      l.kernel = j.at("kernel").get<std::size_t>();
      l.stride = j.value("stride", std::size_t{1});
      l.pad = j.value("pad", std::size_t{0});
      break;
    case LayerKind::kFc:
      allowed.insert({"out_features", "compression"});
      l.out_features = j.at("out_features").get<std::size_t>();
      break;
    case LayerKind::kPool:
      allowed.insert({"kernel", "stride"});
      l.kernel = j.value("kernel", std::size_t{2});
      l.stride = j.value("stride", l.kernel);
      break;
    case LayerKind::kLrn:
      allowed.insert({"size", "alpha", "beta", "k"});
      l.lrn.size = j.value("size", l.lrn.size);
      l.lrn.alpha = j.value("alpha", l.lrn.alpha);
      l.lrn.beta = j.value("beta", l.lrn.beta);
      l.lrn.k = j.value("k", l.lrn.k);
      break;
    case LayerKind::kRelu:
      break;
  }
  CheckKeys(j, allowed, where);
  l.name = j.value("name", std::string(kernels::LayerKindName(l.kind)) +
                               std::to_string(index + 1));
  if (j.contains("compression")) {
    l.compression = CompressionFromJson(j["compression"], where);
  }
  return l;
}

Json LayerToJson(const LayerSpec& l) {
  Json j = {{"name", l.name},
            {"kind", std::string(kernels::LayerKindName(l.kind))}};
  switch (l.kind) {
    case LayerKind::kConv:
      j["out_channels"] = l.out_channels;
      j["kernel"] = l.kernel;
      j["stride"] = l.stride;
      j["pad"] = l.pad;
      break;
    case LayerKind::kFc:
      j["out_features"] = l.out_features;
      break;
    case LayerKind::kPool:
      j["kernel"] = l.kernel;
      j["stride"] = l.stride;
      break;
    case LayerKind::kLrn:
      j["size"] = l.lrn.size;
      j["alpha"] = l.lrn.alpha;
      j["beta"] = l.lrn.beta;
      j["k"] = l.lrn.k;
      break;
    case LayerKind::kRelu:
      break;
  }
  if (l.compression) j["compression"] = CompressionToJson(*l.compression);
  return j;
}

kernels::ConvGeometry ConvOf(const LayerSpec& l) {
  return {l.kernel, l.kernel, l.stride, l.pad};
}

TensorShape OutputOf(const LayerSpec& l, const TensorShape& in) {
  switch (l.kind) {
    case LayerKind::kConv:
      Require(l.out_channels > 0 && l.kernel > 0 && l.stride > 0,
              ErrorCode::kInvalidArgument,
              "conv layer " + l.name + " needs positive sizes");
      return ConvOf(l).Output(in, l.out_channels);
    case LayerKind::kFc:
      Require(l.out_features > 0, ErrorCode::kInvalidArgument,
              "fc layer " + l.name + " needs out_features > 0");
      return {l.out_features, 1, 1};
    case LayerKind::kPool:
      Require(l.kernel > 0 && l.stride > 0, ErrorCode::kInvalidArgument,
              "pool layer " + l.name + " needs positive sizes");
      return kernels::PoolGeometry{l.kernel, l.stride}.Output(in);
    case LayerKind::kRelu:
    case LayerKind::kLrn:
      return in;
  }
  return in;
}

}  // namespace

CompressionSpec CompressionSpec::Over(const CompressionSpec& base) const {
  CompressionSpec out = base;
  if (prune_threshold || prune_fraction) {
    out.prune_threshold = prune_threshold;
    out.prune_fraction = prune_fraction;
  }
  if (quant_bits) out.quant_bits = quant_bits;
  if (index_bits) out.index_bits = index_bits;
  if (block_h) out.block_h = block_h;
  if (block_w) out.block_w = block_w;
  return out;
}

codec::CompressionConfig CompressionSpec::Resolve(
    const codec::DenseMatrix& weights) const {
  codec::CompressionConfig c;
  if (quant_bits) c.quant_bits = *quant_bits;
  if (index_bits) c.index_bits = *index_bits;
  if (block_h) c.block_h = *block_h;
  if (block_w) c.block_w = *block_w;
  if (prune_threshold) {
    c.prune_threshold = *prune_threshold;
  } else if (prune_fraction && !weights.data.empty()) {
    const auto k = static_cast<std::size_t>(std::llround(
        *prune_fraction * static_cast<double>(weights.data.size())));
    if (k > 0) {
      std::vector<float> mags(weights.data.size());
      std::transform(weights.data.begin(), weights.data.end(), mags.begin(),
                     [](float v) { return std::fabs(v); });
      std::nth_element(mags.begin(),
                       mags.begin() + static_cast<std::ptrdiff_t>(k - 1),
                       mags.end());
      c.prune_threshold = mags[k - 1];
    }
  }
  c.Validate();
  return c;
}

std::vector<TensorShape> NetworkDescriptor::InputShapes() const {
  Require(!layers.empty(), ErrorCode::kInvalidArgument,
          "network has no layers");
  Require(input.size() > 0, ErrorCode::kInvalidArgument,
          "network input is empty");
  std::vector<TensorShape> shapes;
  TensorShape cur = input;
  for (const LayerSpec& l : layers) {
    shapes.push_back(cur);
    cur = OutputOf(l, cur);
  }
  return shapes;
}

std::vector<TensorShape> NetworkDescriptor::OutputShapes() const {
  std::vector<TensorShape> in = InputShapes();
  std::vector<TensorShape> out;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    out.push_back(OutputOf(layers[i], in[i]));
  }
  return out;
}

std::vector<WeightShape> NetworkDescriptor::WeightShapes() const {
  const std::vector<TensorShape> in = InputShapes();
  std::vector<WeightShape> out;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const LayerSpec& l = layers[i];
    if (l.kind == LayerKind::kConv) {
      out.push_back({l.name, l.out_channels, ConvOf(l).patch_size(in[i])});
    } else if (l.kind == LayerKind::kFc) {
      out.push_back({l.name, l.out_features, in[i].size()});
    }
  }
  return out;
}

NetworkDescriptor ParseNetwork(const std::string& text) {
  NetworkDescriptor net;
  try {
    const Json doc = Json::parse(text);
    CheckKeys(doc, {"name", "input", "compression", "layers"}, "network");
    net.name = doc.value("name", std::string("network"));
    const Json& in = doc.at("input");
    CheckKeys(in, {"channels", "height", "width"}, "input");
    net.input = {in.at("channels").get<std::size_t>(),
                 in.value("height", std::size_t{1}),
                 in.value("width", std::size_t{1})};
    if (doc.contains("compression")) {
      net.compression = CompressionFromJson(doc["compression"], "network");
    }
    std::set<std::string> names;
    for (const Json& l : doc.at("layers")) {
      net.layers.push_back(LayerFromJson(l, net.layers.size()));
      Require(names.insert(net.layers.back().name).second, ErrorCode::kParse,
              "duplicate layer name '" + net.layers.back().name + "'");
    }
  } catch (const Json::exception& e) {
    Fail(ErrorCode::kParse, std::string("bad network JSON: ") + e.what());
  }
  net.OutputShapes();  // validates the chain
  return net;
}

std::string NetworkToJson(const NetworkDescriptor& net) {
  Json doc;
  doc["name"] = net.name;
  doc["input"] = {{"channels", net.input.channels},
                  {"height", net.input.height},
                  {"width", net.input.width}};
  const Json c = CompressionToJson(net.compression);
  if (!c.empty()) doc["compression"] = c;
  doc["layers"] = Json::array();
  for (const LayerSpec& l : net.layers) doc["layers"].push_back(LayerToJson(l));
  return doc.dump(2) + "\n";
}

NetworkDescriptor LoadNetwork(const std::filesystem::path& path) {
  std::ifstream in(path);
  Require(static_cast<bool>(in), ErrorCode::kIo,
          "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ParseNetwork(ss.str());
}

CompressionSpec ParseCompressionSpec(const std::string& text) {
  try {
    return CompressionFromJson(Json::parse(text), "compression");
  } catch (const Json::exception& e) {
    Fail(ErrorCode::kParse, std::string("bad compression JSON: ") + e.what());
  }
}

Network Network::Build(const NetworkDescriptor& descriptor,
                       const codec::CompressedModel& model, int threads) {
  Network net;
  net.descriptor_ = descriptor;
  const std::vector<TensorShape> in = descriptor.InputShapes();
  const std::vector<WeightShape> shapes = descriptor.WeightShapes();
  Require(model.layers.size() == shapes.size(), ErrorCode::kShapeMismatch,
          "model has " + std::to_string(model.layers.size()) +
              " weighted layers, network needs " +
              std::to_string(shapes.size()));
  std::size_t next = 0;
  for (std::size_t i = 0; i < descriptor.layers.size(); ++i) {
    const LayerSpec& l = descriptor.layers[i];
    std::unique_ptr<kernels::Layer> layer;
    if (l.has_weights()) {
      const WeightShape& want = shapes[next];
      auto weights =
          std::make_shared<const codec::EncodedLayer>(model.layers[next]);
      ++next;
      Require(weights->rows == want.rows && weights->cols == want.cols,
              ErrorCode::kShapeMismatch,
              "layer " + l.name + " expects " + std::to_string(want.rows) +
                  "x" + std::to_string(want.cols) + " weights, model has " +
                  std::to_string(weights->rows) + "x" +
                  std::to_string(weights->cols));
      if (l.kind == LayerKind::kConv) {
        layer = std::make_unique<kernels::ConvLayer>(
            l.name, std::move(weights), in[i], ConvOf(l), threads);
      } else {
        layer = std::make_unique<kernels::FcLayer>(l.name, std::move(weights),
                                                   threads);
      }
    } else if (l.kind == LayerKind::kRelu) {
      layer = std::make_unique<kernels::ReluLayer>(l.name, in[i].size());
    } else if (l.kind == LayerKind::kPool) {
      layer = std::make_unique<kernels::PoolLayer>(
          l.name, in[i], kernels::PoolGeometry{l.kernel, l.stride});
    } else {
      layer = std::make_unique<kernels::LrnLayer>(l.name, in[i], l.lrn);
    }
    net.layers_.push_back(std::move(layer));
  }
  return net;
}

kernels::ActivationMatrix Network::Forward(
    kernels::ConstActivationView in) const {
  Require(in.rows == in_features(), ErrorCode::kShapeMismatch,
          "network input has " + std::to_string(in.rows) +
              " features, expected " + std::to_string(in_features()));
  kernels::ActivationMatrix cur = layers_.front()->Forward(in);
  for (std::size_t i = 1; i < layers_.size(); ++i) {
    cur = layers_[i]->Forward(cur.view());
  }
  return cur;
}

}  // namespace cramnet::engine
