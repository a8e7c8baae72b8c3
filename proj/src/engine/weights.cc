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

#include "cramnet/engine/weights.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>

#include "cramnet/codec/encoded_layer.h"
#include "cramnet/common/error.h"
#include "json.hpp"

namespace cramnet::engine {
namespace {

using Json = nlohmann::json;

void PutFloat(std::vector<std::uint8_t>& out, float v) {
  const auto u = std::bit_cast<std::uint32_t>(v);
  for (int s = 0; s < 32; s += 8) {
    out.push_back(static_cast<std::uint8_t>(u >> s));
  }
}

float GetFloat(const std::vector<std::uint8_t>& in, std::size_t pos) {
  std::uint32_t u = 0;
  for (int b = 0; b < 4; ++b) {
    u |= static_cast<std::uint32_t>(in[pos + b]) << (8 * b);
  }
  return std::bit_cast<float>(u);
}

std::string ReadText(const std::filesystem::path& path) {
  std::ifstream in(path);
  Require(static_cast<bool>(in), ErrorCode::kIo,
          "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

std::string WeightManifestJson(const std::vector<NamedWeights>& weights) {
  Json layers = Json::array();
  for (const NamedWeights& w : weights) {
    layers.push_back({{"name", w.name},
                      {"rows", w.matrix.rows},
                      {"cols", w.matrix.cols},
                      {"bias", w.matrix.bias.has_value()}});
  }
  return Json{{"layers", layers}}.dump(2) + "\n";
}

std::vector<std::uint8_t> WeightBlob(const std::vector<NamedWeights>& weights) {
  std::vector<std::uint8_t> out;
  for (const NamedWeights& w : weights) {
    for (float v : w.matrix.data) PutFloat(out, v);
    if (w.matrix.bias) {
      for (float v : *w.matrix.bias) PutFloat(out, v);
    }
  }
  return out;
}

std::vector<NamedWeights> ReadWeights(const std::string& manifest_json,
                                      const std::vector<std::uint8_t>& blob) {
  std::vector<NamedWeights> out;
  std::size_t pos = 0;
  try {
    const Json doc = Json::parse(manifest_json);
    for (const Json& l : doc.at("layers")) {
      NamedWeights w;
      w.name = l.at("name").get<std::string>();
      const auto rows = l.at("rows").get<std::size_t>();
      const auto cols = l.at("cols").get<std::size_t>();
      const bool bias = l.value("bias", false);
      const std::size_t floats = rows * cols + (bias ? rows : 0);
      Require(blob.size() - pos >= floats * 4, ErrorCode::kTruncated,
              "weight blob ends inside layer " + w.name);
      w.matrix = codec::DenseMatrix(rows, cols);
      for (float& v : w.matrix.data) {
        v = GetFloat(blob, pos);
        pos += 4;
      }
      if (bias) {
        std::vector<float> b(rows);
        for (float& v : b) {
          v = GetFloat(blob, pos);
          pos += 4;
        }
        w.matrix.bias = std::move(b);
      }
      out.push_back(std::move(w));
    }
  } catch (const Json::exception& e) {
    Fail(ErrorCode::kParse, std::string("bad weight manifest: ") + e.what());
  }
  Require(pos == blob.size(), ErrorCode::kMalformedStream,
          "weight blob has " + std::to_string(blob.size() - pos) +
              " bytes beyond the manifest");
  return out;
}

void SaveWeights(const std::vector<NamedWeights>& weights,
                 const std::filesystem::path& blob_path,
                 const std::filesystem::path& manifest_path) {
  const std::vector<std::uint8_t> blob = WeightBlob(weights);
  std::ofstream b(blob_path, std::ios::binary);
  Require(static_cast<bool>(b), ErrorCode::kIo,
          "cannot open " + blob_path.string() + " for writing");
  b.write(reinterpret_cast<const char*>(blob.data()),
          static_cast<std::streamsize>(blob.size()));
  std::ofstream m(manifest_path);
  Require(static_cast<bool>(m), ErrorCode::kIo,
          "cannot open " + manifest_path.string() + " for writing");
  m << WeightManifestJson(weights);
  Require(b.good() && m.good(), ErrorCode::kIo, "failed writing weights");
}

std::vector<NamedWeights> LoadWeights(
    const std::filesystem::path& blob_path,
    const std::filesystem::path& manifest_path) {
  std::ifstream b(blob_path, std::ios::binary);
  Require(static_cast<bool>(b), ErrorCode::kIo,
          "cannot open " + blob_path.string());
  const std::vector<std::uint8_t> blob((std::istreambuf_iterator<char>(b)),
                                       std::istreambuf_iterator<char>());
  return ReadWeights(ReadText(manifest_path), blob);
}

std::vector<NamedWeights> RandomWeights(const NetworkDescriptor& net,
                                        std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<NamedWeights> out;
  for (const WeightShape& s : net.WeightShapes()) {
    NamedWeights w;
    w.name = s.layer;
    w.matrix = codec::DenseMatrix(s.rows, s.cols);
    std::normal_distribution<float> dist(
        0.0f, 1.0f / std::sqrt(static_cast<float>(s.cols)));
    for (float& v : w.matrix.data) v = dist(rng);
    std::vector<float> bias(s.rows);
    for (float& v : bias) v = 0.1f * dist(rng);
    w.matrix.bias = std::move(bias);
    out.push_back(std::move(w));
  }
  return out;
}

CompressionPlan ParseCompressionPlan(const std::string& text) {
  CompressionPlan plan;
  try {
    Json doc = Json::parse(text);
    Require(doc.is_object(), ErrorCode::kParse,
            "compression config must be an object");
    if (doc.contains("layers")) {
      for (const auto& [name, spec] : doc["layers"].items()) {
        plan.per_layer.emplace_back(name, ParseCompressionSpec(spec.dump()));
      }
      doc.erase("layers");
    }
    plan.defaults = ParseCompressionSpec(doc.dump());
  } catch (const Json::exception& e) {
    Fail(ErrorCode::kParse, std::string("bad compression config: ") +
                                e.what());
  }
  return plan;
}

codec::CompressedModel CompressWeights(
    const std::vector<NamedWeights>& weights, const CompressionPlan& plan,
    const NetworkDescriptor* net) {
  for (const auto& [name, spec] : plan.per_layer) {
    const bool known = std::any_of(
        weights.begin(), weights.end(),
        [&name = name](const NamedWeights& w) { return w.name == name; });
    Require(known, ErrorCode::kInvalidArgument,
            "compression config names unknown layer '" + name + "'");
  }
  std::vector<CompressionSpec> base(weights.size());
  if (net != nullptr) {
    const std::vector<WeightShape> shapes = net->WeightShapes();
    Require(shapes.size() == weights.size(), ErrorCode::kShapeMismatch,
            "network has " + std::to_string(shapes.size()) +
                " weighted layers, weights file has " +
                std::to_string(weights.size()));
    std::size_t next = 0;
    for (const LayerSpec& l : net->layers) {
      if (!l.has_weights()) continue;
      const WeightShape& s = shapes[next];
      const codec::DenseMatrix& m = weights[next].matrix;
      Require(m.rows == s.rows && m.cols == s.cols, ErrorCode::kShapeMismatch,
              "weights for " + l.name + " are " + std::to_string(m.rows) +
                  "x" + std::to_string(m.cols) + ", network needs " +
                  std::to_string(s.rows) + "x" + std::to_string(s.cols));
      base[next] = l.compression ? l.compression->Over(net->compression)
                                 : net->compression;
      ++next;
    }
  }
  codec::CompressedModel model;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    CompressionSpec spec = plan.defaults.Over(base[i]);
    for (const auto& [name, override_spec] : plan.per_layer) {
      if (name == weights[i].name) spec = override_spec.Over(spec);
    }
    model.layers.push_back(codec::CompressLayer(
        weights[i].matrix, spec.Resolve(weights[i].matrix)));
  }
  return model;
}

}  // namespace cramnet::engine
