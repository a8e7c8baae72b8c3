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

#include "cramnet/profiler/profile.h"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>
#include <string_view>

#include "cramnet/common/error.h"

namespace cramnet::profiler {
namespace {

constexpr std::string_view kColumns[] = {
    "layer",      "i",        "B",         "time_ms", "decode_ms",
    "compute_ms", "in_bytes", "out_bytes", "ws_bytes"};
constexpr std::size_t kColumnCount = std::size(kColumns);

std::string FormatReal(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::vector<std::string> SplitCsv(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

[[noreturn]] void ParseError(std::size_t line, const std::string& what) {
  Fail(ErrorCode::kParse,
       "profile line " + std::to_string(line) + ": " + what);
}

template <typename T>
T ParseInt(const std::string& s, std::size_t line, std::string_view column) {
  T v{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    ParseError(line, "bad integer '" + s + "' in column " +
                         std::string(column));
  }
  return v;
}

double ParseReal(const std::string& s, std::size_t line,
                 std::string_view column) {
  if (s.empty()) ParseError(line, "empty value in column " + std::string(column));
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size()) {
    ParseError(line, "bad number '" + s + "' in column " + std::string(column));
  }
  return v;
}

std::string Trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r");
  const auto last = s.find_last_not_of(" \t\r");
  if (first == std::string::npos) return "";
  return s.substr(first, last - first + 1);
}

double Median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v[v.size() / 2];
}

}  // namespace

const BatchSample& LayerProfile::at(std::size_t batch) const {
  const auto it = samples.find(batch);
  Require(it != samples.end(), ErrorCode::kInvalidArgument,
          "layer " + name + " has no profile at batch " +
              std::to_string(batch));
  return it->second;
}

std::vector<std::size_t> LayerProfile::batches() const {
  std::vector<std::size_t> out;
  for (const auto& [b, s] : samples) out.push_back(b);
  return out;
}

std::uint64_t LayerProfile::in_bytes_per_image() const {
  Require(!samples.empty(), ErrorCode::kInvalidArgument,
          "layer " + name + " has no samples");
  const auto& [b, s] = *samples.begin();
  return s.in_bytes / b;
}

std::uint64_t LayerProfile::out_bytes_per_image() const {
  Require(!samples.empty(), ErrorCode::kInvalidArgument,
          "layer " + name + " has no samples");
  const auto& [b, s] = *samples.begin();
  return s.out_bytes / b;
}

void LayerProfile::MakeTimeMonotone() {
  double running = 0.0;
  for (auto& [b, s] : samples) {
    running = std::max(running, s.time_ms);
    s.time_ms = running;
  }
}

void WriteProfileCsv(const ProfileStore& store, std::ostream& out) {
  if (!store.network.empty()) out << "# network=" << store.network << '\n';
  for (const auto& [key, value] : store.metadata) {
    Require(key.find('=') == std::string::npos &&
                key.find('\n') == std::string::npos &&
                value.find('\n') == std::string::npos,
            ErrorCode::kInvalidArgument, "metadata entry cannot be written");
    out << "# " << key << '=' << value << '\n';
  }
  out << kProfileCsvHeader << '\n';
  for (const LayerProfile& layer : store.layers) {
    Require(layer.name.find_first_of(",\n#") == std::string::npos &&
                !layer.name.empty(),
            ErrorCode::kInvalidArgument,
            "layer name '" + layer.name + "' cannot be written to CSV");
    for (const auto& [b, s] : layer.samples) {
      out << layer.name << ',' << layer.index << ',' << b << ','
          << FormatReal(s.time_ms) << ',' << FormatReal(s.decode_ms) << ','
          << FormatReal(s.compute_ms) << ',' << s.in_bytes << ','
          << s.out_bytes << ',' << layer.ws_bytes << '\n';
    }
  }
}

ProfileStore ReadProfileCsv(std::istream& in) {
  ProfileStore store;
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::size_t> column_of;  // field position -> column id
  bool have_header = false;

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (Trim(line).empty()) continue;
    if (line[0] == '#') {
      const std::string body = Trim(line.substr(1));
      const auto eq = body.find('=');
      if (eq == std::string::npos) continue;  // plain comment
      const std::string key = Trim(body.substr(0, eq));
      const std::string value = Trim(body.substr(eq + 1));
      if (key == "network") {
        store.network = value;
      } else {
        store.metadata[key] = value;
      }
      continue;
    }

    const std::vector<std::string> fields = SplitCsv(line);
    if (!have_header) {
      std::vector<bool> seen(kColumnCount, false);
      for (const std::string& raw : fields) {
        const std::string name = Trim(raw);
        const auto it = std::find(std::begin(kColumns), std::end(kColumns), name);
        if (it == std::end(kColumns)) {
          ParseError(line_no, "unknown column '" + name + "'");
        }
        const auto id = static_cast<std::size_t>(it - std::begin(kColumns));
        if (seen[id]) ParseError(line_no, "duplicate column '" + name + "'");
        seen[id] = true;
        column_of.push_back(id);
      }
      for (std::size_t c = 0; c < kColumnCount; ++c) {
        if (!seen[c]) {
          ParseError(line_no, "missing column '" + std::string(kColumns[c]) + "'");
        }
      }
      have_header = true;
      continue;
    }

    if (fields.size() != kColumnCount) {
      ParseError(line_no, "expected " + std::to_string(kColumnCount) +
                              " fields, got " + std::to_string(fields.size()));
    }
    std::string value[kColumnCount];
    for (std::size_t f = 0; f < fields.size(); ++f) {
      value[column_of[f]] = Trim(fields[f]);
    }
    const std::string& name = value[0];
    if (name.empty()) ParseError(line_no, "empty layer name");
    const auto index = ParseInt<std::size_t>(value[1], line_no, kColumns[1]);
    const auto batch = ParseInt<std::size_t>(value[2], line_no, kColumns[2]);
    if (batch == 0) ParseError(line_no, "batch size must be positive");
    BatchSample s;
    s.time_ms = ParseReal(value[3], line_no, kColumns[3]);
    s.decode_ms = ParseReal(value[4], line_no, kColumns[4]);
    s.compute_ms = ParseReal(value[5], line_no, kColumns[5]);
    s.in_bytes = ParseInt<std::uint64_t>(value[6], line_no, kColumns[6]);
    s.out_bytes = ParseInt<std::uint64_t>(value[7], line_no, kColumns[7]);
    const auto ws = ParseInt<std::uint64_t>(value[8], line_no, kColumns[8]);
    if (!(s.time_ms >= 0.0)) ParseError(line_no, "negative or NaN time");

    if (store.layers.empty() || store.layers.back().name != name) {
      for (const LayerProfile& l : store.layers) {
        if (l.name == name) {
          ParseError(line_no, "rows of layer '" + name + "' are not contiguous");
        }
      }
      if (index != store.layers.size()) {
        ParseError(line_no, "layer index " + std::to_string(index) +
                                " out of order (expected " +
                                std::to_string(store.layers.size()) + ")");
      }
      LayerProfile layer;
      layer.name = name;
      layer.index = index;
      layer.ws_bytes = ws;
      store.layers.push_back(std::move(layer));
    }
    LayerProfile& layer = store.layers.back();
    if (index != layer.index || ws != layer.ws_bytes) {
      ParseError(line_no, "inconsistent index or ws_bytes for layer " + name);
    }
    if (!layer.samples.emplace(batch, s).second) {
      ParseError(line_no, "duplicate batch " + std::to_string(batch) +
                              " for layer " + name);
    }
  }
  if (!have_header) ParseError(line_no, "missing header");
  return store;
}

void SaveProfile(const ProfileStore& store, const std::filesystem::path& path) {
  std::ofstream out(path);
  Require(static_cast<bool>(out), ErrorCode::kIo,
          "cannot open " + path.string() + " for writing");
  WriteProfileCsv(store, out);
  Require(static_cast<bool>(out), ErrorCode::kIo,
          "failed writing " + path.string());
}

ProfileStore LoadProfile(const std::filesystem::path& path) {
  std::ifstream in(path);
  Require(static_cast<bool>(in), ErrorCode::kIo,
          "cannot open " + path.string());
  return ReadProfileCsv(in);
}

LayerProfile ProfileLayer(const kernels::Layer& layer, std::size_t index,
                          const ProfileOptions& options) {
  Require(!options.batches.empty(), ErrorCode::kInvalidArgument,
          "empty batch grid");
  Require(options.repetitions >= 3, ErrorCode::kInvalidArgument,
          "profiling needs at least 3 repetitions");
  using Clock = std::chrono::steady_clock;

  LayerProfile profile;
  profile.name = layer.name();
  profile.index = index;
  profile.ws_bytes = layer.ws_bytes();

  std::mt19937_64 rng(options.seed + index);
  std::uniform_real_distribution<float> dist(-1.0f, 1.0f);
  for (std::size_t batch : options.batches) {
    Require(batch >= 1, ErrorCode::kInvalidArgument, "batch must be >= 1");
    kernels::ActivationMatrix input(layer.in_features(), batch);
    for (float& v : input.data) v = dist(rng);
    kernels::ActivationMatrix output(layer.out_features(), batch);

    layer.Forward(input, output.mutable_view(), nullptr);  // warm-up
    std::vector<double> totals;
    std::vector<kernels::KernelStats> stats(options.repetitions);
    for (int rep = 0; rep < options.repetitions; ++rep) {
      const auto t0 = Clock::now();
      layer.Forward(input, output.mutable_view(), &stats[rep]);
      totals.push_back(
          std::chrono::duration<double, std::milli>(Clock::now() - t0)
              .count());
    }
    const double median = Median(totals);
    const auto pick = static_cast<std::size_t>(
        std::find(totals.begin(), totals.end(), median) - totals.begin());

    BatchSample s;
    s.time_ms = median;
    s.decode_ms = stats[pick].decode_ms;
    s.compute_ms = stats[pick].compute_ms;
    s.in_bytes = static_cast<std::uint64_t>(layer.in_features()) * batch *
                 sizeof(float);
    s.out_bytes = static_cast<std::uint64_t>(layer.out_features()) * batch *
                  sizeof(float);
    profile.samples[batch] = s;
  }
  if (options.monotone_time) profile.MakeTimeMonotone();
  return profile;
}

std::vector<std::size_t> ParseBatchList(const std::string& text) {
  std::vector<std::size_t> out;
  std::istringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = Trim(item);
    const auto dots = item.find("..");
    auto parse = [&](const std::string& s) {
      std::size_t v = 0;
      const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
      Require(ec == std::errc() && ptr == s.data() + s.size() && v >= 1,
              ErrorCode::kParse, "bad batch size '" + s + "'");
      return v;
    };
    if (dots == std::string::npos) {
      out.push_back(parse(item));
    } else {
      const std::size_t lo = parse(item.substr(0, dots));
      const std::size_t hi = parse(item.substr(dots + 2));
      Require(lo <= hi, ErrorCode::kParse, "empty batch range '" + item + "'");
      for (std::size_t b = lo; b <= hi; ++b) out.push_back(b);
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  Require(!out.empty(), ErrorCode::kParse, "empty batch list");
  return out;
}

}  // namespace cramnet::profiler
