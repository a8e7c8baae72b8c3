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

// Per-layer cost profiles: measured time and the activation / workspace
// footprint of every layer over a grid of batch sizes.

#ifndef CRAMNET_PROFILER_PROFILE_H_
#define CRAMNET_PROFILER_PROFILE_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "cramnet/kernels/layers.h"

namespace cramnet::profiler {

struct BatchSample {
  double time_ms = 0.0;
  double decode_ms = 0.0;
  double compute_ms = 0.0;
  std::uint64_t in_bytes = 0;
  std::uint64_t out_bytes = 0;

  bool operator==(const BatchSample&) const = default;
};

struct LayerProfile {
  std::string name;
  std::size_t index = 0;
  std::uint64_t ws_bytes = 0;
  std::map<std::size_t, BatchSample> samples;  // keyed by batch size

  const BatchSample& at(std::size_t batch) const;
  bool has(std::size_t batch) const { return samples.contains(batch); }
  std::vector<std::size_t> batches() const;

  // Activation bytes of one image. Requires at least one sample.
  std::uint64_t in_bytes_per_image() const;
  std::uint64_t out_bytes_per_image() const;

  // Replaces each time by the running maximum over smaller batches so that
  // time never decreases with batch size. Decode and compute are left as
  // measured.
  void MakeTimeMonotone();

  bool operator==(const LayerProfile&) const = default;
};

struct ProfileStore {
  std::string network;
  // Free-form key/value pairs (threads, timestamp, notes).
  std::map<std::string, std::string> metadata;
  std::vector<LayerProfile> layers;

  bool operator==(const ProfileStore&) const = default;
};

inline constexpr char kProfileCsvHeader[] =
    "layer,i,B,time_ms,decode_ms,compute_ms,in_bytes,out_bytes,ws_bytes";

// CSV with one row per (layer, batch). Metadata and the network name are
// written as leading "# key=value" lines. Reals are printed with 17
// significant digits so a load reproduces the store exactly.
void WriteProfileCsv(const ProfileStore& store, std::ostream& out);
// Throws kParse (with the offending line number) on schema violations.
ProfileStore ReadProfileCsv(std::istream& in);

void SaveProfile(const ProfileStore& store, const std::filesystem::path& path);
ProfileStore LoadProfile(const std::filesystem::path& path);

struct ProfileOptions {
  std::vector<std::size_t> batches;
  int repetitions = 3;
  bool monotone_time = true;
  std::uint64_t seed = 1;
};

// Runs `layer` on random inputs at every batch size: one warm-up, then
// `repetitions` timed runs. Time is the median run; decode and compute come
// from that same run.
LayerProfile ProfileLayer(const kernels::Layer& layer, std::size_t index,
                          const ProfileOptions& options);

// Parses "1..64" (every integer), "1,2,4" or a mix such as "1..4,8,16".
std::vector<std::size_t> ParseBatchList(const std::string& text);

}  // namespace cramnet::profiler

#endif  // CRAMNET_PROFILER_PROFILE_H_
