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

#include "cramnet/engine/network_profile.h"

#include <chrono>
#include <ctime>

namespace cramnet::engine {

profiler::ProfileStore ProfileNetwork(const Network& net,
                                      const profiler::ProfileOptions& options,
                                      int threads) {
  profiler::ProfileStore store;
  store.network = net.descriptor().name;
  store.metadata["threads"] = std::to_string(threads);
  store.metadata["repetitions"] = std::to_string(options.repetitions);
  store.metadata["conv_compute"] = "includes im2col lowering";
  const std::time_t now =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char stamp[32];
  std::strftime(stamp, sizeof(stamp), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  store.metadata["timestamp"] = stamp;
  for (std::size_t i = 0; i < net.size(); ++i) {
    store.layers.push_back(profiler::ProfileLayer(net.layer(i), i, options));
  }
  return store;
}

}  // namespace cramnet::engine
