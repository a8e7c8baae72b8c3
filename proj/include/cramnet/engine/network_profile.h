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

// Per-layer profiling of a whole network.

#ifndef CRAMNET_ENGINE_NETWORK_PROFILE_H_
#define CRAMNET_ENGINE_NETWORK_PROFILE_H_

#include "cramnet/engine/network.h"
#include "cramnet/profiler/profile.h"

namespace cramnet::engine {

// Profiles each layer in order, one at a time. Metadata records the
// network name, worker count and a UTC timestamp.
profiler::ProfileStore ProfileNetwork(const Network& net,
                                      const profiler::ProfileOptions& options,
                                      int threads);

}  // namespace cramnet::engine

#endif  // CRAMNET_ENGINE_NETWORK_PROFILE_H_
