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

#ifndef CRAMNET_COMMON_THREADING_H_
#define CRAMNET_COMMON_THREADING_H_

#include <cstddef>
#include <functional>

namespace cramnet {

// Worker count from CRAMNET_THREADS, falling back to hardware parallelism.
int DefaultThreadCount();

// Runs fn(worker, task) for task in [0, num_tasks). Task t is always handled
// by worker t % workers, so a fixed worker count yields a fixed schedule.
// Exceptions thrown by any worker are rethrown on the calling thread.
void ParallelFor(std::size_t num_tasks, int workers,
                 const std::function<void(int, std::size_t)>& fn);

}  // namespace cramnet

#endif  // CRAMNET_COMMON_THREADING_H_
