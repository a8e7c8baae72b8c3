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

// Command-line front end:
//
//   cramnet synth-weights net.json -o weights.bin --shapes shapes.json
//   cramnet compress weights.bin shapes.json [--config c.json] -o model.cdni
//   cramnet decompress model.cdni -o weights.bin --shapes shapes.json
//   cramnet profile model.cdni net.json --batches 1..64 -o profile.csv
//   cramnet plan profile.csv --tot BYTES [--latency MS] -K N -o plan.json
//   cramnet infer model.cdni net.json --plan plan.json --input dir -o out.csv
//   cramnet bench --sweep-blocks [-o sweep.csv]

#ifndef CRAMNET_ENGINE_CLI_H_
#define CRAMNET_ENGINE_CLI_H_

#include <iosfwd>

namespace cramnet::engine {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitDataError = 2,
  kExitInfeasible = 3,
};

int RunCli(int argc, const char* const* argv, std::ostream& out,
           std::ostream& err);

}  // namespace cramnet::engine

#endif  // CRAMNET_ENGINE_CLI_H_
