/* Copyright 2026 The HRForge Authors

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef HRFORGE_COMMANDS_HPP_
#define HRFORGE_COMMANDS_HPP_

// Command implementations behind the hrforge tool. Each returns a process
// exit code (see ExitCode) and writes human-readable output to `out` and
// diagnostics to `err`.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>

#include "hrforge/config.hpp"
#include "hrforge/gradcheck.hpp"
#include "hrforge/run_config.hpp"

namespace hrforge {

struct CliOptions {
  std::string config;  // path or preset name
  std::optional<std::pair<int64_t, int64_t>> size;
  std::optional<uint64_t> seed;
  std::optional<Precision> precision;
  std::string out;
  bool flip_eval = false;
  std::string checkpoint;       // eval
  std::string resume;           // train
  std::string format = "table"; // cost: table, tsv, json
  bool backbone_only = false;   // cost
  int64_t samples = 0;          // gen-data; 0 keeps data.samples
  bool inject_fault = false;    // gradcheck negative control
};

// Config from --config (or `fallback` when absent) with --size, --seed and
// --precision applied.
RunConfig resolve_config(const CliOptions& opts,
                         const std::string& fallback = "");

int cmd_describe(const CliOptions& opts, std::ostream& out, std::ostream& err);
int cmd_cost(const CliOptions& opts, std::ostream& out, std::ostream& err);
int cmd_gradcheck(const CliOptions& opts, std::ostream& out, std::ostream& err);
int cmd_train(const CliOptions& opts, std::ostream& out, std::ostream& err);
int cmd_eval(const CliOptions& opts, std::ostream& out, std::ostream& err);
int cmd_gen_data(const CliOptions& opts, std::ostream& out, std::ostream& err);

// Dispatches by name; maps exceptions to exit codes.
int run_command(const std::string& name, const CliOptions& opts,
                std::ostream& out, std::ostream& err);

// Central-difference check of a whole network in double precision: batch of
// two random inputs, batch norm in training mode, loss = sum over outputs of
// <output, fixed random weights>. Probes every parameter tensor and the
// input. The relative-error floor is multiplied by max(1, |loss|).
GradCheckReport network_gradcheck(const NetworkConfig& config, uint64_t seed,
                                  const GradCheckOptions& options,
                                  bool inject_fault = false);

}  // namespace hrforge

#endif  // HRFORGE_COMMANDS_HPP_
