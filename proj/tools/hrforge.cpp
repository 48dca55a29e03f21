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

// hrforge: describe, cost, gradcheck, train, eval and gen-data.

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "hrforge/commands.hpp"
#include "hrforge/error.hpp"
#include "hrforge/parallel.hpp"
#include "hrforge/run_config.hpp"

namespace {

using hrforge::CliOptions;

void add_common(CLI::App* cmd, CliOptions& o, std::string& size,
                std::string& precision, uint64_t& seed) {
  cmd->add_option("--config", o.config, "config file or preset name");
  cmd->add_option("--size", size, "input size HxW");
  cmd->add_option("--seed", seed, "random seed");
  cmd->add_option("--precision", precision, "verify or fast")
      ->check(CLI::IsMember({"verify", "fast"}));
  cmd->add_option("--out", o.out, "output directory");
}

}  // namespace

int main(int argc, char** argv) {
  hrforge::kernel_threads();  // applies HRNET_FORGE_THREADS

  CLI::App app{"HRNet reference toolkit"};
  app.require_subcommand(1);
  CliOptions o;
  std::string size;
  std::string precision;
  uint64_t seed = 0;

  std::string presets;
  for (const auto& p : hrforge::preset_names()) {
    presets += (presets.empty() ? "" : ", ") + p;
  }

  auto* describe = app.add_subcommand("describe", "list layers and shapes");
  auto* cost = app.add_subcommand("cost", "parameter and FLOP report");
  auto* gradcheck =
      app.add_subcommand("gradcheck", "finite-difference gradient check");
  auto* train = app.add_subcommand("train", "train on a dataset");
  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint");
  auto* gen = app.add_subcommand("gen-data", "write a synthetic dataset");
  for (CLI::App* cmd : {describe, cost, gradcheck, train, eval, gen}) {
    add_common(cmd, o, size, precision, seed);
  }
  app.footer("Presets: " + presets +
             "\nExit codes: 0 ok, 1 usage/config, 2 numerical, 3 I/O.");
  cost->add_option("--format", o.format, "table, tsv or json")
      ->check(CLI::IsMember({"table", "tsv", "json"}));
  cost->add_flag("--backbone-only", o.backbone_only, "exclude the head");
  gradcheck->add_flag("--inject-fault", o.inject_fault,
                      "corrupt conv weight gradients (negative control)");
  train->add_option("--resume", o.resume, "checkpoint to resume from");
  eval->add_option("--checkpoint", o.checkpoint, "checkpoint to evaluate");
  eval->add_flag("--flip-eval", o.flip_eval,
                 "average with the horizontally flipped prediction");
  gen->add_option("--samples", o.samples, "number of samples");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : static_cast<int>(hrforge::ExitCode::kUsage);
  }

  try {
    if (!size.empty()) o.size = hrforge::parse_size(size);
    if (!precision.empty()) o.precision = hrforge::parse_precision(precision);
  } catch (const hrforge::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(e.code());
  }
  const CLI::App* cmd = app.get_subcommands().front();
  if (cmd->count("--seed") > 0) o.seed = seed;
  return hrforge::run_command(cmd->get_name(), o, std::cout, std::cerr);
}
