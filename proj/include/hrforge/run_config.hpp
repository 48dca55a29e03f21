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

#ifndef HRFORGE_RUN_CONFIG_HPP_
#define HRFORGE_RUN_CONFIG_HPP_

// Flat key = value run configuration.
//
//   # comment
//   network.width = 18
//   network.stage_blocks = 1,4,3
//   network.input_size = 512x1024
//
// Keys are fixed; unknown or repeated keys are errors reported with their
// line number. render() emits every key in a fixed order, and
// parse(render(c)) == c for every valid c.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hrforge/config.hpp"
#include "hrforge/optim.hpp"
#include "hrforge/tensor.hpp"

namespace hrforge {

enum class Task { kSegmentation, kLandmarks, kClassification, kPyramid };
std::string to_string(Task t);
Task parse_task(const std::string& s);

std::string to_string(Precision p);
Precision parse_precision(const std::string& s);

enum class DataSource { kSynthetic, kDirectory };

struct OptimConfig {
  double base_lr = 0.01;
  double momentum = 0.9;
  double weight_decay = 0.0005;
  bool nesterov = false;
  ScheduleKind schedule = ScheduleKind::kPoly;
  double poly_power = 0.9;
  int64_t max_iter = 2000;
  std::vector<int64_t> milestones;
  double step_factor = 0.1;
  int64_t batch_size = 8;
  bool operator==(const OptimConfig&) const = default;
};

struct TrainConfig {
  int64_t checkpoint_every = 500;
  int64_t log_every = 1;
  bool operator==(const TrainConfig&) const = default;
};

struct DataConfig {
  DataSource source = DataSource::kSynthetic;
  std::string dir;
  int64_t samples = 64;
  bool operator==(const DataConfig&) const = default;
};

struct AugmentConfig {
  double flip_prob = 0.5;
  double scale_min = 1.0;
  double scale_max = 1.0;
  double rotation_deg = 0.0;
  int64_t crop_h = 0;  // 0 keeps the network input size
  int64_t crop_w = 0;
  bool operator==(const AugmentConfig&) const = default;
};

struct MetricsConfig {
  double sigma = 1.5;
  double decode_shift = 0.0;
  double fr_threshold = 0.1;
  double nme_normalizer = 1.0;
  bool operator==(const MetricsConfig&) const = default;
};

struct RunConfig {
  uint64_t seed = 0;
  Precision precision = Precision::kVerify;
  Task task = Task::kSegmentation;
  NetworkConfig network;
  OptimConfig optim;
  TrainConfig train;
  DataConfig data;
  AugmentConfig augment;
  MetricsConfig metrics;

  Schedule schedule() const;
  // Network validation plus task/head consistency.
  void validate() const;
  bool operator==(const RunConfig&) const = default;
};

RunConfig parse_run_config(const std::string& text);
std::string render_run_config(const RunConfig& config);

// 64-bit FNV-1a.
uint64_t fnv1a64(const std::string& bytes);
// Digest of the canonical rendering.
uint64_t config_digest(const RunConfig& config);

// Built-in configurations: w48seg, w40seg, w18lmk, w18cls, w30cls, w40cls,
// w27ci, w25cii, w48p, tiny-seg, tiny-lmk.
std::optional<RunConfig> preset(const std::string& name);
std::vector<std::string> preset_names();

// A readable file path, or else a preset name. Missing files raise IoError.
RunConfig load_run_config(const std::string& path_or_preset);

// "HxW" or a single "N" for a square size.
std::pair<int64_t, int64_t> parse_size(const std::string& s);

}  // namespace hrforge

#endif  // HRFORGE_RUN_CONFIG_HPP_
