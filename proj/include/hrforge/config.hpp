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

#ifndef HRFORGE_CONFIG_HPP_
#define HRFORGE_CONFIG_HPP_

#include <array>
#include <cstdint>
#include <string>

#include "hrforge/kernels.hpp"

namespace hrforge {

enum class HeadVariant { kV1, kV1h, kV2, kV2p, kClsC, kClsCi, kClsCii };

std::string to_string(HeadVariant v);
HeadVariant parse_head_variant(const std::string& s);
std::string to_string(UpsampleMode m);
UpsampleMode parse_upsample_mode(const std::string& s);

inline constexpr int kNumBranches = 4;

// Declarative description of one high-resolution network. Branch r runs at
// 1/2^(r+2) of the input with width * 2^r channels.
struct NetworkConfig {
  int64_t width = 18;
  std::array<int, 3> stage_blocks{1, 4, 3};
  int units_per_branch = 4;
  int stage1_units = 4;
  int64_t stage1_bottleneck_width = 64;
  int64_t stem_width = 64;
  int64_t input_channels = 3;
  HeadVariant head = HeadVariant::kV2;
  int64_t num_outputs = 19;
  int pyramid_levels = 5;
  int64_t input_h = 224;
  int64_t input_w = 224;
  UpsampleMode fusion_upsample = UpsampleMode::kNearest;
  UpsampleMode head_upsample = UpsampleMode::kBilinear;

  int64_t branch_width(int r) const { return width << r; }
  int64_t branch_h(int r) const { return input_h >> (r + 2); }
  int64_t branch_w(int r) const { return input_w >> (r + 2); }
  bool is_classification() const {
    return head == HeadVariant::kClsC || head == HeadVariant::kClsCi ||
           head == HeadVariant::kClsCii;
  }

  // Throws ConfigError naming the offending field.
  void validate() const;
  bool operator==(const NetworkConfig&) const = default;
};

// HRNet-tiny: width 4 with a slimmed stem and stage 1, used for gradient
// checks and toy training.
NetworkConfig tiny_config(int64_t input_size = 32);

}  // namespace hrforge

#endif  // HRFORGE_CONFIG_HPP_
