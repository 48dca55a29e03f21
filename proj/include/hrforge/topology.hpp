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

#ifndef HRFORGE_TOPOLOGY_HPP_
#define HRFORGE_TOPOLOGY_HPP_

// Backbone construction: stem, stage 1, and the repeated multi-resolution
// blocks of stages 2-4. Each block runs independent residual chains per
// branch (multi-resolution group convolution) followed by a full
// cross-resolution fusion (multi-resolution convolution).

#include <cstdint>
#include <vector>

#include "hrforge/config.hpp"
#include "hrforge/graph.hpp"

namespace hrforge {

// Node ids of the active branches; entry r is the resolution-r map.
using BranchSet = std::vector<int>;

// Two (3x3 stride-2 conv, BN, ReLU) units down to 1/4 resolution.
int build_stem(GraphBuilder& b, int input, const NetworkConfig& config);

// Bottleneck residual units (1x1 reduce, 3x3, 1x1 expand to 4x width,
// projection shortcut where widths differ) followed by a 3x3 conv-BN-ReLU
// down to `config.width` channels.
int build_stage1(GraphBuilder& b, int stem_out, const NetworkConfig& config);

// One bottleneck residual unit. The 3x3 conv carries the stride.
int build_bottleneck(GraphBuilder& b, int x, int64_t mid_width,
                     int64_t out_width, int stride, const std::string& name);

// `count` residual units of conv3x3-BN-ReLU-conv3x3-BN + identity, ReLU.
int build_branch_units(GraphBuilder& b, int x, int64_t width, int count);

struct FusionOptions {
  // false keeps only same-resolution (identity) paths.
  bool cross_terms = true;
  // Test-only construction: inputs share one resolution and every (i, o) pair,
  // including i == o, is a plain conv without BN; no ReLU after the sum.
  bool degenerate = false;
  std::vector<int64_t> degenerate_out_widths;
  int degenerate_kernel = 3;
};

// Output o = ReLU(sum_i adapt_{i->o}(x_i)). Downsampling uses chained
// stride-2 3x3 conv-BN units (ReLU between, none after the last; source width
// kept until the final conv). Upsampling uses 1x1 conv-BN, then
// interpolation. Inputs/outputs are indexed by resolution ids.
BranchSet build_fusion(GraphBuilder& b, const BranchSet& inputs,
                       const std::vector<int>& in_resolutions,
                       const std::vector<int>& out_resolutions,
                       const NetworkConfig& config,
                       const FusionOptions& options = {});

// Adds the next lower-resolution branch from the current lowest one via a
// stride-2 3x3 conv-BN-ReLU; existing branches pass through unchanged (or via
// a 3x3 conv-BN-ReLU if their width differs from the config).
BranchSet build_transition(GraphBuilder& b, const BranchSet& branches,
                           int stage_index, const NetworkConfig& config);

// Stem through stage 4; returns the four branch outputs.
BranchSet build_backbone(GraphBuilder& b, int input,
                         const NetworkConfig& config);

// Full network: backbone plus the configured head. Outputs are named
// "branch0".."branch3" and the head outputs (see heads.hpp).
LayerGraph build_network(const NetworkConfig& config);

}  // namespace hrforge

#endif  // HRFORGE_TOPOLOGY_HPP_
