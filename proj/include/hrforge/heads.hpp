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

#ifndef HRFORGE_HEADS_HPP_
#define HRFORGE_HEADS_HPP_

// Output constructions over the four-resolution BranchSet.
//
//   V1    classifier on the 1/4-resolution branch only.
//   V1h   branch 0 widened to 15C by a 1x1 conv, then the classifier.
//   V2    all branches upsampled to 1/4 and concatenated (15C), mixed by a
//         1x1 conv, then the classifier.
//   V2p   the V2 concatenation reduced to 256 channels and average-pooled
//         into a pyramid "p2", "p3", ...
//   ClsC  bottlenecks to 128/256/512/1024, stride-2 downsample-and-add from
//         high to low resolution, 1x1 to 2048, global pooling.
//   ClsCi per-branch global pooling, concatenated to 15C.
//   ClsCii per-branch stride-2 bottlenecks down to 1/32, 1x1 to 512 each,
//         concatenated to 2048, global pooling.
//
// Dense heads emit "logits" at 1/4 resolution; classification heads emit
// "embedding" and "logits".

#include <cstdint>
#include <string>
#include <vector>

#include "hrforge/config.hpp"
#include "hrforge/graph.hpp"
#include "hrforge/topology.hpp"

namespace hrforge {

inline constexpr int64_t kPyramidWidth = 256;
inline constexpr int64_t kClsEmbeddingWidth = 2048;

struct HeadSpec {
  HeadVariant variant = HeadVariant::kV2;
  int64_t out_dim = 0;
  int pyramid_levels = 0;
  int64_t mix_width = 0;  // 15C
};

HeadSpec head_spec(const NetworkConfig& config);

int head_v1(GraphBuilder& b, const BranchSet& branches, int64_t out_dim);
int head_v1h(GraphBuilder& b, const BranchSet& branches, int64_t out_dim);
int head_v2(GraphBuilder& b, const BranchSet& branches, int64_t out_dim,
            UpsampleMode mode = UpsampleMode::kBilinear);
// Returns the pyramid maps from finest (1/4) to coarsest.
std::vector<int> head_v2p(GraphBuilder& b, const BranchSet& branches,
                          int levels,
                          UpsampleMode mode = UpsampleMode::kBilinear);
// Each returns the (n, d, 1, 1) embedding node.
int head_classification_c(GraphBuilder& b, const BranchSet& branches);
int head_classification_ci(GraphBuilder& b, const BranchSet& branches);
int head_classification_cii(GraphBuilder& b, const BranchSet& branches);

// Builds the configured head (plus a linear classifier for Cls*) and marks
// its outputs.
void attach_head(GraphBuilder& b, const BranchSet& branches,
                 const NetworkConfig& config);

// Names of the pyramid outputs, "p2" upward.
std::string pyramid_output_name(int level);

}  // namespace hrforge

#endif  // HRFORGE_HEADS_HPP_
