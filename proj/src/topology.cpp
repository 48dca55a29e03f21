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

#include "hrforge/topology.hpp"

#include <string>

#include "hrforge/error.hpp"
#include "hrforge/heads.hpp"

namespace hrforge {

namespace {
std::string idx(const char* prefix, int i) {
  return prefix + std::to_string(i);
}
}  // namespace

int build_stem(GraphBuilder& b, int input, const NetworkConfig& config) {
  const Chw in = b.shape(input);
  if (in.h % 4 != 0 || in.w % 4 != 0) {
    throw ConfigError("stem: input size " + std::to_string(in.h) + "x" +
                      std::to_string(in.w) + " is not divisible by 4");
  }
  b.set_labels("stem", -1);
  ScopeGuard scope(b, "stem");
  int x = b.conv_bn(input, config.stem_width, 3, 2, "conv1", true);
  x = b.conv_bn(x, config.stem_width, 3, 2, "conv2", true);
  return x;
}

int build_bottleneck(GraphBuilder& b, int x, int64_t mid_width,
                     int64_t out_width, int stride, const std::string& name) {
  ScopeGuard scope(b, name);
  int y = b.conv_bn(x, mid_width, 1, 1, "conv1", true);
  y = b.conv_bn(y, mid_width, 3, stride, "conv2", true);
  y = b.conv_bn(y, out_width, 1, 1, "conv3", false);
  int shortcut = x;
  if (b.channels(x) != out_width || stride != 1) {
    shortcut = b.conv_bn(x, out_width, 1, stride, "downsample", false);
  }
  return b.relu(b.add({y, shortcut}));
}

int build_stage1(GraphBuilder& b, int stem_out, const NetworkConfig& config) {
  b.set_labels("stage1", 0);
  ScopeGuard scope(b, "stage1");
  const int64_t mid = config.stage1_bottleneck_width;
  int x = stem_out;
  for (int u = 0; u < config.stage1_units; ++u) {
    x = build_bottleneck(b, x, mid, 4 * mid, 1, idx("unit", u));
  }
  return b.conv_bn(x, config.width, 3, 1, "reduce", true);
}

int build_branch_units(GraphBuilder& b, int x, int64_t width, int count) {
  if (count < 1) throw ConfigError("branch units: count must be >= 1");
  if (b.channels(x) != width) {
    throw ConfigError("branch units: input has " +
                      std::to_string(b.channels(x)) + " channels, expected " +
                      std::to_string(width));
  }
  for (int u = 0; u < count; ++u) {
    ScopeGuard scope(b, idx("unit", u));
    int y = b.conv_bn(x, width, 3, 1, "conv1", true);
    y = b.conv_bn(y, width, 3, 1, "conv2", false);
    x = b.relu(b.add({y, x}));
  }
  return x;
}

BranchSet build_fusion(GraphBuilder& b, const BranchSet& inputs,
                       const std::vector<int>& in_res,
                       const std::vector<int>& out_res,
                       const NetworkConfig& config,
                       const FusionOptions& options) {
  if (inputs.empty() || out_res.empty()) {
    throw ConfigError("fusion: input and output resolution sets must be "
                      "non-empty");
  }
  if (inputs.size() != in_res.size()) {
    throw ConfigError("fusion: one resolution id per input is required");
  }
  if (options.degenerate &&
      options.degenerate_out_widths.size() != out_res.size()) {
    throw ConfigError("fusion: degenerate mode needs one width per output");
  }
  const std::string stage = b.stage_label();
  BranchSet outputs;
  for (size_t o = 0; o < out_res.size(); ++o) {
    const int ro = out_res[o];
    b.set_branch(ro);
    ScopeGuard out_scope(b, idx("to", ro));
    std::vector<int> terms;
    for (size_t i = 0; i < inputs.size(); ++i) {
      const int ri = in_res[i];
      const int x = inputs[i];
      if (options.degenerate) {
        ConvSpec spec = make_conv(b.channels(x), options.degenerate_out_widths[o],
                                  options.degenerate_kernel, 1, false);
        terms.push_back(b.conv(x, spec, idx("from", ri)));
        continue;
      }
      if (ri == ro) {
        terms.push_back(x);
        continue;
      }
      if (!options.cross_terms) continue;
      ScopeGuard in_scope(b, idx("from", ri));
      const int64_t target = config.branch_width(ro);
      if (ri < ro) {
        const int gap = ro - ri;
        const Chw src = b.shape(x);
        const int64_t div = int64_t{1} << gap;
        if ((src.h >> gap) < 1 || (src.w >> gap) < 1 || src.h % div != 0 ||
            src.w % div != 0) {
          throw ConfigError("fusion: downsampling " + src.str() + " by " +
                            std::to_string(div) +
                            " gives a spatial size < 1 or a fractional size");
        }
        int y = x;
        const int64_t src_width = b.channels(x);
        for (int k = 0; k < gap; ++k) {
          const bool last = k == gap - 1;
          y = b.conv_bn(y, last ? target : src_width, 3, 2, idx("down", k),
                        !last);
        }
        terms.push_back(y);
      } else {
        int y = b.conv_bn(x, target, 1, 1, "reduce", false);
        y = b.upsample(y, 1 << (ri - ro), config.fusion_upsample);
        terms.push_back(y);
      }
    }
    if (terms.empty()) {
      throw ConfigError("fusion: output resolution " + std::to_string(ro) +
                        " receives no input");
    }
    const int sum = b.add(terms);
    outputs.push_back(options.degenerate ? sum : b.relu(sum));
  }
  b.set_labels(stage, -1);
  return outputs;
}

BranchSet build_transition(GraphBuilder& b, const BranchSet& branches,
                           int stage_index, const NetworkConfig& config) {
  if (stage_index < 2 || stage_index > 4) {
    throw ConfigError("transition: stage index must be 2, 3 or 4");
  }
  if (static_cast<int>(branches.size()) != stage_index - 1) {
    throw ConfigError("transition into stage " + std::to_string(stage_index) +
                      " expects " + std::to_string(stage_index - 1) +
                      " branches, got " + std::to_string(branches.size()));
  }
  ScopeGuard scope(b, idx("transition", stage_index));
  BranchSet out;
  for (size_t r = 0; r < branches.size(); ++r) {
    b.set_labels(idx("transition", stage_index), static_cast<int>(r));
    const int64_t want = config.branch_width(static_cast<int>(r));
    if (b.channels(branches[r]) == want) {
      out.push_back(branches[r]);
    } else {
      out.push_back(b.conv_bn(branches[r], want, 3, 1,
                              idx("branch", static_cast<int>(r)), true));
    }
  }
  const int r_new = stage_index - 1;
  b.set_labels(idx("transition", stage_index), r_new);
  out.push_back(b.conv_bn(out.back(), config.branch_width(r_new), 3, 2,
                          idx("branch", r_new), true));
  return out;
}

BranchSet build_backbone(GraphBuilder& b, int input,
                         const NetworkConfig& config) {
  int x = build_stem(b, input, config);
  x = build_stage1(b, x, config);
  BranchSet branches{x};
  for (int s = 2; s <= 4; ++s) {
    branches = build_transition(b, branches, s, config);
    const std::string stage = idx("stage", s);
    ScopeGuard stage_scope(b, stage);
    std::vector<int> res;
    for (size_t r = 0; r < branches.size(); ++r) {
      res.push_back(static_cast<int>(r));
    }
    for (int blk = 0; blk < config.stage_blocks[s - 2]; ++blk) {
      ScopeGuard block_scope(b, idx("block", blk));
      for (size_t r = 0; r < branches.size(); ++r) {
        b.set_labels(stage, static_cast<int>(r));
        ScopeGuard branch_scope(b, idx("branch", static_cast<int>(r)));
        branches[r] =
            build_branch_units(b, branches[r],
                               config.branch_width(static_cast<int>(r)),
                               config.units_per_branch);
      }
      b.set_labels(stage + "-fusion", -1);
      ScopeGuard fusion_scope(b, "fusion");
      branches = build_fusion(b, branches, res, res, config);
    }
  }
  return branches;
}

LayerGraph build_network(const NetworkConfig& config) {
  config.validate();
  GraphBuilder b;
  const int input =
      b.input("input", {config.input_channels, config.input_h, config.input_w});
  const BranchSet branches = build_backbone(b, input, config);
  for (size_t r = 0; r < branches.size(); ++r) {
    b.mark_output(idx("branch", static_cast<int>(r)), branches[r]);
  }
  attach_head(b, branches, config);
  return b.finish();
}

}  // namespace hrforge
