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

#include "hrforge/heads.hpp"

#include "hrforge/error.hpp"

namespace hrforge {

namespace {

void require_branches(const BranchSet& branches, const char* head) {
  if (branches.size() != kNumBranches) {
    throw ConfigError(std::string(head) + " head needs 4 branches, got " +
                      std::to_string(branches.size()));
  }
}

// Branch r upsampled to the branch-0 grid, concatenated in branch order.
int concat_upsampled(GraphBuilder& b, const BranchSet& branches,
                     UpsampleMode mode) {
  std::vector<int> parts{branches[0]};
  for (int r = 1; r < kNumBranches; ++r) {
    parts.push_back(b.upsample(branches[r], 1 << r, mode));
  }
  return b.concat(parts);
}

}  // namespace

HeadSpec head_spec(const NetworkConfig& config) {
  HeadSpec s;
  s.variant = config.head;
  s.out_dim = config.num_outputs;
  s.pyramid_levels = config.head == HeadVariant::kV2p ? config.pyramid_levels : 0;
  s.mix_width = 15 * config.width;
  return s;
}

std::string pyramid_output_name(int level) {
  return "p" + std::to_string(level + 2);
}

int head_v1(GraphBuilder& b, const BranchSet& branches, int64_t out_dim) {
  require_branches(branches, "V1");
  ScopeGuard scope(b, "head");
  return b.conv(branches[0], out_dim, 1, 1, "classifier", true);
}

int head_v1h(GraphBuilder& b, const BranchSet& branches, int64_t out_dim) {
  require_branches(branches, "V1h");
  ScopeGuard scope(b, "head");
  const int64_t wide = 15 * b.channels(branches[0]);
  const int x = b.conv_bn(branches[0], wide, 1, 1, "widen", true);
  return b.conv(x, out_dim, 1, 1, "classifier", true);
}

int head_v2(GraphBuilder& b, const BranchSet& branches, int64_t out_dim,
            UpsampleMode mode) {
  require_branches(branches, "V2");
  ScopeGuard scope(b, "head");
  const int cat = concat_upsampled(b, branches, mode);
  const int mixed = b.conv_bn(cat, b.channels(cat), 1, 1, "mix", true);
  return b.conv(mixed, out_dim, 1, 1, "classifier", true);
}

std::vector<int> head_v2p(GraphBuilder& b, const BranchSet& branches,
                          int levels, UpsampleMode mode) {
  require_branches(branches, "V2p");
  if (levels < 1) throw ConfigError("V2p head needs at least one level");
  ScopeGuard scope(b, "head");
  const int cat = concat_upsampled(b, branches, mode);
  int x = b.conv_bn(cat, kPyramidWidth, 1, 1, "reduce", true);
  std::vector<int> maps{x};
  for (int l = 1; l < levels; ++l) {
    const Chw s = b.shape(x);
    if (s.h < 2 || s.w < 2) {  // floor(h/2) would be 0
      throw ConfigError("V2p head: pyramid level " + std::to_string(l) +
                        " would have spatial size < 1");
    }
    x = b.avg_pool(x, 2, 2);
    maps.push_back(x);
  }
  return maps;
}

int head_classification_c(GraphBuilder& b, const BranchSet& branches) {
  require_branches(branches, "ClsC");
  ScopeGuard scope(b, "head");
  static constexpr int64_t kWidths[kNumBranches] = {128, 256, 512, 1024};
  std::vector<int> wide;
  for (int r = 0; r < kNumBranches; ++r) {
    b.set_branch(r);
    wide.push_back(build_bottleneck(b, branches[r], kWidths[r] / 4, kWidths[r],
                                    1, "incre" + std::to_string(r)));
  }
  int y = wide[0];
  for (int r = 1; r < kNumBranches; ++r) {
    b.set_branch(r);
    const int down =
        b.conv_bn(y, kWidths[r], 3, 2, "downsamp" + std::to_string(r), true);
    y = b.add({wide[r], down});
  }
  b.set_branch(-1);
  y = b.conv_bn(y, kClsEmbeddingWidth, 1, 1, "final", true);
  return b.global_avg_pool(y);
}

int head_classification_ci(GraphBuilder& b, const BranchSet& branches) {
  require_branches(branches, "ClsCi");
  ScopeGuard scope(b, "head");
  std::vector<int> pooled;
  for (int r = 0; r < kNumBranches; ++r) {
    pooled.push_back(b.global_avg_pool(branches[r]));
  }
  return b.concat(pooled);
}

int head_classification_cii(GraphBuilder& b, const BranchSet& branches) {
  require_branches(branches, "ClsCii");
  ScopeGuard scope(b, "head");
  std::vector<int> parts;
  for (int r = 0; r < kNumBranches; ++r) {
    b.set_branch(r);
    ScopeGuard branch_scope(b, "branch" + std::to_string(r));
    int x = branches[r];
    for (int u = 0; u < kNumBranches - 1 - r; ++u) {
      const int64_t out = 2 * b.channels(x);
      x = build_bottleneck(b, x, out, out, 2, "unit" + std::to_string(u));
    }
    parts.push_back(b.conv_bn(x, kClsEmbeddingWidth / kNumBranches, 1, 1,
                              "project", true));
  }
  b.set_branch(-1);
  return b.global_avg_pool(b.concat(parts));
}

void attach_head(GraphBuilder& b, const BranchSet& branches,
                 const NetworkConfig& config) {
  b.set_labels("head", -1);
  switch (config.head) {
    case HeadVariant::kV1:
      b.mark_output("logits", head_v1(b, branches, config.num_outputs));
      break;
    case HeadVariant::kV1h:
      b.mark_output("logits", head_v1h(b, branches, config.num_outputs));
      break;
    case HeadVariant::kV2:
      b.mark_output("logits", head_v2(b, branches, config.num_outputs,
                                      config.head_upsample));
      break;
    case HeadVariant::kV2p: {
      const auto maps = head_v2p(b, branches, config.pyramid_levels,
                                 config.head_upsample);
      for (size_t l = 0; l < maps.size(); ++l) {
        b.mark_output(pyramid_output_name(static_cast<int>(l)), maps[l]);
      }
      break;
    }
    case HeadVariant::kClsC:
    case HeadVariant::kClsCi:
    case HeadVariant::kClsCii: {
      int emb = 0;
      if (config.head == HeadVariant::kClsC) {
        emb = head_classification_c(b, branches);
      } else if (config.head == HeadVariant::kClsCi) {
        emb = head_classification_ci(b, branches);
      } else {
        emb = head_classification_cii(b, branches);
      }
      b.set_labels("head", -1);
      b.mark_output("embedding", emb);
      ScopeGuard scope(b, "head");
      b.mark_output("logits", b.linear(emb, config.num_outputs, "classifier"));
      break;
    }
  }
}

}  // namespace hrforge
