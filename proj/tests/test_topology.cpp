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

#include <gtest/gtest.h>

#include "hrforge/error.hpp"
#include "hrforge/heads.hpp"
#include "hrforge/network.hpp"
#include "hrforge/topology.hpp"
#include "oracles.hpp"

namespace hrforge {
namespace {

TEST(Fusion, MatchesBlockMatrixConvolution) {
  for (uint64_t s = 0; s < 20; ++s) {
    EXPECT_LE(oracle::fusion_block_matrix_error(s), 1e-10) << "instance " << s;
  }
}

TEST(Fusion, NeedsOneResolutionPerInput) {
  GraphBuilder b;
  const int x = b.input("x", {4, 8, 8});
  EXPECT_THROW(build_fusion(b, {x}, {0, 1}, {0}, tiny_config()), ConfigError);
}

TEST(Fusion, CrossTermsOffKeepsIdentityOnly) {
  GraphBuilder b;
  const NetworkConfig cfg = tiny_config(64);
  const int x0 = b.input("x0", {4, 16, 16});
  const int x1 = b.input("x1", {8, 8, 8});
  FusionOptions opts;
  opts.cross_terms = false;
  build_fusion(b, {x0, x1}, {0, 1}, {0, 1}, cfg, opts);
  EXPECT_TRUE(b.graph().params().empty());
}

TEST(Fusion, DownsampleChainLength) {
  // 0 -> 2 needs two stride-2 convs; 2 -> 0 a single 1x1.
  GraphBuilder b;
  const NetworkConfig cfg = tiny_config(64);
  const int x0 = b.input("x0", {4, 16, 16});
  const int x2 = b.input("x2", {16, 4, 4});
  const BranchSet out = build_fusion(b, {x0, x2}, {0, 2}, {0, 2}, cfg);
  int convs = 0;
  for (const Node& n : b.graph().nodes())
    if (n.kind == OpKind::kConv) ++convs;
  EXPECT_EQ(convs, 3);
  EXPECT_EQ(b.shape(out[0]), (Chw{4, 16, 16}));
  EXPECT_EQ(b.shape(out[1]), (Chw{16, 4, 4}));
}

TEST(Fusion, RejectsFractionalDownsample) {
  GraphBuilder b;
  const NetworkConfig cfg = tiny_config(64);
  const int x0 = b.input("x0", {4, 6, 6});
  const int x2 = b.input("x2", {16, 2, 2});
  EXPECT_THROW(build_fusion(b, {x0, x2}, {0, 2}, {0, 2}, cfg), ConfigError);
}

TEST(Transition, AddsOneBranch) {
  GraphBuilder b;
  const NetworkConfig cfg = tiny_config(64);
  const int x0 = b.input("x0", {4, 16, 16});
  const BranchSet two = build_transition(b, {x0}, 2, cfg);
  ASSERT_EQ(two.size(), 2u);
  EXPECT_EQ(two[0], x0);
  EXPECT_EQ(b.shape(two[1]), (Chw{8, 8, 8}));
  EXPECT_THROW(build_transition(b, two, 2, cfg), ConfigError);
  EXPECT_THROW(build_transition(b, two, 5, cfg), ConfigError);
}

TEST(Backbone, BranchShapes) {
  const NetworkConfig cfg = tiny_config(64);
  const LayerGraph g = build_network(cfg);
  for (int r = 0; r < kNumBranches; ++r) {
    const Node& n = g.node(g.output("branch" + std::to_string(r)));
    EXPECT_EQ(n.shape, (Chw{cfg.branch_width(r), 16 >> r, 16 >> r}));
  }
}

TEST(Backbone, RejectsInputsThatDoNotDivide) {
  NetworkConfig cfg = tiny_config(64);
  cfg.input_h = cfg.input_w = 48;  // 1/32 branch would be 1.5
  EXPECT_THROW(build_network(cfg), ConfigError);
}

TEST(ShapeLaw, RandomConfigs) {
  for (uint64_t s = 0; s < 20; ++s) {
    EXPECT_EQ(oracle::shape_law_violation(1000 + s, false), "");
  }
}

TEST(ShapeLaw, ForwardTensorsAgreeWithStaticShapes) {
  EXPECT_EQ(oracle::shape_law_violation(7, true), "");
}

TEST(Heads, OutputWidths) {
  NetworkConfig cfg = tiny_config(64);
  for (HeadVariant v : {HeadVariant::kV1, HeadVariant::kV1h, HeadVariant::kV2}) {
    cfg.head = v;
    const LayerGraph g = build_network(cfg);
    EXPECT_EQ(g.node(g.output("logits")).shape, (Chw{2, 16, 16}))
        << to_string(v);
  }
  cfg.num_outputs = 10;
  const Chw emb{kClsEmbeddingWidth, 1, 1};
  cfg.head = HeadVariant::kClsC;
  EXPECT_EQ(build_network(cfg).node(build_network(cfg).output("embedding")).shape,
            emb);
  cfg.head = HeadVariant::kClsCi;
  const LayerGraph ci = build_network(cfg);
  EXPECT_EQ(ci.node(ci.output("embedding")).shape, (Chw{15 * cfg.width, 1, 1}));
  cfg.head = HeadVariant::kClsCii;
  const LayerGraph cii = build_network(cfg);
  EXPECT_EQ(cii.node(cii.output("embedding")).shape, emb);
  EXPECT_EQ(cii.node(cii.output("logits")).shape, (Chw{10, 1, 1}));
}

TEST(Heads, V1ForwardShape) {
  NetworkConfig cfg = tiny_config(32);
  cfg.head = HeadVariant::kV1;
  Network<double> net(build_network(cfg), 3);
  Tensor x(Shape{1, 3, 32, 32}, 0.25);
  net.forward(x, BnMode::kTrain);
  EXPECT_EQ(net.output("logits").shape(), (Shape{1, 2, 8, 8}));
}

TEST(Heads, ParseRoundTrip) {
  for (HeadVariant v : {HeadVariant::kV1, HeadVariant::kV1h, HeadVariant::kV2,
                        HeadVariant::kV2p, HeadVariant::kClsC,
                        HeadVariant::kClsCi, HeadVariant::kClsCii}) {
    EXPECT_EQ(parse_head_variant(to_string(v)), v);
  }
  EXPECT_THROW(parse_head_variant("V3"), ConfigError);
}

TEST(Network, ReshapedGraphKeepsParameters) {
  const LayerGraph g = build_network(tiny_config(32));
  const LayerGraph big = g.reshaped(64, 64);
  ASSERT_EQ(g.params().size(), big.params().size());
  for (size_t i = 0; i < g.params().size(); ++i)
    EXPECT_EQ(g.params()[i].shape, big.params()[i].shape);
  EXPECT_EQ(big.node(big.output("logits")).shape, (Chw{2, 16, 16}));
}

}  // namespace
}  // namespace hrforge
