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

#include <string>

#include "hrforge/cost.hpp"
#include "hrforge/graph.hpp"
#include "hrforge/topology.hpp"

namespace hrforge {
namespace {

TEST(Cost, SingleConvHandCount) {
  // 3x3, 4 -> 6, stride 2 on 10x12: params 3*3*4*6 = 216, output 5x6,
  // MACs 216 * 30 = 6480.
  GraphBuilder b;
  const int x = b.input("x", {4, 10, 12});
  b.mark_output("y", b.conv(x, 6, 3, 2, "c"));
  const LayerGraph g = b.finish();
  EXPECT_EQ(count_params(g), 216);
  EXPECT_EQ(count_flops(g, 10, 12), 6480);
}

TEST(Cost, BiasBatchNormAndLinear) {
  GraphBuilder b;
  const int x = b.input("x", {2, 4, 4});
  ConvSpec spec = make_conv(2, 3, 1, 1, true);
  int y = b.conv(x, spec, "c");      // 6 + 3 params, 6 * 16 MACs
  y = b.batch_norm(y, "bn");         // 6 params, no MACs
  y = b.global_avg_pool(y);
  b.mark_output("z", b.linear(y, 5, "fc"));  // 15 + 5 params, 15 MACs
  const LayerGraph g = b.finish();
  EXPECT_EQ(count_params(g), 9 + 6 + 20);
  EXPECT_EQ(count_flops(g, 4, 4), 96 + 15);
}

TEST(Cost, FlopsScaleWithInputArea) {
  const LayerGraph g = build_network(tiny_config(64));
  const int64_t a = count_flops(g, 64, 64, false);
  const int64_t b = count_flops(g, 128, 128, false);
  EXPECT_EQ(b, 4 * a);
  EXPECT_EQ(count_params(g, true), count_params(g.reshaped(128, 128), true));
}

TEST(Cost, BackboneOnlyExcludesHead) {
  const LayerGraph g = build_network(tiny_config(64));
  EXPECT_LT(count_params(g, false), count_params(g, true));
  EXPECT_LT(count_flops(g, 64, 64, false), count_flops(g, 64, 64, true));
}

TEST(Cost, StageBreakdownSumsToTotal) {
  const LayerGraph g = build_network(tiny_config(64));
  const CostReport r = analyze(g, 64, 64);
  int64_t p = 0, m = 0;
  for (const auto& [stage, pm] : r.by_stage()) {
    p += pm.first;
    m += pm.second;
  }
  EXPECT_EQ(p, r.total_params);
  EXPECT_EQ(m, r.total_macs);
}

TEST(Cost, ResNet50Calibration) {
  const Calibration c = calibrate_flop_unit();
  EXPECT_TRUE(c.matched);
  EXPECT_NEAR(static_cast<double>(c.resnet_params), 25.6e6, 0.02 * 25.6e6);
  EXPECT_NEAR(c.resnet_gflops, 3.82, 0.05 * 3.82);
}

TEST(Cost, ResNet50KnownParameterCount) {
  // The standard ResNet-50 has 25,557,032 parameters. Two 3x3 stride-2
  // convs (3->64, 64->64) in place of one 7x7 3->64 add
  // 9*(3*64 + 64*64) - 49*3*64 = 29,184 weights and one more BN (128).
  const LayerGraph g = build_resnet50_reference();
  EXPECT_EQ(count_params(g), 25557032 + 29184 + 128);
}

TEST(Cost, GflopUnits) {
  EXPECT_DOUBLE_EQ(gflops(2'000'000'000, FlopUnit::kDecimalMac), 2.0);
  EXPECT_DOUBLE_EQ(gflops(1'000'000'000, FlopUnit::kDecimalFlop), 2.0);
  EXPECT_DOUBLE_EQ(gflops(int64_t{1} << 30, FlopUnit::kBinaryMac), 1.0);
}

TEST(Cost, RenderFormats) {
  const CostReport r = analyze(build_network(tiny_config(64)), 64, 64);
  const std::string json = render_report(r, ReportFormat::kJson);
  EXPECT_NE(json.find("\"total_params\""), std::string::npos);
  const std::string tsv = render_report(r, ReportFormat::kTsv);
  EXPECT_NE(tsv.find('\t'), std::string::npos);
}

}  // namespace
}  // namespace hrforge
