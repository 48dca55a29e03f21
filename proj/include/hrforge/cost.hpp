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

#ifndef HRFORGE_COST_HPP_
#define HRFORGE_COST_HPP_

// Static parameter and multiply-accumulate counting over a LayerGraph.
//
// Conv MACs are kh*kw*Cin*Cout*Hout*Wout, linear MACs d*d_out per sample.
// Batch norm, activations, pooling and interpolation count as zero. Reported
// GFLOPs are MACs divided by a unit constant chosen by calibrate_flop_unit().

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "hrforge/graph.hpp"

namespace hrforge {

enum class FlopUnit {
  kDecimalMac,   // MACs / 1e9
  kBinaryMac,    // MACs / 2^30
  kDecimalFlop,  // 2 * MACs / 1e9
};

std::string to_string(FlopUnit u);
double gflops(int64_t macs, FlopUnit unit);

struct LayerCost {
  int node = -1;
  std::string layer;
  std::string stage;
  int branch = -1;
  int64_t params = 0;
  int64_t macs = 0;
};

struct CostReport {
  std::vector<LayerCost> per_layer;
  int64_t total_params = 0;
  int64_t total_macs = 0;
  int64_t input_h = 0;
  int64_t input_w = 0;
  bool include_head = true;
  FlopUnit unit = FlopUnit::kBinaryMac;

  double gflops() const { return hrforge::gflops(total_macs, unit); }
  double mparams() const { return static_cast<double>(total_params) / 1e6; }
  // (stage, params, macs) in first-appearance order.
  std::vector<std::pair<std::string, std::pair<int64_t, int64_t>>> by_stage()
      const;
};

struct CostOptions {
  bool include_head = true;
  FlopUnit unit = FlopUnit::kBinaryMac;
};

int64_t node_params(const LayerGraph& graph, const Node& node);
int64_t node_macs(const Node& node, const LayerGraph& graph);

int64_t count_params(const LayerGraph& graph, bool include_head = true);
// MACs at the given input size (shapes are re-derived statically).
int64_t count_flops(const LayerGraph& graph, int64_t h, int64_t w,
                    bool include_head = true);

CostReport analyze(const LayerGraph& graph, int64_t h, int64_t w,
                   const CostOptions& options = {});

enum class ReportFormat { kTsv, kJson, kTable };
std::string render_report(const CostReport& report, ReportFormat format);

// ResNet-50 with the stem replaced by two stride-2 3x3 convs and the stride
// of each downsampling bottleneck on its 3x3 conv, plus a 1000-way
// classifier.
LayerGraph build_resnet50_reference(int64_t input_size = 224);

struct Calibration {
  FlopUnit unit = FlopUnit::kDecimalMac;
  int64_t resnet_macs = 0;
  int64_t resnet_params = 0;
  double resnet_gflops = 0;
  bool matched = false;
};

inline constexpr double kResNet50Params = 25.6e6;
inline constexpr double kResNet50Gflops = 3.82;

// Evaluates the reference ResNet-50 and picks the first unit (decimal MACs,
// then 2*MACs, then binary MACs) whose GFLOPs land within 5% of 3.82 while
// params land within 2% of 25.6M.
Calibration calibrate_flop_unit();

}  // namespace hrforge

#endif  // HRFORGE_COST_HPP_
