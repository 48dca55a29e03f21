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

#include "hrforge/cost.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "hrforge/error.hpp"
#include "hrforge/topology.hpp"

namespace hrforge {

std::string to_string(FlopUnit u) {
  switch (u) {
    case FlopUnit::kDecimalMac: return "MAC/1e9";
    case FlopUnit::kBinaryMac: return "MAC/2^30";
    case FlopUnit::kDecimalFlop: return "2MAC/1e9";
  }
  return "?";
}

double gflops(int64_t macs, FlopUnit unit) {
  const double m = static_cast<double>(macs);
  switch (unit) {
    case FlopUnit::kDecimalMac: return m / 1e9;
    case FlopUnit::kBinaryMac: return m / 1073741824.0;
    case FlopUnit::kDecimalFlop: return 2 * m / 1e9;
  }
  return 0;
}

int64_t node_params(const LayerGraph& graph, const Node& node) {
  int64_t total = 0;
  for (int p : node.params) total += graph.params()[p].shape.numel();
  return total;
}

int64_t node_macs(const Node& node, const LayerGraph& graph) {
  switch (node.kind) {
    case OpKind::kConv: {
      const ConvSpec& s = node.conv;
      return static_cast<int64_t>(s.kernel_h) * s.kernel_w * s.in_channels *
             s.out_channels * node.shape.h * node.shape.w;
    }
    case OpKind::kLinear: {
      const Chw in = graph.node(node.inputs[0]).shape;
      return in.c * in.h * in.w * node.linear_out;
    }
    default:
      return 0;
  }
}

namespace {
bool counted(const Node& n, bool include_head) {
  return include_head || n.stage != "head";
}
}  // namespace

int64_t count_params(const LayerGraph& graph, bool include_head) {
  int64_t total = 0;
  for (const Node& n : graph.nodes()) {
    if (counted(n, include_head)) total += node_params(graph, n);
  }
  return total;
}

int64_t count_flops(const LayerGraph& graph, int64_t h, int64_t w,
                    bool include_head) {
  const LayerGraph g = graph.reshaped(h, w);
  int64_t total = 0;
  for (const Node& n : g.nodes()) {
    if (counted(n, include_head)) total += node_macs(n, g);
  }
  return total;
}

CostReport analyze(const LayerGraph& graph, int64_t h, int64_t w,
                   const CostOptions& options) {
  const LayerGraph g = graph.reshaped(h, w);
  CostReport r;
  r.input_h = h;
  r.input_w = w;
  r.include_head = options.include_head;
  r.unit = options.unit;
  for (const Node& n : g.nodes()) {
    if (!counted(n, options.include_head)) continue;
    if (n.kind != OpKind::kConv && n.kind != OpKind::kBatchNorm &&
        n.kind != OpKind::kLinear) {
      continue;
    }
    LayerCost c;
    c.node = n.id;
    c.layer = n.name;
    c.stage = n.stage;
    c.branch = n.branch;
    c.params = node_params(g, n);
    c.macs = node_macs(n, g);
    r.total_params += c.params;
    r.total_macs += c.macs;
    r.per_layer.push_back(std::move(c));
  }
  return r;
}

std::vector<std::pair<std::string, std::pair<int64_t, int64_t>>>
CostReport::by_stage() const {
  std::vector<std::pair<std::string, std::pair<int64_t, int64_t>>> out;
  for (const LayerCost& c : per_layer) {
    auto it = std::find_if(out.begin(), out.end(),
                           [&](const auto& e) { return e.first == c.stage; });
    if (it == out.end()) {
      out.push_back({c.stage, {0, 0}});
      it = std::prev(out.end());
    }
    it->second.first += c.params;
    it->second.second += c.macs;
  }
  return out;
}

namespace {
std::string branch_str(int b) { return b < 0 ? "-" : std::to_string(b); }
}  // namespace

std::string render_report(const CostReport& r, ReportFormat format) {
  std::ostringstream os;
  switch (format) {
    case ReportFormat::kTsv:
      os << "layer\tstage\tbranch\tparams\tmacs\n";
      for (const LayerCost& c : r.per_layer) {
        os << c.layer << '\t' << c.stage << '\t' << branch_str(c.branch)
           << '\t' << c.params << '\t' << c.macs << '\n';
      }
      os << "TOTAL\t-\t-\t" << r.total_params << '\t' << r.total_macs << '\n';
      break;
    case ReportFormat::kJson: {
      nlohmann::ordered_json j;
      j["input_size"] = {r.input_h, r.input_w};
      j["include_head"] = r.include_head;
      j["unit"] = to_string(r.unit);
      j["total_params"] = r.total_params;
      j["total_macs"] = r.total_macs;
      j["gflops"] = r.gflops();
      nlohmann::ordered_json stages = nlohmann::ordered_json::array();
      for (const auto& [stage, pm] : r.by_stage()) {
        stages.push_back({{"stage", stage},
                          {"params", pm.first},
                          {"macs", pm.second}});
      }
      j["stages"] = stages;
      nlohmann::ordered_json layers = nlohmann::ordered_json::array();
      for (const LayerCost& c : r.per_layer) {
        layers.push_back({{"layer", c.layer},
                          {"stage", c.stage},
                          {"branch", c.branch},
                          {"params", c.params},
                          {"macs", c.macs}});
      }
      j["layers"] = layers;
      os << j.dump(2) << '\n';
      break;
    }
    case ReportFormat::kTable: {
      os << "input " << r.input_h << "x" << r.input_w
         << (r.include_head ? " (with head)" : " (backbone only)") << '\n';
      os << std::left << std::setw(18) << "stage" << std::right
         << std::setw(14) << "params" << std::setw(18) << "MACs" << '\n';
      for (const auto& [stage, pm] : r.by_stage()) {
        os << std::left << std::setw(18) << stage << std::right
           << std::setw(14) << pm.first << std::setw(18) << pm.second << '\n';
      }
      os << std::left << std::setw(18) << "total" << std::right
         << std::setw(14) << r.total_params << std::setw(18) << r.total_macs
         << '\n';
      os << std::fixed << std::setprecision(2) << "params: " << r.mparams()
         << "M  GFLOPs: " << std::setprecision(3) << r.gflops() << " ("
         << to_string(r.unit) << ")\n";
      break;
    }
  }
  return os.str();
}

LayerGraph build_resnet50_reference(int64_t input_size) {
  GraphBuilder b;
  const int in = b.input("input", {3, input_size, input_size});
  b.set_labels("stem", -1);
  int x = 0;
  {
    ScopeGuard s(b, "stem");
    x = b.conv_bn(in, 64, 3, 2, "conv1", true);
    x = b.conv_bn(x, 64, 3, 2, "conv2", true);
  }
  static constexpr int kBlocks[4] = {3, 4, 6, 3};
  for (int l = 0; l < 4; ++l) {
    const std::string stage = "layer" + std::to_string(l + 1);
    b.set_labels(stage, -1);
    ScopeGuard s(b, stage);
    const int64_t planes = int64_t{64} << l;
    for (int u = 0; u < kBlocks[l]; ++u) {
      const int stride = (u == 0 && l > 0) ? 2 : 1;
      x = build_bottleneck(b, x, planes, 4 * planes, stride,
                           "unit" + std::to_string(u));
    }
  }
  b.set_labels("head", -1);
  ScopeGuard s(b, "head");
  x = b.global_avg_pool(x);
  b.mark_output("logits", b.linear(x, 1000, "fc"));
  return b.finish();
}

Calibration calibrate_flop_unit() {
  const LayerGraph g = build_resnet50_reference(224);
  Calibration c;
  c.resnet_params = count_params(g);
  c.resnet_macs = count_flops(g, 224, 224);
  const bool params_ok =
      std::abs(static_cast<double>(c.resnet_params) - kResNet50Params) <=
      0.02 * kResNet50Params;
  for (FlopUnit u : {FlopUnit::kDecimalMac, FlopUnit::kDecimalFlop,
                     FlopUnit::kBinaryMac}) {
    const double g_flops = gflops(c.resnet_macs, u);
    if (params_ok &&
        std::abs(g_flops - kResNet50Gflops) <= 0.05 * kResNet50Gflops) {
      c.unit = u;
      c.resnet_gflops = g_flops;
      c.matched = true;
      return c;
    }
  }
  c.unit = FlopUnit::kDecimalMac;
  c.resnet_gflops = gflops(c.resnet_macs, c.unit);
  return c;
}

}  // namespace hrforge
