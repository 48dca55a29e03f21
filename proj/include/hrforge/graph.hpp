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

#ifndef HRFORGE_GRAPH_HPP_
#define HRFORGE_GRAPH_HPP_

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "hrforge/kernels.hpp"

namespace hrforge {

enum class OpKind {
  kInput,
  kConv,
  kBatchNorm,
  kRelu,
  kAdd,
  kUpsample,
  kAvgPool,
  kGlobalAvgPool,
  kConcat,
  kLinear,
};

std::string to_string(OpKind k);

// Per-sample activation extents.
struct Chw {
  int64_t c = 0;
  int64_t h = 0;
  int64_t w = 0;
  bool operator==(const Chw&) const = default;
  std::string str() const;
};

enum class ParamRole { kConvWeight, kConvBias, kBnGamma, kBnBeta,
                       kLinearWeight, kLinearBias };

struct ParamSpec {
  std::string name;
  Shape shape;
  ParamRole role = ParamRole::kConvWeight;
  int node = -1;

  // Weight decay applies to conv and linear weights only.
  bool decays() const {
    return role == ParamRole::kConvWeight || role == ParamRole::kLinearWeight;
  }
};

struct Node {
  int id = -1;
  OpKind kind = OpKind::kInput;
  std::string name;
  std::vector<int> inputs;
  Chw shape;
  // Grouping labels for cost reports.
  std::string stage;
  int branch = -1;

  ConvSpec conv;                 // kConv
  int factor = 0;                // kUpsample
  UpsampleMode upsample_mode = UpsampleMode::kNearest;
  int pool_kernel = 0;           // kAvgPool
  int pool_stride = 0;
  int64_t linear_out = 0;        // kLinear
  bool linear_bias = true;
  std::vector<int> params;       // indices into LayerGraph::params()
};

// Immutable DAG of layers in topological order (node i only reads nodes < i).
class LayerGraph {
 public:
  const std::vector<Node>& nodes() const { return nodes_; }
  const Node& node(int id) const { return nodes_.at(static_cast<size_t>(id)); }
  const std::vector<ParamSpec>& params() const { return params_; }
  const std::vector<std::pair<std::string, int>>& outputs() const {
    return outputs_;
  }
  // Node id of a named output; throws ConfigError if absent.
  int output(const std::string& name) const;
  bool has_output(const std::string& name) const;
  const std::vector<int>& inputs() const { return inputs_; }
  Chw input_shape(size_t i = 0) const { return node(inputs_.at(i)).shape; }

  // Re-derives every node shape for a new spatial input size. Throws
  // ConfigError when a layer cannot be evaluated at that size.
  LayerGraph reshaped(int64_t h, int64_t w) const;

  // Checks topological order, input arity, and parameter ownership.
  void validate() const;

 private:
  friend class GraphBuilder;
  std::vector<Node> nodes_;
  std::vector<ParamSpec> params_;
  std::vector<std::pair<std::string, int>> outputs_;
  std::vector<int> inputs_;
};

// Output shape of `node` given the shapes of its inputs.
Chw infer_shape(const Node& node, const std::vector<Chw>& input_shapes);

// Appends nodes to a graph under a hierarchical name scope.
class GraphBuilder {
 public:
  int input(const std::string& name, Chw shape);

  int conv(int x, int64_t out_channels, int kernel, int stride,
           const std::string& name, bool bias = false);
  int conv(int x, const ConvSpec& spec, const std::string& name);
  int batch_norm(int x, const std::string& name);
  int relu(int x);
  int add(const std::vector<int>& xs);
  int upsample(int x, int factor, UpsampleMode mode);
  int avg_pool(int x, int kernel, int stride);
  int global_avg_pool(int x);
  int concat(const std::vector<int>& xs);
  int linear(int x, int64_t out, const std::string& name, bool bias = true);

  // conv (no bias) -> BN -> optional ReLU.
  int conv_bn(int x, int64_t out_channels, int kernel, int stride,
              const std::string& name, bool with_relu);

  void mark_output(const std::string& name, int node);

  // Scoped name prefix, e.g. "stage3.block1.branch2".
  void push_scope(const std::string& s);
  void pop_scope();
  void set_labels(const std::string& stage, int branch);
  void set_branch(int branch) { branch_ = branch; }
  const std::string& stage_label() const { return stage_; }
  int branch_label() const { return branch_; }

  const Chw& shape(int node) const;
  int64_t channels(int node) const { return shape(node).c; }
  const LayerGraph& graph() const { return g_; }
  LayerGraph finish();

 private:
  int append(Node n);
  std::string scoped(const std::string& local) const;
  int add_param(int node, const std::string& suffix, Shape shape,
                ParamRole role);

  LayerGraph g_;
  std::vector<std::string> scope_;
  std::string stage_;
  int branch_ = -1;
  int relu_counter_ = 0;
  int misc_counter_ = 0;
};

class ScopeGuard {
 public:
  ScopeGuard(GraphBuilder& b, const std::string& s) : b_(b) {
    b_.push_scope(s);
  }
  ~ScopeGuard() { b_.pop_scope(); }
  ScopeGuard(const ScopeGuard&) = delete;
  ScopeGuard& operator=(const ScopeGuard&) = delete;

 private:
  GraphBuilder& b_;
};

}  // namespace hrforge

#endif  // HRFORGE_GRAPH_HPP_
