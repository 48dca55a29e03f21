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

#include "hrforge/graph.hpp"

#include <set>
#include <sstream>

#include "hrforge/error.hpp"

namespace hrforge {

std::string to_string(OpKind k) {
  switch (k) {
    case OpKind::kInput: return "input";
    case OpKind::kConv: return "conv";
    case OpKind::kBatchNorm: return "batch_norm";
    case OpKind::kRelu: return "relu";
    case OpKind::kAdd: return "add";
    case OpKind::kUpsample: return "upsample";
    case OpKind::kAvgPool: return "avg_pool";
    case OpKind::kGlobalAvgPool: return "global_avg_pool";
    case OpKind::kConcat: return "concat";
    case OpKind::kLinear: return "linear";
  }
  return "?";
}

std::string Chw::str() const {
  std::ostringstream os;
  os << "(" << c << "," << h << "," << w << ")";
  return os.str();
}

namespace {
void require(bool ok, const std::string& msg) {
  if (!ok) throw ConfigError(msg);
}
}  // namespace

Chw infer_shape(const Node& node, const std::vector<Chw>& in) {
  const std::string where = to_string(node.kind) + " '" + node.name + "'";
  auto arity = [&](size_t n) {
    require(in.size() == n, where + ": expected " + std::to_string(n) +
                                " inputs, got " + std::to_string(in.size()));
  };
  switch (node.kind) {
    case OpKind::kInput:
      arity(0);
      return node.shape;
    case OpKind::kConv: {
      arity(1);
      require(in[0].c == node.conv.in_channels,
              where + ": input has " + std::to_string(in[0].c) +
                  " channels, expected " +
                  std::to_string(node.conv.in_channels));
      Chw out{node.conv.out_channels, 0, 0};
      try {
        out.h = node.conv.out_h(in[0].h);
        out.w = node.conv.out_w(in[0].w);
      } catch (const ConfigError& e) {
        throw ConfigError(where + ": " + e.what());
      }
      return out;
    }
    case OpKind::kBatchNorm:
    case OpKind::kRelu:
      arity(1);
      return in[0];
    case OpKind::kAdd:
      require(!in.empty(), where + ": no inputs");
      for (const Chw& s : in) {
        require(s == in[0], where + ": operand shapes differ " + s.str() +
                                " vs " + in[0].str());
      }
      return in[0];
    case OpKind::kUpsample:
      arity(1);
      require(node.factor >= 2 && (node.factor & (node.factor - 1)) == 0,
              where + ": factor must be a power of two >= 2");
      return {in[0].c, in[0].h * node.factor, in[0].w * node.factor};
    case OpKind::kAvgPool: {
      arity(1);
      require(node.pool_kernel <= in[0].h && node.pool_kernel <= in[0].w,
              where + ": pooling kernel larger than input " + in[0].str());
      const int64_t h = (in[0].h - node.pool_kernel) / node.pool_stride + 1;
      const int64_t w = (in[0].w - node.pool_kernel) / node.pool_stride + 1;
      return {in[0].c, h, w};
    }
    case OpKind::kGlobalAvgPool:
      arity(1);
      require(in[0].h * in[0].w >= 1, where + ": empty spatial extent");
      return {in[0].c, 1, 1};
    case OpKind::kConcat: {
      require(!in.empty(), where + ": no inputs");
      Chw out{0, in[0].h, in[0].w};
      for (const Chw& s : in) {
        require(s.h == out.h && s.w == out.w,
                where + ": spatial mismatch " + s.str() + " vs " +
                    in[0].str());
        out.c += s.c;
      }
      return out;
    }
    case OpKind::kLinear:
      arity(1);
      return {node.linear_out, 1, 1};
  }
  throw ConfigError(where + ": unknown op");
}

int LayerGraph::output(const std::string& name) const {
  for (const auto& [n, id] : outputs_) {
    if (n == name) return id;
  }
  throw ConfigError("graph has no output named '" + name + "'");
}

bool LayerGraph::has_output(const std::string& name) const {
  for (const auto& o : outputs_) {
    if (o.first == name) return true;
  }
  return false;
}

LayerGraph LayerGraph::reshaped(int64_t h, int64_t w) const {
  require(h > 0 && w > 0, "input size must be positive, got " +
                              std::to_string(h) + "x" + std::to_string(w));
  LayerGraph g = *this;
  for (Node& n : g.nodes_) {
    if (n.kind == OpKind::kInput) {
      n.shape.h = h;
      n.shape.w = w;
      continue;
    }
    std::vector<Chw> in;
    in.reserve(n.inputs.size());
    for (int i : n.inputs) in.push_back(g.nodes_[i].shape);
    n.shape = infer_shape(n, in);
  }
  return g;
}

void LayerGraph::validate() const {
  std::vector<int> owner(params_.size(), -1);
  for (size_t i = 0; i < nodes_.size(); ++i) {
    const Node& n = nodes_[i];
    require(n.id == static_cast<int>(i), "node id out of order");
    for (int in : n.inputs) {
      require(in >= 0 && in < n.id,
              "node '" + n.name + "' reads a later or invalid node");
    }
    for (int p : n.params) {
      require(p >= 0 && p < static_cast<int>(params_.size()),
              "node '" + n.name + "' references an invalid parameter");
      require(owner[p] == -1, "parameter '" + params_[p].name +
                                  "' appears in more than one node");
      owner[p] = n.id;
    }
  }
  std::set<std::string> names;
  for (size_t p = 0; p < params_.size(); ++p) {
    require(owner[p] == params_[p].node,
            "parameter '" + params_[p].name + "' has inconsistent owner");
    require(names.insert(params_[p].name).second,
            "duplicate parameter name '" + params_[p].name + "'");
  }
}

int GraphBuilder::append(Node n) {
  n.id = static_cast<int>(g_.nodes_.size());
  n.stage = stage_;
  n.branch = branch_;
  std::vector<Chw> in;
  for (int i : n.inputs) {
    require(i >= 0 && i < n.id, "builder: invalid input node id");
    in.push_back(g_.nodes_[i].shape);
  }
  n.shape = infer_shape(n, in);
  g_.nodes_.push_back(std::move(n));
  return g_.nodes_.back().id;
}

std::string GraphBuilder::scoped(const std::string& local) const {
  std::string s;
  for (const std::string& p : scope_) {
    s += p;
    s += '.';
  }
  return s + local;
}

int GraphBuilder::add_param(int node, const std::string& suffix, Shape shape,
                            ParamRole role) {
  ParamSpec p;
  p.name = g_.nodes_[node].name + "." + suffix;
  p.shape = shape;
  p.role = role;
  p.node = node;
  g_.params_.push_back(std::move(p));
  const int id = static_cast<int>(g_.params_.size()) - 1;
  g_.nodes_[node].params.push_back(id);
  return id;
}

int GraphBuilder::input(const std::string& name, Chw shape) {
  require(shape.c > 0 && shape.h > 0 && shape.w > 0,
          "input '" + name + "' must have positive extents");
  Node n;
  n.kind = OpKind::kInput;
  n.name = name;
  n.shape = shape;
  const int id = append(std::move(n));
  g_.inputs_.push_back(id);
  return id;
}

int GraphBuilder::conv(int x, int64_t out_channels, int kernel, int stride,
                       const std::string& name, bool bias) {
  return conv(x, make_conv(shape(x).c, out_channels, kernel, stride, bias),
              name);
}

int GraphBuilder::conv(int x, const ConvSpec& spec, const std::string& name) {
  spec.validate();
  Node n;
  n.kind = OpKind::kConv;
  n.name = scoped(name);
  n.inputs = {x};
  n.conv = spec;
  const int id = append(std::move(n));
  add_param(id, "weight", spec.weight_shape(), ParamRole::kConvWeight);
  if (spec.has_bias) {
    add_param(id, "bias", {spec.out_channels, 1, 1, 1}, ParamRole::kConvBias);
  }
  return id;
}

int GraphBuilder::batch_norm(int x, const std::string& name) {
  Node n;
  n.kind = OpKind::kBatchNorm;
  n.name = scoped(name);
  n.inputs = {x};
  const int id = append(std::move(n));
  const int64_t c = shape(id).c;
  add_param(id, "gamma", {c, 1, 1, 1}, ParamRole::kBnGamma);
  add_param(id, "beta", {c, 1, 1, 1}, ParamRole::kBnBeta);
  return id;
}

int GraphBuilder::relu(int x) {
  Node n;
  n.kind = OpKind::kRelu;
  n.name = scoped("relu" + std::to_string(relu_counter_++));
  n.inputs = {x};
  return append(std::move(n));
}

int GraphBuilder::add(const std::vector<int>& xs) {
  if (xs.size() == 1) return xs[0];
  Node n;
  n.kind = OpKind::kAdd;
  n.name = scoped("add" + std::to_string(misc_counter_++));
  n.inputs = xs;
  return append(std::move(n));
}

int GraphBuilder::upsample(int x, int factor, UpsampleMode mode) {
  Node n;
  n.kind = OpKind::kUpsample;
  n.name = scoped("up" + std::to_string(misc_counter_++));
  n.inputs = {x};
  n.factor = factor;
  n.upsample_mode = mode;
  return append(std::move(n));
}

int GraphBuilder::avg_pool(int x, int kernel, int stride) {
  require(kernel > 0 && stride > 0, "avg_pool: kernel/stride must be > 0");
  Node n;
  n.kind = OpKind::kAvgPool;
  n.name = scoped("pool" + std::to_string(misc_counter_++));
  n.inputs = {x};
  n.pool_kernel = kernel;
  n.pool_stride = stride;
  return append(std::move(n));
}

int GraphBuilder::global_avg_pool(int x) {
  Node n;
  n.kind = OpKind::kGlobalAvgPool;
  n.name = scoped("gap" + std::to_string(misc_counter_++));
  n.inputs = {x};
  return append(std::move(n));
}

int GraphBuilder::concat(const std::vector<int>& xs) {
  Node n;
  n.kind = OpKind::kConcat;
  n.name = scoped("concat" + std::to_string(misc_counter_++));
  n.inputs = xs;
  return append(std::move(n));
}

int GraphBuilder::linear(int x, int64_t out, const std::string& name,
                         bool bias) {
  require(out > 0, "linear: output size must be positive");
  Node n;
  n.kind = OpKind::kLinear;
  n.name = scoped(name);
  n.inputs = {x};
  n.linear_out = out;
  n.linear_bias = bias;
  const Chw in = shape(x);
  const int id = append(std::move(n));
  add_param(id, "weight", {out, in.c * in.h * in.w, 1, 1},
            ParamRole::kLinearWeight);
  if (bias) add_param(id, "bias", {out, 1, 1, 1}, ParamRole::kLinearBias);
  return id;
}

int GraphBuilder::conv_bn(int x, int64_t out_channels, int kernel, int stride,
                          const std::string& name, bool with_relu) {
  int y = conv(x, out_channels, kernel, stride, name);
  y = batch_norm(y, name + "_bn");
  return with_relu ? relu(y) : y;
}

void GraphBuilder::mark_output(const std::string& name, int node) {
  require(!g_.has_output(name), "duplicate output name '" + name + "'");
  g_.outputs_.emplace_back(name, node);
}

void GraphBuilder::push_scope(const std::string& s) { scope_.push_back(s); }

void GraphBuilder::pop_scope() {
  if (!scope_.empty()) scope_.pop_back();
}

void GraphBuilder::set_labels(const std::string& stage, int branch) {
  stage_ = stage;
  branch_ = branch;
}

const Chw& GraphBuilder::shape(int node) const {
  return g_.nodes_.at(static_cast<size_t>(node)).shape;
}

LayerGraph GraphBuilder::finish() {
  g_.validate();
  return std::move(g_);
}

}  // namespace hrforge
