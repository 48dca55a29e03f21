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

#include "hrforge/network.hpp"

#include <cmath>
#include <random>

#include "hrforge/error.hpp"
#include "hrforge/rng.hpp"

namespace hrforge {

namespace {

constexpr double kClassifierInitStd = 0.001;

template <typename T>
std::span<const T> bias_of(const Node& n, const std::vector<BasicTensor<T>>& p,
                           bool has_bias) {
  if (!has_bias) return {};
  return p[n.params[1]].data();
}

}  // namespace

template <typename T>
Network<T>::Network(LayerGraph graph, uint64_t seed) : graph_(std::move(graph)) {
  graph_.validate();
  for (const ParamSpec& p : graph_.params()) {
    params_.emplace_back(p.shape);
    grads_.emplace_back(p.shape);
  }
  const size_t n = graph_.nodes().size();
  running_mean_.resize(n);
  running_var_.resize(n);
  for (const Node& node : graph_.nodes()) {
    if (node.kind == OpKind::kBatchNorm) {
      running_mean_[node.id].assign(static_cast<size_t>(node.shape.c), T{0});
      running_var_[node.id].assign(static_cast<size_t>(node.shape.c), T{1});
    }
  }
  acts_.resize(n);
  bn_cache_.resize(n);
  node_grads_.resize(n);
  init_params(seed);
}

template <typename T>
void Network<T>::init_params(uint64_t seed) {
  const auto& specs = graph_.params();
  for (size_t i = 0; i < specs.size(); ++i) {
    const ParamSpec& p = specs[i];
    BasicTensor<T>& t = params_[i];
    switch (p.role) {
      case ParamRole::kBnGamma:
        t.fill(T{1});
        break;
      case ParamRole::kBnBeta:
      case ParamRole::kConvBias:
      case ParamRole::kLinearBias:
        t.fill(T{0});
        break;
      case ParamRole::kConvWeight:
      case ParamRole::kLinearWeight: {
        const double fan_in =
            static_cast<double>(p.shape.c * p.shape.h * p.shape.w);
        // A biased conv has no BN after it, so it is an output classifier;
        // starting it near zero keeps the first regression steps small.
        const bool classifier = p.role == ParamRole::kConvWeight &&
                                graph_.node(p.node).conv.has_bias;
        std::mt19937_64 rng(mix_seed(seed, i));
        std::normal_distribution<double> dist(
            0.0, classifier ? kClassifierInitStd : std::sqrt(2.0 / fan_in));
        for (auto& v : t.data()) v = static_cast<T>(dist(rng));
        break;
      }
    }
  }
  for (const Node& node : graph_.nodes()) {
    if (node.kind == OpKind::kBatchNorm) {
      std::fill(running_mean_[node.id].begin(), running_mean_[node.id].end(),
                T{0});
      std::fill(running_var_[node.id].begin(), running_var_[node.id].end(),
                T{1});
    }
  }
}

template <typename T>
BasicTensor<T>& Network<T>::param(const std::string& name) {
  const auto& specs = graph_.params();
  for (size_t i = 0; i < specs.size(); ++i) {
    if (specs[i].name == name) return params_[i];
  }
  throw ConfigError("no parameter named '" + name + "'");
}

template <typename T>
void Network<T>::zero_grad() {
  for (auto& g : grads_) g.fill(T{0});
}

template <typename T>
std::vector<typename Network<T>::Buffer> Network<T>::buffers() {
  std::vector<Buffer> out;
  for (const Node& node : graph_.nodes()) {
    if (node.kind != OpKind::kBatchNorm) continue;
    out.push_back({node.name + ".running_mean", &running_mean_[node.id]});
    out.push_back({node.name + ".running_var", &running_var_[node.id]});
  }
  return out;
}

template <typename T>
std::vector<bool> Network<T>::relu_pattern() const {
  std::vector<bool> bits;
  for (const Node& n : graph_.nodes()) {
    if (n.kind != OpKind::kRelu) continue;
    for (T v : acts_[n.inputs[0]].data()) bits.push_back(v > T{0});
  }
  return bits;
}

template <typename T>
int64_t Network<T>::parameter_elements() const {
  int64_t total = 0;
  for (const auto& p : params_) total += p.numel();
  return total;
}

template <typename T>
void Network<T>::forward(const BasicTensor<T>& input, BnMode mode) {
  forward(std::span<const BasicTensor<T>>(&input, 1), mode);
}

template <typename T>
void Network<T>::forward(std::span<const BasicTensor<T>> inputs, BnMode mode) {
  const auto& in_ids = graph_.inputs();
  if (inputs.size() != in_ids.size()) {
    throw ConfigError("forward: graph expects " +
                      std::to_string(in_ids.size()) + " inputs, got " +
                      std::to_string(inputs.size()));
  }
  const int64_t batch = inputs.empty() ? 0 : inputs[0].shape().n;
  if (batch < 1) throw ConfigError("forward: batch size must be >= 1");
  for (size_t i = 0; i < inputs.size(); ++i) {
    const Chw want = graph_.node(in_ids[i]).shape;
    const Shape& got = inputs[i].shape();
    if (got.n != batch || got.c != want.c || got.h != want.h ||
        got.w != want.w) {
      throw ConfigError("forward: input " + std::to_string(i) + " has shape " +
                        got.str() + ", expected Nx" + std::to_string(want.c) +
                        "x" + std::to_string(want.h) + "x" +
                        std::to_string(want.w));
    }
    check_kernel_output(inputs[i], "network input");
  }
  batch_ = batch;
  last_mode_ = mode;

  size_t next_input = 0;
  for (const Node& n : graph_.nodes()) {
    BasicTensor<T>& out = acts_[n.id];
    switch (n.kind) {
      case OpKind::kInput:
        out = inputs[next_input++];
        break;
      case OpKind::kConv:
        out = conv2d(acts_[n.inputs[0]], n.conv, params_[n.params[0]],
                     bias_of(n, params_, n.conv.has_bias));
        break;
      case OpKind::kBatchNorm: {
        BatchNormState<T> st;
        const auto g = params_[n.params[0]].data();
        const auto b = params_[n.params[1]].data();
        st.gamma.assign(g.begin(), g.end());
        st.beta.assign(b.begin(), b.end());
        st.running_mean = std::move(running_mean_[n.id]);
        st.running_var = std::move(running_var_[n.id]);
        st.mode = mode;
        out = batch_norm(acts_[n.inputs[0]], st, &bn_cache_[n.id]);
        running_mean_[n.id] = std::move(st.running_mean);
        running_var_[n.id] = std::move(st.running_var);
        break;
      }
      case OpKind::kRelu:
        out = relu(acts_[n.inputs[0]]);
        break;
      case OpKind::kAdd: {
        std::vector<const BasicTensor<T>*> xs;
        for (int i : n.inputs) xs.push_back(&acts_[i]);
        out = add<T>(xs);
        break;
      }
      case OpKind::kUpsample:
        out = upsample(acts_[n.inputs[0]], n.factor, n.upsample_mode);
        break;
      case OpKind::kAvgPool:
        out = avg_pool(acts_[n.inputs[0]], n.pool_kernel, n.pool_kernel,
                       n.pool_stride, n.pool_stride);
        break;
      case OpKind::kGlobalAvgPool:
        out = global_avg_pool(acts_[n.inputs[0]]);
        break;
      case OpKind::kConcat: {
        std::vector<const BasicTensor<T>*> xs;
        for (int i : n.inputs) xs.push_back(&acts_[i]);
        out = concat_channels<T>(xs);
        break;
      }
      case OpKind::kLinear:
        out = linear(acts_[n.inputs[0]], params_[n.params[0]],
                     bias_of(n, params_, n.linear_bias));
        break;
    }
  }
}

template <typename T>
const BasicTensor<T>& Network<T>::output(const std::string& name) const {
  return acts_.at(static_cast<size_t>(graph_.output(name)));
}

template <typename T>
const BasicTensor<T>& Network<T>::activation(int node) const {
  return acts_.at(static_cast<size_t>(node));
}

template <typename T>
void Network<T>::accumulate(int node, BasicTensor<T>&& g) {
  BasicTensor<T>& dst = node_grads_[node];
  if (dst.empty()) {
    dst = std::move(g);
    return;
  }
  T* d = dst.ptr();
  const T* s = g.ptr();
  for (int64_t i = 0; i < dst.numel(); ++i) d[i] += s[i];
}

template <typename T>
void Network<T>::backward(
    const std::vector<std::pair<std::string, BasicTensor<T>>>& output_grads) {
  if (batch_ == 0) throw ConfigError("backward called before forward");
  for (auto& g : node_grads_) g = BasicTensor<T>();
  for (const auto& [name, g] : output_grads) {
    const int id = graph_.output(name);
    if (g.shape() != acts_[id].shape()) {
      throw ConfigError("backward: gradient for '" + name + "' has shape " +
                        g.shape().str() + ", expected " +
                        acts_[id].shape().str());
    }
    accumulate(id, BasicTensor<T>(g));
  }

  const auto& nodes = graph_.nodes();
  for (auto it = nodes.rbegin(); it != nodes.rend(); ++it) {
    const Node& n = *it;
    if (n.kind == OpKind::kInput) continue;
    if (node_grads_[n.id].empty()) continue;
    const BasicTensor<T>& go = node_grads_[n.id];
    switch (n.kind) {
      case OpKind::kInput:
        break;
      case OpKind::kConv: {
        const int src = n.inputs[0];
        ConvGrads<T> g =
            conv2d_backward(acts_[src], n.conv, params_[n.params[0]], go, true);
        BasicTensor<T>& gw = grads_[n.params[0]];
        const T scale = fault_ ? T(1.05) : T(1);
        for (int64_t i = 0; i < gw.numel(); ++i) {
          gw[i] += g.weights[i] * scale;
        }
        if (n.conv.has_bias) {
          BasicTensor<T>& gb = grads_[n.params[1]];
          for (int64_t i = 0; i < gb.numel(); ++i) gb[i] += g.bias[i];
        }
        accumulate(src, std::move(g.input));
        break;
      }
      case OpKind::kBatchNorm: {
        const int src = n.inputs[0];
        BatchNormState<T> st;
        const auto gm = params_[n.params[0]].data();
        st.gamma.assign(gm.begin(), gm.end());
        BatchNormGrads<T> g =
            batch_norm_backward(acts_[src], st, bn_cache_[n.id], go);
        BasicTensor<T>& gg = grads_[n.params[0]];
        BasicTensor<T>& gb = grads_[n.params[1]];
        for (int64_t i = 0; i < gg.numel(); ++i) {
          gg[i] += g.gamma[i];
          gb[i] += g.beta[i];
        }
        accumulate(src, std::move(g.input));
        break;
      }
      case OpKind::kRelu:
        accumulate(n.inputs[0], relu_backward(acts_[n.inputs[0]], go));
        break;
      case OpKind::kAdd:
        for (int src : n.inputs) accumulate(src, BasicTensor<T>(go));
        break;
      case OpKind::kUpsample:
        accumulate(n.inputs[0],
                   upsample_backward(go, acts_[n.inputs[0]].shape(), n.factor,
                                     n.upsample_mode));
        break;
      case OpKind::kAvgPool:
        accumulate(n.inputs[0],
                   avg_pool_backward(go, acts_[n.inputs[0]].shape(),
                                     n.pool_kernel, n.pool_kernel,
                                     n.pool_stride, n.pool_stride));
        break;
      case OpKind::kGlobalAvgPool:
        accumulate(n.inputs[0],
                   global_avg_pool_backward(go, acts_[n.inputs[0]].shape()));
        break;
      case OpKind::kConcat: {
        std::vector<int64_t> chans;
        for (int src : n.inputs) chans.push_back(acts_[src].shape().c);
        auto parts = split_channels<T>(go, chans);
        for (size_t i = 0; i < parts.size(); ++i) {
          accumulate(n.inputs[i], std::move(parts[i]));
        }
        break;
      }
      case OpKind::kLinear: {
        const int src = n.inputs[0];
        LinearGrads<T> g = linear_backward(acts_[src], params_[n.params[0]], go);
        BasicTensor<T>& gw = grads_[n.params[0]];
        for (int64_t i = 0; i < gw.numel(); ++i) gw[i] += g.weights[i];
        if (n.linear_bias) {
          BasicTensor<T>& gb = grads_[n.params[1]];
          for (int64_t i = 0; i < gb.numel(); ++i) gb[i] += g.bias[i];
        }
        accumulate(src, std::move(g.input));
        break;
      }
    }
  }
}

template <typename T>
const BasicTensor<T>& Network<T>::input_grad(size_t i) const {
  return node_grads_.at(static_cast<size_t>(graph_.inputs().at(i)));
}

template class Network<float>;
template class Network<double>;

}  // namespace hrforge
