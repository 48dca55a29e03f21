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

#ifndef HRFORGE_NETWORK_HPP_
#define HRFORGE_NETWORK_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hrforge/graph.hpp"
#include "hrforge/kernels.hpp"
#include "hrforge/tensor.hpp"

namespace hrforge {

// A LayerGraph with instantiated parameters, batch-norm running statistics,
// and the activation caches of the most recent forward pass.
template <typename T>
class Network {
 public:
  struct Buffer {
    std::string name;
    std::vector<T>* values;
  };

  explicit Network(LayerGraph graph, uint64_t seed = 0);

  const LayerGraph& graph() const { return graph_; }

  // Kaiming-normal conv/linear weights, unit gamma, zero beta and biases.
  // Each tensor draws from its own stream derived from (seed, index).
  void init_params(uint64_t seed);

  std::vector<BasicTensor<T>>& params() { return params_; }
  const std::vector<BasicTensor<T>>& params() const { return params_; }
  BasicTensor<T>& param(const std::string& name);
  std::vector<BasicTensor<T>>& grads() { return grads_; }
  const std::vector<BasicTensor<T>>& grads() const { return grads_; }
  void zero_grad();

  // Running mean/var of every batch-norm node, in node order.
  std::vector<Buffer> buffers();

  // Dynamic count: scalar elements across all parameter tensors.
  int64_t parameter_elements() const;

  void forward(const BasicTensor<T>& input, BnMode mode);
  void forward(std::span<const BasicTensor<T>> inputs, BnMode mode);

  const BasicTensor<T>& output(const std::string& name) const;
  const BasicTensor<T>& activation(int node) const;

  // Propagates d(loss)/d(output) for each named output and accumulates
  // parameter gradients into grads().
  void backward(
      const std::vector<std::pair<std::string, BasicTensor<T>>>& output_grads);

  // Gradient reaching graph input i in the last backward pass.
  const BasicTensor<T>& input_grad(size_t i = 0) const;

  // Sign of every ReLU input in the last forward pass. Two passes with equal
  // patterns lie on the same linear piece of every ReLU.
  std::vector<bool> relu_pattern() const;

  // Test hook: perturbs conv weight gradients so gradient checks must fail.
  void set_fault_injection(bool on) { fault_ = on; }

 private:
  void accumulate(int node, BasicTensor<T>&& g);

  LayerGraph graph_;
  std::vector<BasicTensor<T>> params_;
  std::vector<BasicTensor<T>> grads_;
  std::vector<std::vector<T>> running_mean_;
  std::vector<std::vector<T>> running_var_;
  std::vector<BasicTensor<T>> acts_;
  std::vector<BatchNormCache<T>> bn_cache_;
  std::vector<BasicTensor<T>> node_grads_;
  BnMode last_mode_ = BnMode::kTrain;
  int64_t batch_ = 0;
  bool fault_ = false;
};

extern template class Network<float>;
extern template class Network<double>;

}  // namespace hrforge

#endif  // HRFORGE_NETWORK_HPP_
