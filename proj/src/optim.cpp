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

#include "hrforge/optim.hpp"

#include <cmath>

#include "hrforge/error.hpp"

namespace hrforge {

double poly_lr(double base, int64_t iter, int64_t max_iter, double power) {
  if (max_iter <= 0) throw ConfigError("poly_lr: max_iter must be positive");
  if (iter < 0 || iter > max_iter) {
    throw ConfigError("poly_lr: iteration " + std::to_string(iter) +
                      " outside [0, " + std::to_string(max_iter) + "]");
  }
  const double frac = static_cast<double>(iter) / static_cast<double>(max_iter);
  return base * std::pow(1.0 - frac, power);
}

double step_lr(double base, int64_t epoch, std::span<const int64_t> milestones,
               double factor) {
  double lr = base;
  for (size_t i = 0; i < milestones.size(); ++i) {
    if (i > 0 && milestones[i] <= milestones[i - 1]) {
      throw ConfigError("step_lr: milestones must be strictly increasing");
    }
    if (epoch >= milestones[i]) lr *= factor;
  }
  return lr;
}

double Schedule::lr(double base, int64_t iter) const {
  if (kind == ScheduleKind::kPoly) return poly_lr(base, iter, max_iter, power);
  return step_lr(base, iter, milestones, factor);
}

template <typename T>
void sgd_step(std::vector<BasicTensor<T>>& params,
              const std::vector<BasicTensor<T>>& grads,
              const std::vector<bool>& decays, OptimizerState<T>& state) {
  if (params.size() != grads.size() || params.size() != decays.size()) {
    throw ConfigError("sgd_step: params, grads and decay mask differ in size");
  }
  if (state.momentum_buffers.empty()) {
    state.momentum_buffers.resize(params.size());
    for (size_t i = 0; i < params.size(); ++i) {
      state.momentum_buffers[i].assign(params[i].numel(), T{0});
    }
  }
  if (state.momentum_buffers.size() != params.size()) {
    throw ConfigError("sgd_step: momentum buffer count mismatch");
  }
  const T lr = static_cast<T>(state.current_lr());
  const T m = static_cast<T>(state.momentum);
  for (size_t i = 0; i < params.size(); ++i) {
    if (grads[i].shape() != params[i].shape() ||
        static_cast<int64_t>(state.momentum_buffers[i].size()) !=
            params[i].numel()) {
      throw ConfigError("sgd_step: shape mismatch at parameter " +
                        std::to_string(i));
    }
    if constexpr (kVerifyMode<T>) {
      require_finite<T>(grads[i].data(),
                        "sgd_step gradient " + std::to_string(i));
    }
    const T wd = decays[i] ? static_cast<T>(state.weight_decay) : T{0};
    T* p = params[i].ptr();
    const T* g = grads[i].ptr();
    T* v = state.momentum_buffers[i].data();
    const int64_t n = params[i].numel();
    for (int64_t k = 0; k < n; ++k) {
      const T d = g[k] + wd * p[k];
      v[k] = m * v[k] + d;
      p[k] -= lr * (state.nesterov ? d + m * v[k] : v[k]);
    }
  }
  ++state.iter;
}

std::vector<bool> decay_mask(const LayerGraph& graph) {
  std::vector<bool> out;
  out.reserve(graph.params().size());
  for (const ParamSpec& p : graph.params()) out.push_back(p.decays());
  return out;
}

template void sgd_step<float>(std::vector<TensorF>&, const std::vector<TensorF>&,
                              const std::vector<bool>&, OptimizerState<float>&);
template void sgd_step<double>(std::vector<Tensor>&, const std::vector<Tensor>&,
                               const std::vector<bool>&,
                               OptimizerState<double>&);

}  // namespace hrforge
