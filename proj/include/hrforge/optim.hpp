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

#ifndef HRFORGE_OPTIM_HPP_
#define HRFORGE_OPTIM_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hrforge/graph.hpp"
#include "hrforge/tensor.hpp"

namespace hrforge {

// base * (1 - iter/max_iter)^power. Throws ConfigError if iter > max_iter.
double poly_lr(double base, int64_t iter, int64_t max_iter, double power);

// base * factor^(milestones passed). Milestones must be strictly increasing.
double step_lr(double base, int64_t epoch, std::span<const int64_t> milestones,
               double factor);

enum class ScheduleKind { kPoly, kStep };

struct Schedule {
  ScheduleKind kind = ScheduleKind::kPoly;
  double power = 0.9;
  int64_t max_iter = 1;
  std::vector<int64_t> milestones;
  double factor = 0.1;

  double lr(double base, int64_t iter) const;
};

template <typename T>
struct OptimizerState {
  std::vector<std::vector<T>> momentum_buffers;
  double base_lr = 0.01;
  double momentum = 0.9;
  double weight_decay = 0.0005;
  bool nesterov = false;
  Schedule schedule;
  int64_t iter = 0;

  double current_lr() const { return schedule.lr(base_lr, iter); }
};

// Classical momentum:
//   v <- m*v + g + wd*p   (wd only where decays[i])
//   p <- p - lr*v
// Nesterov uses p <- p - lr*(g + wd*p + m*v) with the updated v.
// Momentum buffers are created on first use. Advances state.iter.
template <typename T>
void sgd_step(std::vector<BasicTensor<T>>& params,
              const std::vector<BasicTensor<T>>& grads,
              const std::vector<bool>& decays, OptimizerState<T>& state);

// Which parameters of a graph take weight decay (conv and linear weights).
std::vector<bool> decay_mask(const LayerGraph& graph);

}  // namespace hrforge

#endif  // HRFORGE_OPTIM_HPP_
