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

#include <cmath>
#include <vector>

#include "hrforge/error.hpp"
#include "hrforge/optim.hpp"
#include "hrforge/topology.hpp"

namespace hrforge {
namespace {

TEST(Schedule, PolyValues) {
  EXPECT_DOUBLE_EQ(poly_lr(0.01, 0, 100, 0.9), 0.01);
  EXPECT_DOUBLE_EQ(poly_lr(0.01, 100, 100, 0.9), 0.0);
  EXPECT_NEAR(poly_lr(0.01, 50, 100, 0.9), 0.01 * std::pow(0.5, 0.9), 1e-15);
  EXPECT_NEAR(poly_lr(1.0, 75, 100, 2.0), 0.0625, 1e-15);
  EXPECT_THROW(poly_lr(0.01, 101, 100, 0.9), ConfigError);
  EXPECT_THROW(poly_lr(0.01, 0, 0, 0.9), ConfigError);
}

TEST(Schedule, PolyIsMonotone) {
  double prev = poly_lr(0.1, 0, 1000, 0.9);
  for (int64_t i = 1; i <= 1000; ++i) {
    const double lr = poly_lr(0.1, i, 1000, 0.9);
    ASSERT_LE(lr, prev);
    prev = lr;
  }
}

TEST(Schedule, StepValues) {
  const std::vector<int64_t> m{30, 60, 90};
  EXPECT_DOUBLE_EQ(step_lr(0.1, 0, m, 0.1), 0.1);
  EXPECT_DOUBLE_EQ(step_lr(0.1, 29, m, 0.1), 0.1);
  EXPECT_NEAR(step_lr(0.1, 30, m, 0.1), 0.01, 1e-17);
  EXPECT_NEAR(step_lr(0.1, 75, m, 0.1), 0.001, 1e-17);
  EXPECT_NEAR(step_lr(0.1, 90, m, 0.1), 1e-4, 1e-18);
  const std::vector<int64_t> bad{30, 30};
  EXPECT_THROW(step_lr(0.1, 0, bad, 0.1), ConfigError);
}

TEST(Sgd, ZeroLearningRateIsIdentity) {
  std::vector<Tensor> p{Tensor(Shape{1, 1, 2, 2}, 1.5)};
  std::vector<Tensor> g{Tensor(Shape{1, 1, 2, 2}, 3.0)};
  OptimizerState<double> st;
  st.base_lr = 0;
  st.schedule.max_iter = 10;
  for (int i = 0; i < 5; ++i) sgd_step(p, g, {true}, st);
  for (double v : p[0].data()) EXPECT_EQ(v, 1.5);
  EXPECT_EQ(st.iter, 5);
}

TEST(Sgd, HandComputedMomentumSteps) {
  // Constant schedule via step with no milestones; p = 1, g = 2, wd = 0.5,
  // m = 0.9, lr = 0.1.
  std::vector<Tensor> p{Tensor(Shape{1, 1, 1, 1}, 1.0)};
  std::vector<Tensor> g{Tensor(Shape{1, 1, 1, 1}, 2.0)};
  OptimizerState<double> st;
  st.base_lr = 0.1;
  st.momentum = 0.9;
  st.weight_decay = 0.5;
  st.schedule.kind = ScheduleKind::kStep;
  sgd_step(p, g, {true}, st);
  // d = 2 + 0.5 = 2.5, v = 2.5, p = 1 - 0.25 = 0.75
  EXPECT_NEAR(p[0].data()[0], 0.75, 1e-15);
  sgd_step(p, g, {true}, st);
  // d = 2 + 0.375 = 2.375, v = 2.25 + 2.375 = 4.625, p = 0.75 - 0.4625
  EXPECT_NEAR(p[0].data()[0], 0.2875, 1e-15);
}

TEST(Sgd, NesterovHandComputed) {
  std::vector<Tensor> p{Tensor(Shape{1, 1, 1, 1}, 1.0)};
  std::vector<Tensor> g{Tensor(Shape{1, 1, 1, 1}, 1.0)};
  OptimizerState<double> st;
  st.base_lr = 0.1;
  st.momentum = 0.5;
  st.weight_decay = 0;
  st.nesterov = true;
  st.schedule.kind = ScheduleKind::kStep;
  sgd_step(p, g, {true}, st);
  // v = 1, step = 1 + 0.5 * 1 = 1.5
  EXPECT_NEAR(p[0].data()[0], 0.85, 1e-15);
  sgd_step(p, g, {true}, st);
  // v = 0.5 + 1 = 1.5, step = 1 + 0.75 = 1.75
  EXPECT_NEAR(p[0].data()[0], 0.675, 1e-15);
}

TEST(Sgd, WeightDecayRespectsMask) {
  std::vector<Tensor> p{Tensor(Shape{1, 1, 1, 1}, 2.0),
                        Tensor(Shape{1, 1, 1, 1}, 2.0)};
  std::vector<Tensor> g{Tensor(Shape{1, 1, 1, 1}, 0.0),
                        Tensor(Shape{1, 1, 1, 1}, 0.0)};
  OptimizerState<double> st;
  st.base_lr = 0.1;
  st.weight_decay = 0.1;
  st.schedule.kind = ScheduleKind::kStep;
  sgd_step(p, g, {true, false}, st);
  EXPECT_NEAR(p[0].data()[0], 2.0 - 0.1 * 0.2, 1e-15);
  EXPECT_EQ(p[1].data()[0], 2.0);
}

// f(x) = x^2 from x0 = 1, lr 0.1, momentum 0.9, against a scalar
// simulation of the same recurrence.
double bowl_oracle(int steps, bool nesterov) {
  double x = 1, v = 0;
  for (int i = 0; i < steps; ++i) {
    const double g = 2 * x;
    v = 0.9 * v + g;
    x -= 0.1 * (nesterov ? g + 0.9 * v : v);
  }
  return x;
}

double bowl_sgd(int steps, bool nesterov) {
  std::vector<Tensor> p{Tensor(Shape{1, 1, 1, 1}, 1.0)};
  std::vector<Tensor> g{Tensor(Shape{1, 1, 1, 1})};
  OptimizerState<double> st;
  st.base_lr = 0.1;
  st.momentum = 0.9;
  st.weight_decay = 0;
  st.nesterov = nesterov;
  st.schedule.kind = ScheduleKind::kStep;
  for (int it = 0; it < steps; ++it) {
    g[0].data()[0] = 2 * p[0].data()[0];
    sgd_step(p, g, {true}, st);
  }
  return p[0].data()[0];
}

TEST(Sgd, QuadraticBowlMatchesScalarSimulation) {
  for (bool nesterov : {false, true}) {
    for (int steps : {1, 10, 100, 200}) {
      EXPECT_EQ(bowl_sgd(steps, nesterov), bowl_oracle(steps, nesterov))
          << steps << (nesterov ? " nesterov" : "");
    }
  }
  // Heavy ball contracts by sqrt(0.9) per step: |x| is about 3e-3 after
  // 100 steps and below 1e-3 by 150; Nesterov is far faster.
  EXPECT_LT(std::abs(bowl_sgd(100, false)), 5e-3);
  EXPECT_LT(std::abs(bowl_sgd(150, false)), 1e-3);
  EXPECT_LT(std::abs(bowl_sgd(100, true)), 1e-3);
}

TEST(Sgd, NonFiniteGradientThrowsInVerifyMode) {
  std::vector<Tensor> p{Tensor(Shape{1, 1, 1, 1}, 1.0)};
  std::vector<Tensor> g{Tensor(Shape{1, 1, 1, 1}, std::nan(""))};
  OptimizerState<double> st;
  st.schedule.kind = ScheduleKind::kStep;
  EXPECT_THROW(sgd_step(p, g, {true}, st), NumericalError);
}

TEST(Sgd, DecayMaskCoversWeightsOnly) {
  const LayerGraph g = build_network(tiny_config(32));
  const std::vector<bool> mask = decay_mask(g);
  ASSERT_EQ(mask.size(), g.params().size());
  for (size_t i = 0; i < mask.size(); ++i) {
    const ParamRole r = g.params()[i].role;
    EXPECT_EQ(mask[i], r == ParamRole::kConvWeight || r == ParamRole::kLinearWeight);
  }
}

}  // namespace
}  // namespace hrforge
