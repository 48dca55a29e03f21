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

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "hrforge/error.hpp"
#include "hrforge/gradcheck.hpp"
#include "hrforge/kernels.hpp"

namespace hrforge {
namespace {

Tensor random_tensor(Shape s, uint64_t seed, double lo = -1, double hi = 1) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> d(lo, hi);
  Tensor t(s);
  for (double& v : t.data()) v = d(rng);
  return t;
}

// Direct six-loop convolution.
Tensor conv_reference(const Tensor& x, const ConvSpec& s, const Tensor& w,
                      const std::vector<double>& bias) {
  const int64_t oh = (x.shape().h + 2 * s.pad_h - s.kernel_h) / s.stride_h + 1;
  const int64_t ow = (x.shape().w + 2 * s.pad_w - s.kernel_w) / s.stride_w + 1;
  Tensor y(Shape{x.shape().n, s.out_channels, oh, ow});
  for (int64_t n = 0; n < x.shape().n; ++n)
    for (int64_t o = 0; o < s.out_channels; ++o)
      for (int64_t i = 0; i < oh; ++i)
        for (int64_t j = 0; j < ow; ++j) {
          double acc = bias.empty() ? 0.0 : bias[o];
          for (int64_t c = 0; c < s.in_channels; ++c)
            for (int64_t ki = 0; ki < s.kernel_h; ++ki)
              for (int64_t kj = 0; kj < s.kernel_w; ++kj) {
                const int64_t yy = i * s.stride_h - s.pad_h + ki;
                const int64_t xx = j * s.stride_w - s.pad_w + kj;
                if (yy < 0 || xx < 0 || yy >= x.shape().h ||
                    xx >= x.shape().w) {
                  continue;
                }
                acc += x.at(n, c, yy, xx) * w.at(o, c, ki, kj);
              }
          y.at(n, o, i, j) = acc;
        }
  return y;
}

TEST(Conv2d, OnesKernelCentreAndCorner) {
  Tensor x(Shape{1, 1, 3, 3}, 1.0);
  Tensor w(Shape{1, 1, 3, 3}, 1.0);
  const Tensor y = conv2d<double>(x, make_conv(1, 1, 3), w, {});
  EXPECT_EQ(y.at(0, 0, 1, 1), 9.0);
  EXPECT_EQ(y.at(0, 0, 0, 0), 4.0);
}

TEST(Conv2d, IdentityKernel) {
  const Tensor x = random_tensor({2, 1, 5, 4}, 1);
  Tensor w(Shape{1, 1, 1, 1}, 1.0);
  EXPECT_EQ(conv2d<double>(x, make_conv(1, 1, 1), w, {}), x);
}

TEST(Conv2d, StrideTwoOutputSize) {
  Tensor x(Shape{1, 1, 4, 4}, 1.0);
  Tensor w(Shape{1, 1, 3, 3}, 1.0);
  const Tensor y = conv2d<double>(x, make_conv(1, 1, 3, 2), w, {});
  EXPECT_EQ(y.shape(), (Shape{1, 1, 2, 2}));
}

TEST(Conv2d, MatchesSixLoopReferenceExactly) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 40; ++trial) {
    ConvSpec s;
    s.in_channels = 1 + rng() % 8;
    s.out_channels = 1 + rng() % 8;
    s.kernel_h = 1 + rng() % 3;
    s.kernel_w = 1 + rng() % 3;
    s.stride_h = 1 + rng() % 2;
    s.stride_w = 1 + rng() % 2;
    s.pad_h = rng() % 2;
    s.pad_w = rng() % 2;
    s.has_bias = rng() % 2;
    const Shape xs{1 + static_cast<int64_t>(rng() % 2), s.in_channels,
                   3 + static_cast<int64_t>(rng() % 7),
                   3 + static_cast<int64_t>(rng() % 7)};
    const Tensor x = random_tensor(xs, trial);
    const Tensor w = random_tensor(s.weight_shape(), 100 + trial);
    std::vector<double> b;
    if (s.has_bias) b = random_tensor({1, s.out_channels, 1, 1}, 200).storage();
    EXPECT_EQ(conv2d<double>(x, s, w, b), conv_reference(x, s, w, b))
        << "trial " << trial;
  }
}

TEST(Conv2d, Errors) {
  Tensor x(Shape{1, 2, 4, 4});
  Tensor w(Shape{1, 3, 3, 3});
  EXPECT_THROW(conv2d<double>(x, make_conv(3, 1, 3), w, {}), ConfigError);
  ConvSpec big = make_conv(2, 1, 7);
  big.pad_h = big.pad_w = 0;
  EXPECT_THROW(conv2d<double>(x, big, Tensor(big.weight_shape()), {}),
               ConfigError);
}

// Finite-difference check of a kernel: loss = <f(x), r> for random r.
template <typename F>
GradCheckReport check_kernel(F forward, std::vector<Tensor*> inputs,
                             std::vector<std::vector<double>> grads,
                             double tol = 1e-4) {
  std::vector<GradCheckTarget> targets;
  for (size_t i = 0; i < inputs.size(); ++i) {
    targets.push_back({"in" + std::to_string(i), inputs[i]->data(), grads[i]});
  }
  GradCheckOptions o;
  o.tolerance = tol;
  return grad_check(forward, targets, o);
}

double dot(const Tensor& a, const Tensor& b) {
  double s = 0;
  for (int64_t i = 0; i < a.numel(); ++i) s += a[i] * b[i];
  return s;
}

TEST(KernelGradients, Conv2d) {
  Tensor x = random_tensor({2, 3, 5, 5}, 1);
  const ConvSpec s = make_conv(3, 4, 3, 2, true);
  Tensor w = random_tensor(s.weight_shape(), 2);
  Tensor b = random_tensor({1, 4, 1, 1}, 3);
  const Tensor y0 = conv2d<double>(x, s, w, b.data());
  const Tensor r = random_tensor(y0.shape(), 4);
  const ConvGrads<double> g = conv2d_backward(x, s, w, r);
  auto f = [&] { return dot(conv2d<double>(x, s, w, b.data()), r); };
  const auto rep =
      check_kernel(f, {&x, &w, &b}, {g.input.storage(), g.weights.storage(), g.bias});
  EXPECT_TRUE(rep.passed) << rep.max_rel_error;
  EXPECT_EQ(rep.skipped, 0);
}

TEST(KernelGradients, BatchNormTrainAndEval) {
  for (BnMode mode : {BnMode::kTrain, BnMode::kEval}) {
    Tensor x = random_tensor({3, 2, 4, 3}, 5);
    auto st = BatchNormState<double>::identity(2);
    st.mode = mode;
    Tensor gamma(Shape{1, 2, 1, 1}, std::vector<double>{1.3, 0.7});
    Tensor beta(Shape{1, 2, 1, 1}, std::vector<double>{0.2, -0.4});
    st.running_mean = {0.1, -0.2};
    st.running_var = {0.9, 1.4};
    auto run = [&](BatchNormCache<double>* cache) {
      auto s = st;
      s.gamma = gamma.storage();
      s.beta = beta.storage();
      return batch_norm(x, s, cache);
    };
    BatchNormCache<double> cache;
    const Tensor y = run(&cache);
    const Tensor r = random_tensor(y.shape(), 6);
    auto s = st;
    s.gamma = gamma.storage();
    s.beta = beta.storage();
    const auto g = batch_norm_backward(x, s, cache, r);
    const auto rep = check_kernel([&] { return dot(run(nullptr), r); },
                                  {&x, &gamma, &beta},
                                  {g.input.storage(), g.gamma, g.beta});
    EXPECT_TRUE(rep.passed) << rep.max_rel_error;
  }
}

TEST(KernelGradients, ReluAwayFromKink) {
  Tensor x = random_tensor({2, 2, 4, 4}, 9);
  for (double& v : x.data()) {
    if (std::abs(v) < 1e-2) v = 0.5;
  }
  const Tensor r = random_tensor(x.shape(), 10);
  const Tensor g = relu_backward(x, r);
  GradCheckOptions o;
  o.tolerance = 1e-6;
  std::vector<GradCheckTarget> t{{"x", x.data(), g.data()}};
  const auto rep = grad_check([&] { return dot(relu(x), r); }, t, o);
  EXPECT_TRUE(rep.passed) << rep.max_rel_error;
}

TEST(KernelGradients, UpsampleBothModes) {
  for (UpsampleMode m : {UpsampleMode::kNearest, UpsampleMode::kBilinear}) {
    for (int f : {2, 4, 8}) {
      Tensor x = random_tensor({2, 2, 3, 5}, 11);
      const Tensor r = random_tensor({2, 2, 3 * f, 5 * f}, 12);
      const Tensor g = upsample_backward(r, x.shape(), f, m);
      const auto rep = check_kernel([&] { return dot(upsample(x, f, m), r); },
                                    {&x}, {g.storage()});
      EXPECT_TRUE(rep.passed) << rep.max_rel_error;
    }
  }
}

TEST(KernelGradients, PoolingLinearConcatAdd) {
  Tensor x = random_tensor({2, 3, 6, 4}, 13);
  {
    const Tensor r = random_tensor({2, 3, 3, 2}, 14);
    const Tensor g = avg_pool_backward(r, x.shape(), 2, 2, 2, 2);
    EXPECT_TRUE(check_kernel([&] { return dot(avg_pool(x, 2, 2, 2, 2), r); },
                             {&x}, {g.storage()})
                    .passed);
  }
  {
    const Tensor r = random_tensor({2, 3, 1, 1}, 15);
    const Tensor g = global_avg_pool_backward(r, x.shape());
    EXPECT_TRUE(check_kernel([&] { return dot(global_avg_pool(x), r); }, {&x},
                             {g.storage()})
                    .passed);
  }
  {
    Tensor w = random_tensor({5, 72, 1, 1}, 16);
    Tensor b = random_tensor({1, 5, 1, 1}, 17);
    const Tensor r = random_tensor({2, 5, 1, 1}, 18);
    const auto g = linear_backward(x, w, r);
    EXPECT_TRUE(check_kernel([&] { return dot(linear<double>(x, w, b.data()), r); },
                             {&x, &w, &b},
                             {g.input.storage(), g.weights.storage(), g.bias})
                    .passed);
  }
}

TEST(KernelGradients, Losses) {
  Tensor logits = random_tensor({2, 4, 3, 3}, 19, -2, 2);
  std::vector<int32_t> labels(18);
  for (size_t i = 0; i < labels.size(); ++i) labels[i] = i % 5 == 4 ? 255 : i % 4;
  const auto ce = softmax_cross_entropy<double>(logits, labels, 255);
  EXPECT_TRUE(check_kernel(
                  [&] { return softmax_cross_entropy<double>(logits, labels, 255).loss; },
                  {&logits}, {ce.grad.storage()})
                  .passed);
  Tensor pred = random_tensor({2, 3, 4, 4}, 20);
  const Tensor target = random_tensor({2, 3, 4, 4}, 21);
  const auto m = mse_loss(pred, target);
  EXPECT_TRUE(check_kernel([&] { return mse_loss(pred, target).loss; }, {&pred},
                           {m.grad.storage()})
                  .passed);
}

TEST(BatchNorm, TrainNormalizes) {
  const Tensor x = random_tensor({4, 3, 5, 5}, 22, -3, 5);
  auto st = BatchNormState<double>::identity(3);
  const Tensor y = batch_norm(x, st);
  for (int64_t c = 0; c < 3; ++c) {
    double m = 0, v = 0;
    for (int64_t n = 0; n < 4; ++n)
      for (int64_t i = 0; i < 25; ++i) m += y[(n * 3 + c) * 25 + i];
    m /= 100;
    for (int64_t n = 0; n < 4; ++n)
      for (int64_t i = 0; i < 25; ++i) {
        const double d = y[(n * 3 + c) * 25 + i] - m;
        v += d * d;
      }
    v /= 100;
    // Input variance of the channel gives the expected var / (var + eps).
    double xm = 0, xv = 0;
    for (int64_t n = 0; n < 4; ++n)
      for (int64_t i = 0; i < 25; ++i) xm += x[(n * 3 + c) * 25 + i];
    xm /= 100;
    for (int64_t n = 0; n < 4; ++n)
      for (int64_t i = 0; i < 25; ++i) {
        const double d = x[(n * 3 + c) * 25 + i] - xm;
        xv += d * d;
      }
    xv /= 100;
    EXPECT_NEAR(m, 0, 1e-12);
    EXPECT_NEAR(v, xv / (xv + st.epsilon), 1e-12);
  }
}

TEST(BatchNorm, ConstantInputGivesBeta) {
  Tensor x(Shape{2, 2, 3, 3}, 4.0);
  auto st = BatchNormState<double>::identity(2);
  st.beta = {0.5, -1.5};
  const Tensor y = batch_norm(x, st);
  for (int64_t i = 0; i < 9; ++i) {
    EXPECT_EQ(y.at(1, 0, i / 3, i % 3), 0.5);
    EXPECT_EQ(y.at(0, 1, i / 3, i % 3), -1.5);
  }
}

TEST(BatchNorm, EvalHandOracle) {
  Tensor x(Shape{1, 1, 1, 1}, 3.0);
  auto st = BatchNormState<double>::identity(1);
  st.mode = BnMode::kEval;
  st.gamma = {2};
  st.beta = {1};
  const Tensor y = batch_norm(x, st);
  EXPECT_NEAR(y[0], 2 * 3 / std::sqrt(1 + 1e-5) + 1, 1e-15);
  EXPECT_LT(y[0], 7.0);
}

TEST(BatchNorm, RunningStatistics) {
  Tensor x(Shape{2, 1, 1, 2}, std::vector<double>{1, 2, 3, 4});
  auto st = BatchNormState<double>::identity(1);
  batch_norm(x, st);
  EXPECT_DOUBLE_EQ(st.running_mean[0], 0.1 * 2.5);
  // unbiased variance of {1,2,3,4} is 5/3
  EXPECT_DOUBLE_EQ(st.running_var[0], 0.9 + 0.1 * (5.0 / 3.0));
}

TEST(Relu, Definition) {
  Tensor x(Shape{1, 1, 1, 3}, std::vector<double>{-1, 0, 2});
  EXPECT_EQ(relu(x).storage(), (std::vector<double>{0, 0, 2}));
  Tensor g(Shape{1, 1, 1, 3}, std::vector<double>{5, 5, 5});
  const Tensor d = relu_backward(x, g);
  EXPECT_EQ(d[0], 0);
  EXPECT_EQ(d[2], 5);
}

TEST(Upsample, ConstantsReproduced) {
  for (UpsampleMode m : {UpsampleMode::kNearest, UpsampleMode::kBilinear}) {
    for (int f : {2, 4, 8, 16}) {
      Tensor x(Shape{1, 2, 3, 2}, 5.0);
      const Tensor y = upsample(x, f, m);
      for (double v : y.data()) EXPECT_EQ(v, 5.0);
    }
  }
}

TEST(Upsample, NearestReplicates) {
  Tensor x(Shape{1, 1, 1, 1}, 3.5);
  EXPECT_EQ(upsample(x, 2, UpsampleMode::kNearest).storage(),
            std::vector<double>(4, 3.5));
}

TEST(Upsample, BilinearMatchesPerPixelOracle) {
  Tensor x(Shape{1, 1, 2, 2}, std::vector<double>{0, 1, 2, 3});
  const Tensor y = upsample(x, 2, UpsampleMode::kBilinear);
  for (int oy = 0; oy < 4; ++oy) {
    for (int ox = 0; ox < 4; ++ox) {
      const double sy = std::clamp((oy + 0.5) / 2 - 0.5, 0.0, 1.0);
      const double sx = std::clamp((ox + 0.5) / 2 - 0.5, 0.0, 1.0);
      // f(x, y) = x + 2y is bilinear on the grid.
      EXPECT_NEAR(y.at(0, 0, oy, ox), sx + 2 * sy, 1e-15);
    }
  }
}

TEST(Upsample, RejectsNonPowerOfTwo) {
  Tensor x(Shape{1, 1, 2, 2});
  EXPECT_THROW(upsample(x, 3, UpsampleMode::kNearest), ConfigError);
  EXPECT_THROW(upsample(x, 1, UpsampleMode::kBilinear), ConfigError);
}

TEST(Pooling, Oracles) {
  Tensor x(Shape{1, 1, 2, 2}, std::vector<double>{1, 2, 3, 4});
  EXPECT_EQ(avg_pool(x, 2, 2, 2, 2)[0], 2.5);
  Tensor y(Shape{1, 1, 2, 2}, std::vector<double>{1, 3, 5, 7});
  EXPECT_EQ(global_avg_pool(y)[0], 4.0);
  const Tensor r = random_tensor({2, 3, 4, 6}, 30);
  EXPECT_EQ(avg_pool(r, 4, 6, 4, 6), global_avg_pool(r));
  const Tensor g = global_avg_pool_backward(Tensor(Shape{1, 1, 1, 1}, 1.0),
                                            Shape{1, 1, 2, 2});
  for (double v : g.data()) EXPECT_EQ(v, 0.25);
  EXPECT_THROW(avg_pool(x, 3, 3, 1, 1), ConfigError);
}

TEST(Pooling, PartitionPreservesMean) {
  Tensor x(Shape{1, 1, 4, 4});
  for (int i = 0; i < 16; ++i) x[i] = i * 0.25;  // exact in binary
  const Tensor y = avg_pool(x, 2, 2, 2, 2);
  double a = 0, b = 0;
  for (double v : x.data()) a += v;
  for (double v : y.data()) b += v;
  EXPECT_EQ(a / 16, b / 4);
}

TEST(Linear, Oracles) {
  Tensor x(Shape{1, 2, 1, 1}, std::vector<double>{1, 2});
  Tensor w(Shape{1, 2, 1, 1}, std::vector<double>{3, 4});
  std::vector<double> b{5};
  EXPECT_EQ(linear<double>(x, w, b)[0], 16);
  Tensor eye(Shape{2, 2, 1, 1}, std::vector<double>{1, 0, 0, 1});
  EXPECT_EQ(linear<double>(x, eye, {}).storage(), x.storage());
  Tensor z(Shape{1, 2, 1, 1}, 0.0);
  EXPECT_EQ(linear<double>(z, w, b)[0], 5);
}

TEST(Losses, CrossEntropyOracles) {
  Tensor flat(Shape{1, 5, 2, 2}, 0.3);
  std::vector<int32_t> lab{0, 1, 2, 3};
  EXPECT_NEAR(softmax_cross_entropy<double>(flat, lab, 255).loss, std::log(5.0),
              1e-15);
  double prev = 1e9;
  for (double margin : {1.0, 10.0}) {
    Tensor l(Shape{1, 2, 1, 1}, std::vector<double>{margin, 0});
    const std::vector<int32_t> one{0};
    const double loss = softmax_cross_entropy<double>(l, one, 255).loss;
    EXPECT_LT(loss, prev);
    prev = loss;
  }
  EXPECT_LT(prev, 1e-4);
  const Tensor logits = random_tensor({1, 3, 2, 2}, 31);
  const std::vector<int32_t> ign{0, 255, 2, 1};
  const auto r = softmax_cross_entropy<double>(logits, ign, 255);
  for (int64_t c = 0; c < 3; ++c) EXPECT_EQ(r.grad.at(0, c, 0, 1), 0.0);
  for (int64_t p = 0; p < 4; ++p) {
    double s = 0;
    for (int64_t c = 0; c < 3; ++c) s += r.grad[c * 4 + p];
    EXPECT_NEAR(s, 0.0, 1e-15);
  }
  const std::vector<int32_t> all(4, 255);
  EXPECT_THROW(softmax_cross_entropy<double>(logits, all, 255), ConfigError);
}

TEST(Losses, MseOracles) {
  const Tensor a = random_tensor({2, 2, 3, 3}, 32);
  EXPECT_EQ(mse_loss(a, a).loss, 0.0);
  Tensor b = a;
  for (double& v : b.data()) v += 1;
  EXPECT_NEAR(mse_loss(b, a).loss, 1.0, 1e-12);
  const Tensor c = random_tensor({2, 2, 3, 3}, 33);
  double s = 0;
  for (int64_t i = 0; i < a.numel(); ++i) s += (a[i] - c[i]) * (a[i] - c[i]);
  EXPECT_NEAR(mse_loss(a, c).loss, s / a.numel(), 1e-15);
  EXPECT_THROW(mse_loss(a, Tensor(Shape{1, 1, 1, 1})), ConfigError);
}

TEST(Tensor, InvariantsAndVerifyMode) {
  EXPECT_THROW(Tensor(Shape{1, 2, 2, 2}, std::vector<double>(7)), ConfigError);
  Tensor t(Shape{1, 1, 2, 2});
  t.ensure_grad();
  EXPECT_EQ(t.grad().size(), 4u);
  Tensor bad(Shape{1, 1, 1, 2}, std::vector<double>{1, NAN});
  EXPECT_THROW(relu(bad), NumericalError);
  TensorF badf(Shape{1, 1, 1, 2}, std::vector<float>{1, NAN});
  EXPECT_NO_THROW(relu(badf));
}

TEST(Kernels, Deterministic) {
  const Tensor x = random_tensor({2, 4, 9, 9}, 40);
  const ConvSpec s = make_conv(4, 6, 3, 1);
  const Tensor w = random_tensor(s.weight_shape(), 41);
  EXPECT_EQ(conv2d<double>(x, s, w, {}), conv2d<double>(x, s, w, {}));
  const Tensor r = random_tensor({2, 6, 9, 9}, 42);
  EXPECT_EQ(conv2d_backward(x, s, w, r).weights,
            conv2d_backward(x, s, w, r).weights);
}

}  // namespace
}  // namespace hrforge
