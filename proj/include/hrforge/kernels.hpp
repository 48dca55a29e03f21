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

#ifndef HRFORGE_KERNELS_HPP_
#define HRFORGE_KERNELS_HPP_

// Reference CPU kernels. Every forward kernel has a matching backward that
// returns the gradients of a scalar loss with respect to each input, given the
// gradient with respect to the forward output.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hrforge/tensor.hpp"

namespace hrforge {

struct ConvSpec {
  int64_t in_channels = 1;
  int64_t out_channels = 1;
  int kernel_h = 3;
  int kernel_w = 3;
  int stride_h = 1;
  int stride_w = 1;
  int pad_h = 0;
  int pad_w = 0;
  bool has_bias = false;

  // floor((h + 2p - k) / s) + 1; throws ConfigError if < 1.
  int64_t out_h(int64_t h) const;
  int64_t out_w(int64_t w) const;
  Shape weight_shape() const {
    return {out_channels, in_channels, kernel_h, kernel_w};
  }
  void validate() const;
  bool operator==(const ConvSpec&) const = default;
};

// Square kernel, "same"-style padding k/2.
ConvSpec make_conv(int64_t in, int64_t out, int kernel, int stride = 1,
                   bool bias = false);

template <typename T>
BasicTensor<T> conv2d(const BasicTensor<T>& input, const ConvSpec& spec,
                      const BasicTensor<T>& weights, std::span<const T> bias);

template <typename T>
struct ConvGrads {
  BasicTensor<T> input;
  BasicTensor<T> weights;
  std::vector<T> bias;
};

template <typename T>
ConvGrads<T> conv2d_backward(const BasicTensor<T>& input, const ConvSpec& spec,
                             const BasicTensor<T>& weights,
                             const BasicTensor<T>& grad_out,
                             bool need_input_grad = true);

enum class BnMode { kTrain, kEval };

template <typename T>
struct BatchNormState {
  std::vector<T> gamma;
  std::vector<T> beta;
  std::vector<T> running_mean;
  std::vector<T> running_var;
  double momentum = 0.1;
  double epsilon = 1e-5;
  BnMode mode = BnMode::kTrain;

  static BatchNormState identity(int64_t channels);
  int64_t channels() const { return static_cast<int64_t>(gamma.size()); }
  void validate() const;
};

// Saved forward quantities needed by the backward pass.
template <typename T>
struct BatchNormCache {
  BnMode mode = BnMode::kTrain;
  std::vector<T> mean;
  std::vector<T> inv_std;
};

// Train mode normalizes with biased batch statistics and moves the running
// statistics by `momentum` (running variance uses the unbiased estimate).
template <typename T>
BasicTensor<T> batch_norm(const BasicTensor<T>& input, BatchNormState<T>& state,
                          BatchNormCache<T>* cache = nullptr);

template <typename T>
struct BatchNormGrads {
  BasicTensor<T> input;
  std::vector<T> gamma;
  std::vector<T> beta;
};

template <typename T>
BatchNormGrads<T> batch_norm_backward(const BasicTensor<T>& input,
                                      const BatchNormState<T>& state,
                                      const BatchNormCache<T>& cache,
                                      const BasicTensor<T>& grad_out);

template <typename T>
BasicTensor<T> relu(const BasicTensor<T>& input);
template <typename T>
BasicTensor<T> relu_backward(const BasicTensor<T>& input,
                             const BasicTensor<T>& grad_out);

enum class UpsampleMode { kNearest, kBilinear };

// Bilinear sampling maps output pixel o to input coordinate
// (o + 0.5) / factor - 0.5, clamped to the valid range.
template <typename T>
BasicTensor<T> upsample(const BasicTensor<T>& input, int factor,
                        UpsampleMode mode);
template <typename T>
BasicTensor<T> upsample_backward(const BasicTensor<T>& grad_out,
                                 const Shape& input_shape, int factor,
                                 UpsampleMode mode);

template <typename T>
BasicTensor<T> avg_pool(const BasicTensor<T>& input, int kernel_h,
                        int kernel_w, int stride_h, int stride_w);
template <typename T>
BasicTensor<T> avg_pool_backward(const BasicTensor<T>& grad_out,
                                 const Shape& input_shape, int kernel_h,
                                 int kernel_w, int stride_h, int stride_w);

template <typename T>
BasicTensor<T> global_avg_pool(const BasicTensor<T>& input);
template <typename T>
BasicTensor<T> global_avg_pool_backward(const BasicTensor<T>& grad_out,
                                        const Shape& input_shape);

// Input is flattened to (n, c*h*w); weights are (d_out, d, 1, 1). Output is
// (n, d_out, 1, 1).
template <typename T>
BasicTensor<T> linear(const BasicTensor<T>& input,
                      const BasicTensor<T>& weights, std::span<const T> bias);

template <typename T>
struct LinearGrads {
  BasicTensor<T> input;
  BasicTensor<T> weights;
  std::vector<T> bias;
};

template <typename T>
LinearGrads<T> linear_backward(const BasicTensor<T>& input,
                               const BasicTensor<T>& weights,
                               const BasicTensor<T>& grad_out);

// Elementwise sum in argument order.
template <typename T>
BasicTensor<T> add(std::span<const BasicTensor<T>* const> inputs);

// Channel concatenation and its inverse.
template <typename T>
BasicTensor<T> concat_channels(std::span<const BasicTensor<T>* const> inputs);
template <typename T>
std::vector<BasicTensor<T>> split_channels(const BasicTensor<T>& t,
                                           std::span<const int64_t> channels);

template <typename T>
struct LossResult {
  T loss = 0;
  BasicTensor<T> grad;
  int64_t count = 0;
};

// Mean negative log-softmax over pixels whose label is not ignore_index.
template <typename T>
LossResult<T> softmax_cross_entropy(const BasicTensor<T>& logits,
                                    std::span<const int32_t> labels,
                                    int32_t ignore_index);

template <typename T>
LossResult<T> mse_loss(const BasicTensor<T>& pred, const BasicTensor<T>& target);

}  // namespace hrforge

#endif  // HRFORGE_KERNELS_HPP_
