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

#include "hrforge/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hrforge/parallel.hpp"

namespace hrforge {

namespace {

bool is_power_of_two(int v) { return v > 0 && (v & (v - 1)) == 0; }

void require(bool ok, const std::string& msg) {
  if (!ok) throw ConfigError(msg);
}

// Lowers one image to a (K x P) column matrix, K = cin*kh*kw, P = ho*wo.
template <typename T>
void im2col(const T* x, const ConvSpec& s, int64_t h, int64_t w, int64_t ho,
            int64_t wo, T* cols) {
  const int64_t P = ho * wo;
  for (int64_t ci = 0; ci < s.in_channels; ++ci) {
    const T* xc = x + ci * h * w;
    for (int ky = 0; ky < s.kernel_h; ++ky) {
      for (int kx = 0; kx < s.kernel_w; ++kx) {
        T* row = cols + ((ci * s.kernel_h + ky) * s.kernel_w + kx) * P;
        for (int64_t oy = 0; oy < ho; ++oy) {
          const int64_t iy = oy * s.stride_h - s.pad_h + ky;
          T* out = row + oy * wo;
          if (iy < 0 || iy >= h) {
            std::fill(out, out + wo, T{0});
            continue;
          }
          const T* xr = xc + iy * w;
          for (int64_t ox = 0; ox < wo; ++ox) {
            const int64_t ix = ox * s.stride_w - s.pad_w + kx;
            out[ox] = (ix >= 0 && ix < w) ? xr[ix] : T{0};
          }
        }
      }
    }
  }
}

// Transpose of im2col: scatter-adds a (K x P) matrix back into an image.
template <typename T>
void col2im(const T* cols, const ConvSpec& s, int64_t h, int64_t w,
            int64_t ho, int64_t wo, T* x) {
  const int64_t P = ho * wo;
#pragma omp parallel for schedule(static)
  for (int64_t ci = 0; ci < s.in_channels; ++ci) {
    T* xc = x + ci * h * w;
    for (int ky = 0; ky < s.kernel_h; ++ky) {
      for (int kx = 0; kx < s.kernel_w; ++kx) {
        const T* row = cols + ((ci * s.kernel_h + ky) * s.kernel_w + kx) * P;
        for (int64_t oy = 0; oy < ho; ++oy) {
          const int64_t iy = oy * s.stride_h - s.pad_h + ky;
          if (iy < 0 || iy >= h) continue;
          T* xr = xc + iy * w;
          const T* in = row + oy * wo;
          for (int64_t ox = 0; ox < wo; ++ox) {
            const int64_t ix = ox * s.stride_w - s.pad_w + kx;
            if (ix >= 0 && ix < w) xr[ix] += in[ox];
          }
        }
      }
    }
  }
}

bool is_pointwise(const ConvSpec& s) {
  return s.kernel_h == 1 && s.kernel_w == 1 && s.stride_h == 1 &&
         s.stride_w == 1 && s.pad_h == 0 && s.pad_w == 0;
}

// out[co][p] (+)= sum_k w[co][k] * cols[k][p], accumulated in ascending k.
template <typename T>
void gemm_rows(const T* wts, const T* cols, int64_t cout, int64_t K, int64_t P,
               T* out) {
#pragma omp parallel for schedule(static)
  for (int64_t co = 0; co < cout; ++co) {
    T* orow = out + co * P;
    const T* wrow = wts + co * K;
    for (int64_t k = 0; k < K; ++k) {
      const T wv = wrow[k];
      const T* crow = cols + k * P;
      for (int64_t p = 0; p < P; ++p) orow[p] += wv * crow[p];
    }
  }
}

}  // namespace

int64_t ConvSpec::out_h(int64_t h) const {
  const int64_t span = h + 2 * pad_h - kernel_h;
  if (span < 0) {
    throw ConfigError("conv output height < 1 for input height " +
                      std::to_string(h));
  }
  return span / stride_h + 1;
}

int64_t ConvSpec::out_w(int64_t w) const {
  const int64_t span = w + 2 * pad_w - kernel_w;
  if (span < 0) {
    throw ConfigError("conv output width < 1 for input width " +
                      std::to_string(w));
  }
  return span / stride_w + 1;
}

void ConvSpec::validate() const {
  require(in_channels > 0 && out_channels > 0, "conv channels must be > 0");
  require(kernel_h > 0 && kernel_w > 0, "conv kernel must be > 0");
  require(stride_h > 0 && stride_w > 0, "conv stride must be > 0");
  require(pad_h >= 0 && pad_w >= 0, "conv padding must be >= 0");
}

ConvSpec make_conv(int64_t in, int64_t out, int kernel, int stride,
                   bool bias) {
  ConvSpec s;
  s.in_channels = in;
  s.out_channels = out;
  s.kernel_h = s.kernel_w = kernel;
  s.stride_h = s.stride_w = stride;
  s.pad_h = s.pad_w = kernel / 2;
  s.has_bias = bias;
  return s;
}

template <typename T>
BasicTensor<T> conv2d(const BasicTensor<T>& input, const ConvSpec& spec,
                      const BasicTensor<T>& weights, std::span<const T> bias) {
  spec.validate();
  const Shape& in = input.shape();
  require(in.c == spec.in_channels,
          "conv2d: input has " + std::to_string(in.c) + " channels, spec " +
              std::to_string(spec.in_channels));
  require(weights.shape() == spec.weight_shape(),
          "conv2d: weight shape " + weights.shape().str() + " expected " +
              spec.weight_shape().str());
  require(!spec.has_bias ||
              static_cast<int64_t>(bias.size()) == spec.out_channels,
          "conv2d: bias length mismatch");
  const int64_t ho = spec.out_h(in.h);
  const int64_t wo = spec.out_w(in.w);
  BasicTensor<T> out({in.n, spec.out_channels, ho, wo});
  const int64_t K = spec.in_channels * spec.kernel_h * spec.kernel_w;
  const int64_t P = ho * wo;
  const bool pointwise = is_pointwise(spec);
  std::vector<T> cols(pointwise ? 0 : static_cast<size_t>(K * P));
  for (int64_t n = 0; n < in.n; ++n) {
    const T* x = input.ptr() + n * in.c * in.h * in.w;
    const T* c = x;
    if (!pointwise) {
      im2col(x, spec, in.h, in.w, ho, wo, cols.data());
      c = cols.data();
    }
    T* o = out.ptr() + n * spec.out_channels * P;
    if (spec.has_bias) {
      for (int64_t co = 0; co < spec.out_channels; ++co) {
        std::fill(o + co * P, o + (co + 1) * P, bias[co]);
      }
    }
    gemm_rows(weights.ptr(), c, spec.out_channels, K, P, o);
  }
  check_kernel_output(out, "conv2d");
  return out;
}

template <typename T>
ConvGrads<T> conv2d_backward(const BasicTensor<T>& input, const ConvSpec& spec,
                             const BasicTensor<T>& weights,
                             const BasicTensor<T>& grad_out,
                             bool need_input_grad) {
  const Shape& in = input.shape();
  const int64_t ho = spec.out_h(in.h);
  const int64_t wo = spec.out_w(in.w);
  require(grad_out.shape() == Shape{in.n, spec.out_channels, ho, wo},
          "conv2d_backward: grad_out shape mismatch");
  const int64_t K = spec.in_channels * spec.kernel_h * spec.kernel_w;
  const int64_t P = ho * wo;
  const int64_t cout = spec.out_channels;
  const bool pointwise = is_pointwise(spec);

  ConvGrads<T> g;
  g.weights = BasicTensor<T>(spec.weight_shape());
  if (spec.has_bias) g.bias.assign(static_cast<size_t>(cout), T{0});
  if (need_input_grad) g.input = BasicTensor<T>(in);

  std::vector<T> cols(pointwise ? 0 : static_cast<size_t>(K * P));
  std::vector<T> cols_t(static_cast<size_t>(K * P));
  std::vector<T> grad_cols(pointwise || !need_input_grad
                               ? 0
                               : static_cast<size_t>(K * P));
  T* gw = g.weights.ptr();
  const T* w = weights.ptr();

  for (int64_t n = 0; n < in.n; ++n) {
    const T* x = input.ptr() + n * in.c * in.h * in.w;
    const T* go = grad_out.ptr() + n * cout * P;
    const T* c = x;
    if (!pointwise) {
      im2col(x, spec, in.h, in.w, ho, wo, cols.data());
      c = cols.data();
    }
    for (int64_t k = 0; k < K; ++k) {
      for (int64_t p = 0; p < P; ++p) cols_t[p * K + k] = c[k * P + p];
    }
    // dW[co][k] += sum_p dY[co][p] * cols[k][p], ascending p per element.
#pragma omp parallel for schedule(static)
    for (int64_t co = 0; co < cout; ++co) {
      T* gwrow = gw + co * K;
      const T* gorow = go + co * P;
      for (int64_t p = 0; p < P; ++p) {
        const T gv = gorow[p];
        const T* crow = cols_t.data() + p * K;
        for (int64_t k = 0; k < K; ++k) gwrow[k] += gv * crow[k];
      }
    }
    if (spec.has_bias) {
      for (int64_t co = 0; co < cout; ++co) {
        T s = 0;
        for (int64_t p = 0; p < P; ++p) s += go[co * P + p];
        g.bias[co] += s;
      }
    }
    if (need_input_grad) {
      T* gx = g.input.ptr() + n * in.c * in.h * in.w;
      T* gc = pointwise ? gx : grad_cols.data();
      if (!pointwise) std::fill(grad_cols.begin(), grad_cols.end(), T{0});
      // dCols[k][p] = sum_co W[co][k] * dY[co][p], ascending co.
#pragma omp parallel for schedule(static)
      for (int64_t k = 0; k < K; ++k) {
        T* row = gc + k * P;
        for (int64_t co = 0; co < cout; ++co) {
          const T wv = w[co * K + k];
          const T* gorow = go + co * P;
          for (int64_t p = 0; p < P; ++p) row[p] += wv * gorow[p];
        }
      }
      if (!pointwise) col2im(grad_cols.data(), spec, in.h, in.w, ho, wo, gx);
    }
  }
  if (need_input_grad) check_kernel_output(g.input, "conv2d_backward");
  check_kernel_output(g.weights, "conv2d_backward");
  return g;
}

template <typename T>
BatchNormState<T> BatchNormState<T>::identity(int64_t channels) {
  BatchNormState<T> s;
  s.gamma.assign(static_cast<size_t>(channels), T{1});
  s.beta.assign(static_cast<size_t>(channels), T{0});
  s.running_mean.assign(static_cast<size_t>(channels), T{0});
  s.running_var.assign(static_cast<size_t>(channels), T{1});
  return s;
}

template <typename T>
void BatchNormState<T>::validate() const {
  const size_t c = gamma.size();
  require(beta.size() == c && running_mean.size() == c &&
              running_var.size() == c,
          "batch_norm: state vectors have inconsistent lengths");
  require(epsilon > 0, "batch_norm: epsilon must be > 0");
  require(momentum > 0 && momentum < 1, "batch_norm: momentum must be in (0,1)");
  for (T v : running_var) {
    require(v >= 0, "batch_norm: running_var must be >= 0");
  }
}

template <typename T>
BasicTensor<T> batch_norm(const BasicTensor<T>& input, BatchNormState<T>& state,
                          BatchNormCache<T>* cache) {
  state.validate();
  const Shape& s = input.shape();
  require(s.c == state.channels(),
          "batch_norm: input has " + std::to_string(s.c) +
              " channels, state has " + std::to_string(state.channels()));
  const int64_t plane = s.plane();
  const int64_t count = s.n * plane;
  std::vector<T> mean(static_cast<size_t>(s.c));
  std::vector<T> inv_std(static_cast<size_t>(s.c));
  if (state.mode == BnMode::kTrain) {
    require(count > 0, "batch_norm: zero elements per channel in train mode");
    for (int64_t c = 0; c < s.c; ++c) {
      T sum = 0;
      for (int64_t n = 0; n < s.n; ++n) {
        const T* p = input.ptr() + (n * s.c + c) * plane;
        for (int64_t i = 0; i < plane; ++i) sum += p[i];
      }
      const T m = sum / static_cast<T>(count);
      T sq = 0;
      for (int64_t n = 0; n < s.n; ++n) {
        const T* p = input.ptr() + (n * s.c + c) * plane;
        for (int64_t i = 0; i < plane; ++i) {
          const T d = p[i] - m;
          sq += d * d;
        }
      }
      const T var = sq / static_cast<T>(count);
      mean[c] = m;
      inv_std[c] = T{1} / std::sqrt(var + static_cast<T>(state.epsilon));
      const T mom = static_cast<T>(state.momentum);
      const T unbiased =
          count > 1 ? sq / static_cast<T>(count - 1) : var;
      state.running_mean[c] = (T{1} - mom) * state.running_mean[c] + mom * m;
      state.running_var[c] =
          (T{1} - mom) * state.running_var[c] + mom * unbiased;
    }
  } else {
    for (int64_t c = 0; c < s.c; ++c) {
      mean[c] = state.running_mean[c];
      inv_std[c] = T{1} / std::sqrt(state.running_var[c] +
                                    static_cast<T>(state.epsilon));
    }
  }
  BasicTensor<T> out(s);
  for (int64_t n = 0; n < s.n; ++n) {
    for (int64_t c = 0; c < s.c; ++c) {
      const T* p = input.ptr() + (n * s.c + c) * plane;
      T* o = out.ptr() + (n * s.c + c) * plane;
      const T scale = state.gamma[c] * inv_std[c];
      const T m = mean[c];
      const T b = state.beta[c];
      for (int64_t i = 0; i < plane; ++i) o[i] = (p[i] - m) * scale + b;
    }
  }
  if (cache) {
    cache->mode = state.mode;
    cache->mean = std::move(mean);
    cache->inv_std = std::move(inv_std);
  }
  check_kernel_output(out, "batch_norm");
  return out;
}

template <typename T>
BatchNormGrads<T> batch_norm_backward(const BasicTensor<T>& input,
                                      const BatchNormState<T>& state,
                                      const BatchNormCache<T>& cache,
                                      const BasicTensor<T>& grad_out) {
  const Shape& s = input.shape();
  require(grad_out.shape() == s, "batch_norm_backward: shape mismatch");
  const int64_t plane = s.plane();
  const T count = static_cast<T>(s.n * plane);
  BatchNormGrads<T> g;
  g.input = BasicTensor<T>(s);
  g.gamma.assign(static_cast<size_t>(s.c), T{0});
  g.beta.assign(static_cast<size_t>(s.c), T{0});
  for (int64_t c = 0; c < s.c; ++c) {
    const T m = cache.mean[c];
    const T is = cache.inv_std[c];
    T sum_dy = 0;
    T sum_dy_xhat = 0;
    for (int64_t n = 0; n < s.n; ++n) {
      const T* x = input.ptr() + (n * s.c + c) * plane;
      const T* dy = grad_out.ptr() + (n * s.c + c) * plane;
      for (int64_t i = 0; i < plane; ++i) {
        sum_dy += dy[i];
        sum_dy_xhat += dy[i] * (x[i] - m) * is;
      }
    }
    g.beta[c] = sum_dy;
    g.gamma[c] = sum_dy_xhat;
    const T gscale = state.gamma[c] * is;
    for (int64_t n = 0; n < s.n; ++n) {
      const T* x = input.ptr() + (n * s.c + c) * plane;
      const T* dy = grad_out.ptr() + (n * s.c + c) * plane;
      T* dx = g.input.ptr() + (n * s.c + c) * plane;
      if (cache.mode == BnMode::kTrain) {
        for (int64_t i = 0; i < plane; ++i) {
          const T xhat = (x[i] - m) * is;
          dx[i] = gscale * (dy[i] - sum_dy / count - xhat * sum_dy_xhat / count);
        }
      } else {
        for (int64_t i = 0; i < plane; ++i) dx[i] = gscale * dy[i];
      }
    }
  }
  check_kernel_output(g.input, "batch_norm_backward");
  return g;
}

template <typename T>
BasicTensor<T> relu(const BasicTensor<T>& input) {
  BasicTensor<T> out(input.shape());
  const T* x = input.ptr();
  T* o = out.ptr();
  // NaN passes through so verify mode still sees it.
  for (int64_t i = 0; i < input.numel(); ++i)
    o[i] = x[i] > T{0} || x[i] != x[i] ? x[i] : T{0};
  check_kernel_output(out, "relu");
  return out;
}

template <typename T>
BasicTensor<T> relu_backward(const BasicTensor<T>& input,
                             const BasicTensor<T>& grad_out) {
  require(input.shape() == grad_out.shape(), "relu_backward: shape mismatch");
  BasicTensor<T> out(input.shape());
  const T* x = input.ptr();
  const T* g = grad_out.ptr();
  T* o = out.ptr();
  for (int64_t i = 0; i < input.numel(); ++i) o[i] = x[i] > T{0} ? g[i] : T{0};
  return out;
}

namespace {

struct LerpTable {
  std::vector<int64_t> lo;
  std::vector<int64_t> hi;
  std::vector<double> frac;
};

LerpTable bilinear_table(int64_t in, int factor) {
  const int64_t out = in * factor;
  LerpTable t;
  t.lo.resize(out);
  t.hi.resize(out);
  t.frac.resize(out);
  for (int64_t o = 0; o < out; ++o) {
    double src = (static_cast<double>(o) + 0.5) / factor - 0.5;
    if (src < 0) src = 0;
    int64_t i0 = static_cast<int64_t>(std::floor(src));
    if (i0 >= in - 1) {
      t.lo[o] = t.hi[o] = in - 1;
      t.frac[o] = 0;
      continue;
    }
    t.lo[o] = i0;
    t.hi[o] = i0 + 1;
    t.frac[o] = src - static_cast<double>(i0);
  }
  return t;
}

void check_factor(int factor) {
  require(factor >= 2 && is_power_of_two(factor),
          "upsample factor must be a power of two >= 2, got " +
              std::to_string(factor));
}

}  // namespace

template <typename T>
BasicTensor<T> upsample(const BasicTensor<T>& input, int factor,
                        UpsampleMode mode) {
  check_factor(factor);
  const Shape& s = input.shape();
  const int64_t ho = s.h * factor;
  const int64_t wo = s.w * factor;
  BasicTensor<T> out({s.n, s.c, ho, wo});
  if (mode == UpsampleMode::kNearest) {
    for (int64_t nc = 0; nc < s.n * s.c; ++nc) {
      const T* x = input.ptr() + nc * s.plane();
      T* o = out.ptr() + nc * ho * wo;
      for (int64_t oy = 0; oy < ho; ++oy) {
        const T* xr = x + (oy / factor) * s.w;
        for (int64_t ox = 0; ox < wo; ++ox) o[oy * wo + ox] = xr[ox / factor];
      }
    }
  } else {
    const LerpTable ty = bilinear_table(s.h, factor);
    const LerpTable tx = bilinear_table(s.w, factor);
    for (int64_t nc = 0; nc < s.n * s.c; ++nc) {
      const T* x = input.ptr() + nc * s.plane();
      T* o = out.ptr() + nc * ho * wo;
      for (int64_t oy = 0; oy < ho; ++oy) {
        const T* r0 = x + ty.lo[oy] * s.w;
        const T* r1 = x + ty.hi[oy] * s.w;
        const T ly = static_cast<T>(ty.frac[oy]);
        for (int64_t ox = 0; ox < wo; ++ox) {
          const T lx = static_cast<T>(tx.frac[ox]);
          const int64_t a = tx.lo[ox];
          const int64_t b = tx.hi[ox];
          const T top = r0[a] + lx * (r0[b] - r0[a]);
          const T bot = r1[a] + lx * (r1[b] - r1[a]);
          o[oy * wo + ox] = top + ly * (bot - top);
        }
      }
    }
  }
  check_kernel_output(out, "upsample");
  return out;
}

template <typename T>
BasicTensor<T> upsample_backward(const BasicTensor<T>& grad_out,
                                 const Shape& input_shape, int factor,
                                 UpsampleMode mode) {
  check_factor(factor);
  const Shape& s = input_shape;
  const int64_t ho = s.h * factor;
  const int64_t wo = s.w * factor;
  require(grad_out.shape() == Shape{s.n, s.c, ho, wo},
          "upsample_backward: grad_out shape mismatch");
  BasicTensor<T> gx(s);
  if (mode == UpsampleMode::kNearest) {
    for (int64_t nc = 0; nc < s.n * s.c; ++nc) {
      const T* g = grad_out.ptr() + nc * ho * wo;
      T* x = gx.ptr() + nc * s.plane();
      for (int64_t oy = 0; oy < ho; ++oy) {
        T* xr = x + (oy / factor) * s.w;
        for (int64_t ox = 0; ox < wo; ++ox) xr[ox / factor] += g[oy * wo + ox];
      }
    }
  } else {
    const LerpTable ty = bilinear_table(s.h, factor);
    const LerpTable tx = bilinear_table(s.w, factor);
    for (int64_t nc = 0; nc < s.n * s.c; ++nc) {
      const T* g = grad_out.ptr() + nc * ho * wo;
      T* x = gx.ptr() + nc * s.plane();
      for (int64_t oy = 0; oy < ho; ++oy) {
        T* r0 = x + ty.lo[oy] * s.w;
        T* r1 = x + ty.hi[oy] * s.w;
        const T ly = static_cast<T>(ty.frac[oy]);
        for (int64_t ox = 0; ox < wo; ++ox) {
          const T lx = static_cast<T>(tx.frac[ox]);
          const int64_t a = tx.lo[ox];
          const int64_t b = tx.hi[ox];
          const T v = g[oy * wo + ox];
          const T top = v * (T{1} - ly);
          const T bot = v * ly;
          r0[a] += top * (T{1} - lx);
          r0[b] += top * lx;
          r1[a] += bot * (T{1} - lx);
          r1[b] += bot * lx;
        }
      }
    }
  }
  return gx;
}

namespace {
void check_pool(const Shape& s, int kh, int kw, int sh, int sw) {
  require(kh > 0 && kw > 0 && sh > 0 && sw > 0,
          "avg_pool: kernel and stride must be positive");
  require(kh <= s.h && kw <= s.w,
          "avg_pool: kernel " + std::to_string(kh) + "x" + std::to_string(kw) +
              " larger than input " + std::to_string(s.h) + "x" +
              std::to_string(s.w));
}
}  // namespace

template <typename T>
BasicTensor<T> avg_pool(const BasicTensor<T>& input, int kernel_h,
                        int kernel_w, int stride_h, int stride_w) {
  const Shape& s = input.shape();
  check_pool(s, kernel_h, kernel_w, stride_h, stride_w);
  const int64_t ho = (s.h - kernel_h) / stride_h + 1;
  const int64_t wo = (s.w - kernel_w) / stride_w + 1;
  BasicTensor<T> out({s.n, s.c, ho, wo});
  const T inv = T{1} / static_cast<T>(kernel_h * kernel_w);
  for (int64_t nc = 0; nc < s.n * s.c; ++nc) {
    const T* x = input.ptr() + nc * s.plane();
    T* o = out.ptr() + nc * ho * wo;
    for (int64_t oy = 0; oy < ho; ++oy) {
      for (int64_t ox = 0; ox < wo; ++ox) {
        T sum = 0;
        for (int ky = 0; ky < kernel_h; ++ky) {
          const T* xr = x + (oy * stride_h + ky) * s.w + ox * stride_w;
          for (int kx = 0; kx < kernel_w; ++kx) sum += xr[kx];
        }
        o[oy * wo + ox] = sum * inv;
      }
    }
  }
  check_kernel_output(out, "avg_pool");
  return out;
}

template <typename T>
BasicTensor<T> avg_pool_backward(const BasicTensor<T>& grad_out,
                                 const Shape& input_shape, int kernel_h,
                                 int kernel_w, int stride_h, int stride_w) {
  const Shape& s = input_shape;
  check_pool(s, kernel_h, kernel_w, stride_h, stride_w);
  const int64_t ho = (s.h - kernel_h) / stride_h + 1;
  const int64_t wo = (s.w - kernel_w) / stride_w + 1;
  require(grad_out.shape() == Shape{s.n, s.c, ho, wo},
          "avg_pool_backward: grad_out shape mismatch");
  BasicTensor<T> gx(s);
  const T inv = T{1} / static_cast<T>(kernel_h * kernel_w);
  for (int64_t nc = 0; nc < s.n * s.c; ++nc) {
    const T* g = grad_out.ptr() + nc * ho * wo;
    T* x = gx.ptr() + nc * s.plane();
    for (int64_t oy = 0; oy < ho; ++oy) {
      for (int64_t ox = 0; ox < wo; ++ox) {
        const T v = g[oy * wo + ox] * inv;
        for (int ky = 0; ky < kernel_h; ++ky) {
          T* xr = x + (oy * stride_h + ky) * s.w + ox * stride_w;
          for (int kx = 0; kx < kernel_w; ++kx) xr[kx] += v;
        }
      }
    }
  }
  return gx;
}

template <typename T>
BasicTensor<T> global_avg_pool(const BasicTensor<T>& input) {
  const Shape& s = input.shape();
  require(s.plane() >= 1, "global_avg_pool: empty spatial extent");
  BasicTensor<T> out({s.n, s.c, 1, 1});
  const T inv = T{1} / static_cast<T>(s.plane());
  for (int64_t nc = 0; nc < s.n * s.c; ++nc) {
    const T* x = input.ptr() + nc * s.plane();
    T sum = 0;
    for (int64_t i = 0; i < s.plane(); ++i) sum += x[i];
    out[nc] = sum * inv;
  }
  check_kernel_output(out, "global_avg_pool");
  return out;
}

template <typename T>
BasicTensor<T> global_avg_pool_backward(const BasicTensor<T>& grad_out,
                                        const Shape& input_shape) {
  const Shape& s = input_shape;
  require(grad_out.shape() == Shape{s.n, s.c, 1, 1},
          "global_avg_pool_backward: grad_out shape mismatch");
  BasicTensor<T> gx(s);
  const T inv = T{1} / static_cast<T>(s.plane());
  for (int64_t nc = 0; nc < s.n * s.c; ++nc) {
    T* x = gx.ptr() + nc * s.plane();
    const T v = grad_out[nc] * inv;
    for (int64_t i = 0; i < s.plane(); ++i) x[i] = v;
  }
  return gx;
}

template <typename T>
BasicTensor<T> linear(const BasicTensor<T>& input,
                      const BasicTensor<T>& weights, std::span<const T> bias) {
  const Shape& s = input.shape();
  const int64_t d = s.c * s.h * s.w;
  const int64_t dout = weights.shape().n;
  require(weights.shape() == Shape{dout, d, 1, 1},
          "linear: weight shape " + weights.shape().str() +
              " incompatible with input feature size " + std::to_string(d));
  require(bias.empty() || static_cast<int64_t>(bias.size()) == dout,
          "linear: bias length mismatch");
  BasicTensor<T> out({s.n, dout, 1, 1});
  for (int64_t n = 0; n < s.n; ++n) {
    const T* x = input.ptr() + n * d;
    for (int64_t o = 0; o < dout; ++o) {
      const T* w = weights.ptr() + o * d;
      T sum = bias.empty() ? T{0} : bias[o];
      for (int64_t i = 0; i < d; ++i) sum += w[i] * x[i];
      out[n * dout + o] = sum;
    }
  }
  check_kernel_output(out, "linear");
  return out;
}

template <typename T>
LinearGrads<T> linear_backward(const BasicTensor<T>& input,
                               const BasicTensor<T>& weights,
                               const BasicTensor<T>& grad_out) {
  const Shape& s = input.shape();
  const int64_t d = s.c * s.h * s.w;
  const int64_t dout = weights.shape().n;
  require(grad_out.shape() == Shape{s.n, dout, 1, 1},
          "linear_backward: grad_out shape mismatch");
  LinearGrads<T> g;
  g.input = BasicTensor<T>(s);
  g.weights = BasicTensor<T>(weights.shape());
  g.bias.assign(static_cast<size_t>(dout), T{0});
  for (int64_t n = 0; n < s.n; ++n) {
    const T* x = input.ptr() + n * d;
    T* gx = g.input.ptr() + n * d;
    for (int64_t o = 0; o < dout; ++o) {
      const T gv = grad_out[n * dout + o];
      const T* w = weights.ptr() + o * d;
      T* gw = g.weights.ptr() + o * d;
      g.bias[o] += gv;
      for (int64_t i = 0; i < d; ++i) {
        gw[i] += gv * x[i];
        gx[i] += gv * w[i];
      }
    }
  }
  return g;
}

template <typename T>
BasicTensor<T> add(std::span<const BasicTensor<T>* const> inputs) {
  require(!inputs.empty(), "add: no inputs");
  BasicTensor<T> out = *inputs[0];
  for (size_t i = 1; i < inputs.size(); ++i) {
    require(inputs[i]->shape() == out.shape(),
            "add: shape mismatch " + inputs[i]->shape().str() + " vs " +
                out.shape().str());
    const T* x = inputs[i]->ptr();
    T* o = out.ptr();
    for (int64_t j = 0; j < out.numel(); ++j) o[j] += x[j];
  }
  check_kernel_output(out, "add");
  return out;
}

template <typename T>
BasicTensor<T> concat_channels(std::span<const BasicTensor<T>* const> inputs) {
  require(!inputs.empty(), "concat: no inputs");
  const Shape& s0 = inputs[0]->shape();
  int64_t c = 0;
  for (const auto* t : inputs) {
    const Shape& s = t->shape();
    require(s.n == s0.n && s.h == s0.h && s.w == s0.w,
            "concat: spatial/batch mismatch " + s.str() + " vs " + s0.str());
    c += s.c;
  }
  BasicTensor<T> out({s0.n, c, s0.h, s0.w});
  const int64_t plane = s0.plane();
  for (int64_t n = 0; n < s0.n; ++n) {
    T* o = out.ptr() + n * c * plane;
    for (const auto* t : inputs) {
      const int64_t len = t->shape().c * plane;
      const T* x = t->ptr() + n * len;
      std::copy(x, x + len, o);
      o += len;
    }
  }
  return out;
}

template <typename T>
std::vector<BasicTensor<T>> split_channels(const BasicTensor<T>& t,
                                           std::span<const int64_t> channels) {
  const Shape& s = t.shape();
  int64_t total = 0;
  for (int64_t c : channels) total += c;
  require(total == s.c, "split_channels: channel counts do not sum to input");
  std::vector<BasicTensor<T>> parts;
  for (int64_t c : channels) parts.emplace_back(Shape{s.n, c, s.h, s.w});
  const int64_t plane = s.plane();
  for (int64_t n = 0; n < s.n; ++n) {
    const T* x = t.ptr() + n * s.c * plane;
    for (size_t i = 0; i < parts.size(); ++i) {
      const int64_t len = channels[i] * plane;
      std::copy(x, x + len, parts[i].ptr() + n * len);
      x += len;
    }
  }
  return parts;
}

template <typename T>
LossResult<T> softmax_cross_entropy(const BasicTensor<T>& logits,
                                    std::span<const int32_t> labels,
                                    int32_t ignore_index) {
  const Shape& s = logits.shape();
  const int64_t plane = s.plane();
  require(static_cast<int64_t>(labels.size()) == s.n * plane,
          "softmax_cross_entropy: label map size " +
              std::to_string(labels.size()) + " does not match logits " +
              s.str());
  LossResult<T> r;
  r.grad = BasicTensor<T>(s);
  for (int64_t i = 0; i < s.n * plane; ++i) {
    const int32_t l = labels[i];
    if (l == ignore_index) continue;
    require(l >= 0 && l < s.c, "softmax_cross_entropy: label " +
                                   std::to_string(l) + " out of range");
    ++r.count;
  }
  if (r.count == 0) {
    throw ConfigError("softmax_cross_entropy: all pixels ignored");
  }
  const T inv_count = T{1} / static_cast<T>(r.count);
  std::vector<T> z(static_cast<size_t>(s.c));
  T total = 0;
  for (int64_t n = 0; n < s.n; ++n) {
    const T* x = logits.ptr() + n * s.c * plane;
    T* g = r.grad.ptr() + n * s.c * plane;
    for (int64_t p = 0; p < plane; ++p) {
      const int32_t l = labels[n * plane + p];
      if (l == ignore_index) continue;
      T mx = -std::numeric_limits<T>::infinity();
      for (int64_t k = 0; k < s.c; ++k) mx = std::max(mx, x[k * plane + p]);
      T sum = 0;
      for (int64_t k = 0; k < s.c; ++k) {
        z[k] = std::exp(x[k * plane + p] - mx);
        sum += z[k];
      }
      total += std::log(sum) + mx - x[l * plane + p];
      for (int64_t k = 0; k < s.c; ++k) {
        g[k * plane + p] =
            (z[k] / sum - (k == l ? T{1} : T{0})) * inv_count;
      }
    }
  }
  r.loss = total * inv_count;
  if constexpr (kVerifyMode<T>) {
    require_finite<T>(std::span<const T>(&r.loss, 1), "softmax_cross_entropy");
  }
  return r;
}

template <typename T>
LossResult<T> mse_loss(const BasicTensor<T>& pred,
                       const BasicTensor<T>& target) {
  require(pred.shape() == target.shape(),
          "mse_loss: shape mismatch " + pred.shape().str() + " vs " +
              target.shape().str());
  require(pred.numel() > 0, "mse_loss: empty tensors");
  LossResult<T> r;
  r.count = pred.numel();
  r.grad = BasicTensor<T>(pred.shape());
  const T inv = T{1} / static_cast<T>(r.count);
  T sum = 0;
  for (int64_t i = 0; i < r.count; ++i) {
    const T d = pred[i] - target[i];
    sum += d * d;
    r.grad[i] = T{2} * d * inv;
  }
  r.loss = sum * inv;
  if constexpr (kVerifyMode<T>) {
    require_finite<T>(std::span<const T>(&r.loss, 1), "mse_loss");
  }
  return r;
}

#define HRFORGE_INSTANTIATE_KERNELS(T)                                        \
  template BasicTensor<T> conv2d(const BasicTensor<T>&, const ConvSpec&,      \
                                 const BasicTensor<T>&, std::span<const T>);  \
  template ConvGrads<T> conv2d_backward(const BasicTensor<T>&,                \
                                        const ConvSpec&,                      \
                                        const BasicTensor<T>&,                \
                                        const BasicTensor<T>&, bool);         \
  template struct BatchNormState<T>;                                          \
  template BasicTensor<T> batch_norm(const BasicTensor<T>&,                   \
                                     BatchNormState<T>&, BatchNormCache<T>*); \
  template BatchNormGrads<T> batch_norm_backward(                             \
      const BasicTensor<T>&, const BatchNormState<T>&,                        \
      const BatchNormCache<T>&, const BasicTensor<T>&);                       \
  template BasicTensor<T> relu(const BasicTensor<T>&);                        \
  template BasicTensor<T> relu_backward(const BasicTensor<T>&,                \
                                        const BasicTensor<T>&);               \
  template BasicTensor<T> upsample(const BasicTensor<T>&, int, UpsampleMode); \
  template BasicTensor<T> upsample_backward(const BasicTensor<T>&,            \
                                            const Shape&, int, UpsampleMode); \
  template BasicTensor<T> avg_pool(const BasicTensor<T>&, int, int, int,      \
                                   int);                                      \
  template BasicTensor<T> avg_pool_backward(const BasicTensor<T>&,            \
                                            const Shape&, int, int, int,      \
                                            int);                             \
  template BasicTensor<T> global_avg_pool(const BasicTensor<T>&);             \
  template BasicTensor<T> global_avg_pool_backward(const BasicTensor<T>&,     \
                                                   const Shape&);             \
  template BasicTensor<T> linear(const BasicTensor<T>&,                       \
                                 const BasicTensor<T>&, std::span<const T>);  \
  template LinearGrads<T> linear_backward(const BasicTensor<T>&,              \
                                          const BasicTensor<T>&,              \
                                          const BasicTensor<T>&);             \
  template BasicTensor<T> add(std::span<const BasicTensor<T>* const>);        \
  template BasicTensor<T> concat_channels(                                    \
      std::span<const BasicTensor<T>* const>);                                \
  template std::vector<BasicTensor<T>> split_channels(                        \
      const BasicTensor<T>&, std::span<const int64_t>);                       \
  template LossResult<T> softmax_cross_entropy(                               \
      const BasicTensor<T>&, std::span<const int32_t>, int32_t);              \
  template LossResult<T> mse_loss(const BasicTensor<T>&,                      \
                                  const BasicTensor<T>&);

HRFORGE_INSTANTIATE_KERNELS(float)
HRFORGE_INSTANTIATE_KERNELS(double)

#undef HRFORGE_INSTANTIATE_KERNELS

}  // namespace hrforge
