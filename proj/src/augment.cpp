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

#include "hrforge/augment.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "hrforge/error.hpp"

namespace hrforge {

Affine Affine::inverse() const {
  const double det = a * e - b * d;
  if (det == 0) throw NumericalError("augment: singular transform");
  Affine r;
  r.a = e / det;
  r.b = -b / det;
  r.d = -d / det;
  r.e = a / det;
  r.c = -(r.a * c + r.b * f);
  r.f = -(r.d * c + r.e * f);
  return r;
}

AugmentParams sample_augment(const AugmentConfig& config, bool rotate,
                             int64_t src_h, int64_t src_w, int64_t out_h,
                             int64_t out_w, Rng& rng) {
  AugmentParams p;
  p.flip = rng.bernoulli(config.flip_prob);
  if (config.scale_max > config.scale_min) {
    p.scale = rng.uniform(config.scale_min, config.scale_max);
  } else {
    p.scale = config.scale_min;
  }
  if (rotate && config.rotation_deg > 0) {
    p.angle_deg = rng.uniform(-config.rotation_deg, config.rotation_deg);
  }
  const double slack_x =
      std::max(0.0, (p.scale * static_cast<double>(src_w) - out_w) / 2);
  const double slack_y =
      std::max(0.0, (p.scale * static_cast<double>(src_h) - out_h) / 2);
  if (slack_x > 0) p.tx = rng.uniform(-slack_x, slack_x);
  if (slack_y > 0) p.ty = rng.uniform(-slack_y, slack_y);
  return p;
}

Affine augment_transform(const AugmentParams& p, int64_t src_h, int64_t src_w,
                         int64_t out_h, int64_t out_w) {
  const double csx = (src_w - 1) / 2.0;
  const double csy = (src_h - 1) / 2.0;
  const double cox = (out_w - 1) / 2.0;
  const double coy = (out_h - 1) / 2.0;
  const double th = p.angle_deg * std::numbers::pi / 180.0;
  const double cs = p.scale * std::cos(th);
  const double sn = p.scale * std::sin(th);
  // F(p) - c_src = (fx * (x - csx), y - csy) with fx = -1 when flipping.
  const double fx = p.flip ? -1.0 : 1.0;
  Affine m;
  m.a = cs * fx;
  m.b = -sn;
  m.d = sn * fx;
  m.e = cs;
  m.c = cox + p.tx - (m.a * csx + m.b * csy);
  m.f = coy + p.ty - (m.d * csx + m.e * csy);
  return m;
}

template <typename T>
AugmentedSample<T> augment_sample(const Sample& sample, const AugmentParams& p,
                                  int64_t out_h, int64_t out_w,
                                  int32_t ignore_label) {
  const Image& img = sample.image;
  const int64_t C = img.channels;
  AugmentedSample<T> out;
  out.class_id = sample.class_id;
  out.image.assign(C * out_h * out_w, T{0});
  const bool has_labels = !sample.labels.empty();
  if (has_labels) out.labels.assign(out_h * out_w, ignore_label);

  if (p.is_identity() && out_h == img.h && out_w == img.w) {
    for (int64_t c = 0; c < C; ++c) {
      for (int64_t i = 0; i < out_h * out_w; ++i) {
        out.image[c * out_h * out_w + i] =
            static_cast<T>(img.pixels[i * C + c] / 255.0);
      }
    }
    out.labels = sample.labels;
    out.landmarks = sample.landmarks;
    return out;
  }

  const Affine fwd = augment_transform(p, img.h, img.w, out_h, out_w);
  const Affine inv = fwd.inverse();
  for (int64_t y = 0; y < out_h; ++y) {
    for (int64_t x = 0; x < out_w; ++x) {
      const Point2 s =
          inv.apply({static_cast<double>(x), static_cast<double>(y)});
      if (has_labels) {
        const int64_t nx = std::lround(s.x);
        const int64_t ny = std::lround(s.y);
        if (nx >= 0 && nx < img.w && ny >= 0 && ny < img.h) {
          out.labels[y * out_w + x] = sample.labels[ny * img.w + nx];
        }
      }
      if (s.x < 0 || s.y < 0 || s.x > img.w - 1 || s.y > img.h - 1) continue;
      const int64_t x0 = static_cast<int64_t>(std::floor(s.x));
      const int64_t y0 = static_cast<int64_t>(std::floor(s.y));
      const int64_t x1 = std::min(x0 + 1, img.w - 1);
      const int64_t y1 = std::min(y0 + 1, img.h - 1);
      const double lx = s.x - x0;
      const double ly = s.y - y0;
      for (int64_t c = 0; c < C; ++c) {
        const double v00 = img.at(y0, x0, c);
        const double v01 = img.at(y0, x1, c);
        const double v10 = img.at(y1, x0, c);
        const double v11 = img.at(y1, x1, c);
        const double top = v00 + lx * (v01 - v00);
        const double bot = v10 + lx * (v11 - v10);
        out.image[(c * out_h + y) * out_w + x] =
            static_cast<T>((top + ly * (bot - top)) / 255.0);
      }
    }
  }
  for (const Point2& q : sample.landmarks) out.landmarks.push_back(fwd.apply(q));
  return out;
}

template AugmentedSample<float> augment_sample<float>(const Sample&,
                                                      const AugmentParams&,
                                                      int64_t, int64_t, int32_t);
template AugmentedSample<double> augment_sample<double>(const Sample&,
                                                        const AugmentParams&,
                                                        int64_t, int64_t,
                                                        int32_t);

}  // namespace hrforge
