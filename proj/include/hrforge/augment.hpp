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

#ifndef HRFORGE_AUGMENT_HPP_
#define HRFORGE_AUGMENT_HPP_

// Training-time geometric augmentation: horizontal flip, isotropic scale,
// in-plane rotation and a random crop window, composed into one affine map
// from source pixel centres to output pixel centres:
//
//   q = c_out + t + s * R(angle) * (F(p) - c_src)
//
// F mirrors x when flipping. Images are resampled bilinearly (zero outside),
// labels by nearest neighbour (ignore label outside).

#include <cstdint>
#include <span>
#include <vector>

#include "hrforge/metrics.hpp"
#include "hrforge/rng.hpp"
#include "hrforge/run_config.hpp"
#include "hrforge/synthetic.hpp"

namespace hrforge {

struct AugmentParams {
  bool flip = false;
  double scale = 1.0;
  double angle_deg = 0.0;
  double tx = 0.0;
  double ty = 0.0;

  bool is_identity() const {
    return !flip && scale == 1.0 && angle_deg == 0.0 && tx == 0.0 && ty == 0.0;
  }
};

// x' = a*x + b*y + c, y' = d*x + e*y + f
struct Affine {
  double a = 1, b = 0, c = 0, d = 0, e = 1, f = 0;
  Point2 apply(Point2 p) const { return {a * p.x + b * p.y + c, d * p.x + e * p.y + f}; }
  Affine inverse() const;
};

AugmentParams sample_augment(const AugmentConfig& config, bool rotate,
                             int64_t src_h, int64_t src_w, int64_t out_h,
                             int64_t out_w, Rng& rng);

Affine augment_transform(const AugmentParams& p, int64_t src_h, int64_t src_w,
                         int64_t out_h, int64_t out_w);

template <typename T>
struct AugmentedSample {
  std::vector<T> image;  // C x out_h x out_w, values in [0, 1]
  std::vector<int32_t> labels;
  std::vector<Point2> landmarks;
  int32_t class_id = -1;
};

template <typename T>
AugmentedSample<T> augment_sample(const Sample& sample, const AugmentParams& p,
                                  int64_t out_h, int64_t out_w,
                                  int32_t ignore_label = kIgnoreLabel);

}  // namespace hrforge

#endif  // HRFORGE_AUGMENT_HPP_
