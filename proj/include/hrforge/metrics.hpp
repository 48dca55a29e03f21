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

#ifndef HRFORGE_METRICS_HPP_
#define HRFORGE_METRICS_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include "hrforge/tensor.hpp"

namespace hrforge {

inline constexpr int32_t kIgnoreLabel = 255;

// K x K pixel counts, rows = ground truth, columns = prediction.
struct ConfusionMatrix {
  int64_t k = 0;
  std::vector<int64_t> counts;

  ConfusionMatrix() = default;
  explicit ConfusionMatrix(int64_t classes);

  int64_t& at(int64_t gt, int64_t pred) { return counts[gt * k + pred]; }
  int64_t at(int64_t gt, int64_t pred) const { return counts[gt * k + pred]; }
  int64_t total() const;
  ConfusionMatrix& operator+=(const ConfusionMatrix& o);
  bool operator==(const ConfusionMatrix&) const = default;
};

// Pixels whose ground truth equals ignore_index are skipped. Any other label
// outside [0, K) throws ConfigError.
void accumulate_confusion(ConfusionMatrix& cm, std::span<const int32_t> pred,
                          std::span<const int32_t> gt,
                          int32_t ignore_index = kIgnoreLabel);
ConfusionMatrix accumulate_confusion(std::span<const int32_t> pred,
                                     std::span<const int32_t> gt, int64_t k,
                                     int32_t ignore_index = kIgnoreLabel);

struct SegmentationScores {
  double miou = 0;
  std::vector<double> per_class_iou;  // NaN for classes without support
  std::vector<bool> supported;
  double pixel_acc = 0;
  double mean_acc = 0;
};

// Classes with no ground-truth pixels are left out of both means.
SegmentationScores miou(const ConfusionMatrix& cm);

// Per-pixel argmax over channels of (n, K, h, w) logits.
template <typename T>
std::vector<int32_t> argmax_labels(const BasicTensor<T>& logits);

struct Point2 {
  double x = 0;
  double y = 0;
  bool operator==(const Point2&) const = default;
};

struct DecodeOptions {
  double scale = 4.0;  // heatmap cell -> image pixel
  double shift = 0.0;  // added after scaling
};

struct DecodedKeypoints {
  std::vector<Point2> coords;   // image pixels
  std::vector<Point2> cells;    // heatmap cells, offset applied
  std::vector<bool> ambiguous;  // argmax not unique
  int64_t heatmap_h = 0;
  int64_t heatmap_w = 0;
  double normalizer = 1.0;
};

// Heatmaps are L planes of h x w (h, w >= 2). Per plane: p = first argmax in
// row-major order; q = largest in-bounds 4-neighbour of p scanned as up,
// left, right, down (first wins ties); cell = p + 0.25*(q - p);
// coord = scale*cell + shift.
template <typename T>
DecodedKeypoints decode_heatmap(std::span<const T> heatmaps, int64_t landmarks,
                                int64_t h, int64_t w,
                                const DecodeOptions& options = {});

// Mean Euclidean distance over landmarks divided by normalizer.
double nme(std::span<const Point2> pred, std::span<const Point2> gt,
           double normalizer);

struct AucFr {
  double auc = 0;
  double fr = 0;
};

// FR = fraction of errors > alpha. AUC = trapezoidal area under the
// empirical CDF through (0,0), (e_i, i/n) for sorted e_i <= alpha, and
// (alpha, F(alpha)), divided by alpha.
AucFr auc_fr(std::span<const double> errors, double alpha);

inline constexpr double kDefaultSigma = 1.5;

// One (h, w) plane per landmark in an (1, L, h, w) tensor, coords in cells.
// Values are exp(-(d^2 - d0^2) / (2 sigma^2)) where d0 is the distance to the
// nearest cell, so that cell holds exactly 1; zero beyond 3 sigma. A
// landmark outside [0, w-1] x [0, h-1] gets a zero plane and is flagged.
template <typename T>
BasicTensor<T> gaussian_target(std::span<const Point2> cells, int64_t h,
                               int64_t w, double sigma = kDefaultSigma,
                               std::vector<bool>* outside = nullptr);

}  // namespace hrforge

#endif  // HRFORGE_METRICS_HPP_
