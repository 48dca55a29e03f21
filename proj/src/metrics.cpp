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

#include "hrforge/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "hrforge/error.hpp"

namespace hrforge {

ConfusionMatrix::ConfusionMatrix(int64_t classes) : k(classes) {
  if (classes < 1) throw ConfigError("confusion matrix: K must be >= 1");
  counts.assign(classes * classes, 0);
}

int64_t ConfusionMatrix::total() const {
  return std::accumulate(counts.begin(), counts.end(), int64_t{0});
}

ConfusionMatrix& ConfusionMatrix::operator+=(const ConfusionMatrix& o) {
  if (o.k != k) throw ConfigError("confusion matrix: class counts differ");
  for (size_t i = 0; i < counts.size(); ++i) counts[i] += o.counts[i];
  return *this;
}

void accumulate_confusion(ConfusionMatrix& cm, std::span<const int32_t> pred,
                          std::span<const int32_t> gt, int32_t ignore_index) {
  if (pred.size() != gt.size()) {
    throw ConfigError("confusion: prediction and label sizes differ");
  }
  for (size_t i = 0; i < gt.size(); ++i) {
    if (gt[i] == ignore_index) continue;
    if (gt[i] < 0 || gt[i] >= cm.k || pred[i] < 0 || pred[i] >= cm.k) {
      throw ConfigError("confusion: label out of range at pixel " +
                        std::to_string(i));
    }
    ++cm.at(gt[i], pred[i]);
  }
}

ConfusionMatrix accumulate_confusion(std::span<const int32_t> pred,
                                     std::span<const int32_t> gt, int64_t k,
                                     int32_t ignore_index) {
  ConfusionMatrix cm(k);
  accumulate_confusion(cm, pred, gt, ignore_index);
  return cm;
}

SegmentationScores miou(const ConfusionMatrix& cm) {
  SegmentationScores s;
  s.per_class_iou.assign(cm.k, std::numeric_limits<double>::quiet_NaN());
  s.supported.assign(cm.k, false);
  int64_t trace = 0;
  int64_t total = 0;
  double iou_sum = 0;
  double recall_sum = 0;
  int64_t present = 0;
  for (int64_t c = 0; c < cm.k; ++c) {
    int64_t row = 0;
    int64_t col = 0;
    for (int64_t j = 0; j < cm.k; ++j) {
      row += cm.at(c, j);
      col += cm.at(j, c);
    }
    const int64_t tp = cm.at(c, c);
    trace += tp;
    total += row;
    if (row == 0) continue;
    s.supported[c] = true;
    ++present;
    s.per_class_iou[c] =
        static_cast<double>(tp) / static_cast<double>(row + col - tp);
    iou_sum += s.per_class_iou[c];
    recall_sum += static_cast<double>(tp) / static_cast<double>(row);
  }
  if (present == 0) {
    throw ConfigError("miou: every class has zero support");
  }
  s.miou = iou_sum / static_cast<double>(present);
  s.mean_acc = recall_sum / static_cast<double>(present);
  s.pixel_acc = static_cast<double>(trace) / static_cast<double>(total);
  return s;
}

template <typename T>
std::vector<int32_t> argmax_labels(const BasicTensor<T>& logits) {
  const Shape s = logits.shape();
  std::vector<int32_t> out(s.n * s.plane(), 0);
  for (int64_t n = 0; n < s.n; ++n) {
    const T* base = logits.ptr() + n * s.c * s.plane();
    for (int64_t i = 0; i < s.plane(); ++i) {
      int32_t best = 0;
      for (int64_t c = 1; c < s.c; ++c) {
        if (base[c * s.plane() + i] > base[best * s.plane() + i]) {
          best = static_cast<int32_t>(c);
        }
      }
      out[n * s.plane() + i] = best;
    }
  }
  return out;
}

template <typename T>
DecodedKeypoints decode_heatmap(std::span<const T> heatmaps, int64_t landmarks,
                                int64_t h, int64_t w,
                                const DecodeOptions& options) {
  if (h < 2 || w < 2) throw ConfigError("decode_heatmap: map must be >= 2x2");
  if (static_cast<int64_t>(heatmaps.size()) != landmarks * h * w) {
    throw ConfigError("decode_heatmap: buffer holds " +
                      std::to_string(heatmaps.size()) + " values, expected " +
                      std::to_string(landmarks * h * w));
  }
  DecodedKeypoints d;
  d.heatmap_h = h;
  d.heatmap_w = w;
  static constexpr int kDx[4] = {0, -1, 1, 0};
  static constexpr int kDy[4] = {-1, 0, 0, 1};
  for (int64_t l = 0; l < landmarks; ++l) {
    const T* m = heatmaps.data() + l * h * w;
    int64_t best = 0;
    bool tie = false;
    for (int64_t i = 1; i < h * w; ++i) {
      if (m[i] > m[best]) {
        best = i;
        tie = false;
      } else if (m[i] == m[best]) {
        tie = true;
      }
    }
    const int64_t px = best % w;
    const int64_t py = best / w;
    int dir = -1;
    for (int k = 0; k < 4; ++k) {
      const int64_t x = px + kDx[k];
      const int64_t y = py + kDy[k];
      if (x < 0 || x >= w || y < 0 || y >= h) continue;
      if (dir < 0 || m[y * w + x] > m[(py + kDy[dir]) * w + px + kDx[dir]]) {
        dir = k;
      }
    }
    const Point2 cell{static_cast<double>(px) + 0.25 * kDx[dir],
                      static_cast<double>(py) + 0.25 * kDy[dir]};
    d.cells.push_back(cell);
    d.coords.push_back({options.scale * cell.x + options.shift,
                        options.scale * cell.y + options.shift});
    d.ambiguous.push_back(tie);
  }
  return d;
}

double nme(std::span<const Point2> pred, std::span<const Point2> gt,
           double normalizer) {
  if (!(normalizer > 0)) throw ConfigError("nme: normalizer must be positive");
  if (pred.size() != gt.size() || pred.empty()) {
    throw ConfigError("nme: landmark counts differ or are zero");
  }
  double sum = 0;
  for (size_t i = 0; i < pred.size(); ++i) {
    sum += std::hypot(pred[i].x - gt[i].x, pred[i].y - gt[i].y);
  }
  return sum / static_cast<double>(pred.size()) / normalizer;
}

AucFr auc_fr(std::span<const double> errors, double alpha) {
  if (errors.empty()) throw ConfigError("auc_fr: empty error list");
  if (!(alpha > 0)) throw ConfigError("auc_fr: threshold must be positive");
  std::vector<double> e(errors.begin(), errors.end());
  std::sort(e.begin(), e.end());
  const double n = static_cast<double>(e.size());
  double area = 0;
  double x0 = 0;
  double y0 = 0;
  size_t i = 0;
  for (; i < e.size() && e[i] <= alpha; ++i) {
    const double y1 = static_cast<double>(i + 1) / n;
    area += (e[i] - x0) * (y0 + y1) / 2;
    x0 = e[i];
    y0 = y1;
  }
  area += (alpha - x0) * y0;
  AucFr r;
  r.auc = area / alpha;
  r.fr = static_cast<double>(e.size() - i) / n;
  return r;
}

template <typename T>
BasicTensor<T> gaussian_target(std::span<const Point2> cells, int64_t h,
                               int64_t w, double sigma,
                               std::vector<bool>* outside) {
  if (!(sigma > 0)) throw ConfigError("gaussian_target: sigma must be positive");
  const int64_t L = static_cast<int64_t>(cells.size());
  BasicTensor<T> out(Shape{1, L, h, w});
  if (outside) outside->assign(L, false);
  const double radius = 3 * sigma;
  const double denom = 2 * sigma * sigma;
  for (int64_t l = 0; l < L; ++l) {
    const Point2 c = cells[l];
    if (!(c.x >= 0 && c.x <= w - 1 && c.y >= 0 && c.y <= h - 1)) {
      if (outside) (*outside)[l] = true;
      continue;
    }
    const double nx = std::round(c.x) - c.x;
    const double ny = std::round(c.y) - c.y;
    const double d0 = nx * nx + ny * ny;
    T* plane = out.ptr() + l * h * w;
    const int64_t y_lo = std::max<int64_t>(0, std::ceil(c.y - radius));
    const int64_t y_hi = std::min<int64_t>(h - 1, std::floor(c.y + radius));
    const int64_t x_lo = std::max<int64_t>(0, std::ceil(c.x - radius));
    const int64_t x_hi = std::min<int64_t>(w - 1, std::floor(c.x + radius));
    for (int64_t y = y_lo; y <= y_hi; ++y) {
      for (int64_t x = x_lo; x <= x_hi; ++x) {
        const double dx = static_cast<double>(x) - c.x;
        const double dy = static_cast<double>(y) - c.y;
        const double d2 = dx * dx + dy * dy;
        if (d2 > radius * radius) continue;
        plane[y * w + x] = static_cast<T>(std::exp(-(d2 - d0) / denom));
      }
    }
  }
  return out;
}

#define HRFORGE_INSTANTIATE(T)                                               \
  template std::vector<int32_t> argmax_labels<T>(const BasicTensor<T>&);     \
  template DecodedKeypoints decode_heatmap<T>(std::span<const T>, int64_t,   \
                                              int64_t, int64_t,              \
                                              const DecodeOptions&);         \
  template BasicTensor<T> gaussian_target<T>(std::span<const Point2>,        \
                                             int64_t, int64_t, double,       \
                                             std::vector<bool>*);

HRFORGE_INSTANTIATE(float)
HRFORGE_INSTANTIATE(double)
#undef HRFORGE_INSTANTIATE

}  // namespace hrforge
