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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "hrforge/error.hpp"
#include "hrforge/metrics.hpp"
#include "oracles.hpp"

namespace hrforge {
namespace {

TEST(Confusion, HandEnumerated) {
  const std::vector<int32_t> pred{0, 0, 1, 1, 2, 1};
  const std::vector<int32_t> gt{0, 1, 1, 1, 255, 2};
  const ConfusionMatrix cm = accumulate_confusion(pred, gt, 3);
  EXPECT_EQ(cm.total(), 5);
  EXPECT_EQ(cm.at(0, 0), 1);
  EXPECT_EQ(cm.at(1, 0), 1);
  EXPECT_EQ(cm.at(1, 1), 2);
  EXPECT_EQ(cm.at(2, 1), 1);
  EXPECT_EQ(cm.at(2, 2), 0);
}

TEST(Confusion, RejectsOutOfRangeLabels) {
  const std::vector<int32_t> pred{0, 3};
  const std::vector<int32_t> gt{0, 1};
  EXPECT_THROW(accumulate_confusion(pred, gt, 3), ConfigError);
  const std::vector<int32_t> gt_bad{0, 7};
  EXPECT_THROW(accumulate_confusion(std::vector<int32_t>{0, 0}, gt_bad, 3),
               ConfigError);
}

TEST(Miou, HandEnumerated) {
  // IoU0 = 1/(1+1) = 0.5, IoU1 = 2/(3+2-2) = 2/3.
  const ConfusionMatrix cm = accumulate_confusion(
      std::vector<int32_t>{0, 0, 1, 1}, std::vector<int32_t>{0, 1, 1, 1}, 2);
  const SegmentationScores s = miou(cm);
  EXPECT_NEAR(s.per_class_iou[0], 0.5, 1e-15);
  EXPECT_NEAR(s.per_class_iou[1], 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(s.miou, 7.0 / 12.0, 1e-15);
  EXPECT_NEAR(s.pixel_acc, 0.75, 1e-15);
  EXPECT_NEAR(s.mean_acc, (1.0 + 2.0 / 3.0) / 2, 1e-15);
}

TEST(Miou, HalfOverlap) {
  // Each class: 2 of 4 pixels right, one false positive, one false negative.
  const ConfusionMatrix cm = accumulate_confusion(
      std::vector<int32_t>{0, 0, 1, 1, 0, 1}, std::vector<int32_t>{0, 0, 1, 1, 1, 0},
      2);
  EXPECT_NEAR(miou(cm).miou, 0.5, 1e-15);
}

TEST(Miou, PerfectAndUnsupportedClasses) {
  const std::vector<int32_t> labels{0, 2, 2, 0};
  const SegmentationScores s = miou(accumulate_confusion(labels, labels, 3));
  EXPECT_DOUBLE_EQ(s.miou, 1.0);
  EXPECT_FALSE(s.supported[1]);
  EXPECT_TRUE(std::isnan(s.per_class_iou[1]));
  EXPECT_THROW(miou(ConfusionMatrix(3)), ConfigError);
}

TEST(Miou, InvariantUnderClassPermutation) {
  std::mt19937_64 rng(5);
  std::vector<int32_t> pred(500), gt(500);
  for (size_t i = 0; i < pred.size(); ++i) {
    pred[i] = static_cast<int32_t>(rng() % 4);
    gt[i] = static_cast<int32_t>(rng() % 4);
  }
  const std::vector<int32_t> perm{2, 0, 3, 1};
  std::vector<int32_t> pp(pred.size()), pg(gt.size());
  for (size_t i = 0; i < pred.size(); ++i) {
    pp[i] = perm[pred[i]];
    pg[i] = perm[gt[i]];
  }
  EXPECT_NEAR(miou(accumulate_confusion(pred, gt, 4)).miou,
              miou(accumulate_confusion(pp, pg, 4)).miou, 1e-15);
}

TEST(Miou, RandomPredictionMonteCarlo) {
  // Independent balanced binary labels: IoU = 0.25 / 0.75 per class.
  std::mt19937_64 rng(11);
  std::vector<int32_t> pred(200000), gt(200000);
  for (size_t i = 0; i < pred.size(); ++i) {
    pred[i] = static_cast<int32_t>(rng() & 1);
    gt[i] = static_cast<int32_t>((rng() >> 7) & 1);
  }
  EXPECT_NEAR(miou(accumulate_confusion(pred, gt, 2)).miou, 1.0 / 3.0, 0.01);
}

TEST(Argmax, FirstMaximumWins) {
  Tensor logits(Shape{1, 3, 1, 2});
  logits.at(0, 0, 0, 0) = 1;
  logits.at(0, 1, 0, 0) = 2;
  logits.at(0, 2, 0, 0) = 2;
  logits.at(0, 2, 0, 1) = -1;
  const std::vector<int32_t> l = argmax_labels(logits);
  EXPECT_EQ(l, (std::vector<int32_t>{1, 0}));
}

TEST(Decoder, MatchesBruteForceOracle) {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 1000; ++trial) {
    const int64_t h = 2 + static_cast<int64_t>(rng() % 8);
    const int64_t w = 2 + static_cast<int64_t>(rng() % 8);
    std::vector<double> m(static_cast<size_t>(h * w));
    // Small integer range so ties are common.
    const bool coarse = trial % 2 == 0;
    std::uniform_real_distribution<double> u(-1, 1);
    for (double& v : m) v = coarse ? static_cast<double>(rng() % 4) : u(rng);
    const DecodeOptions opts{4.0, 1.5};
    const DecodedKeypoints d = decode_heatmap<double>(m, 1, h, w, opts);
    const oracle::BruteDecode o = oracle::brute_force_decode<double>(m, h, w);
    ASSERT_EQ(d.cells[0], o.cell) << "trial " << trial;
    ASSERT_EQ(d.ambiguous[0], o.ambiguous) << "trial " << trial;
    ASSERT_EQ(d.coords[0].x, 4.0 * o.cell.x + 1.5);
    ASSERT_EQ(d.coords[0].y, 4.0 * o.cell.y + 1.5);
  }
}

TEST(Decoder, PlanesAreIndependent) {
  std::vector<float> m(2 * 3 * 3, 0.f);
  m[4] = 1.f;           // plane 0, centre
  m[5] = 0.5f;          // plane 0, right neighbour
  m[9 + 0] = 1.f;       // plane 1, top-left
  m[9 + 3] = 0.25f;     // plane 1, below
  const DecodedKeypoints d = decode_heatmap<float>(m, 2, 3, 3);
  EXPECT_EQ(d.cells[0], (Point2{1.25, 1.0}));
  EXPECT_EQ(d.cells[1], (Point2{0.0, 0.25}));
  EXPECT_EQ(d.coords[1], (Point2{0.0, 1.0}));
}

TEST(Decoder, RejectsDegenerateMaps) {
  std::vector<double> m(3, 0.0);
  EXPECT_THROW(decode_heatmap<double>(m, 1, 1, 3), ConfigError);
}

TEST(Gaussian, PeakAndSupport) {
  const std::vector<Point2> c{{5.3, 4.6}};
  const Tensor t = gaussian_target<double>(c, 12, 12, 1.5);
  EXPECT_EQ(t.shape(), (Shape{1, 1, 12, 12}));
  EXPECT_DOUBLE_EQ(t.at(0, 0, 5, 5), 1.0);
  double maxv = 0;
  for (double v : t.data()) maxv = std::max(maxv, v);
  EXPECT_DOUBLE_EQ(maxv, 1.0);
  EXPECT_EQ(t.at(0, 0, 0, 11), 0.0);  // beyond 3 sigma
  // Cell (x 6, y 5) from the closed form; the peak cell is (5, 5).
  const double d2 = 0.7 * 0.7 + 0.4 * 0.4, d02 = 0.3 * 0.3 + 0.4 * 0.4;
  EXPECT_NEAR(t.at(0, 0, 5, 6), std::exp(-(d2 - d02) / (2 * 1.5 * 1.5)), 1e-14);
}

TEST(Gaussian, OutsideLandmarkIsFlagged) {
  const std::vector<Point2> c{{-0.6, 3.0}, {3.0, 3.0}};
  std::vector<bool> outside;
  const Tensor t = gaussian_target<double>(c, 8, 8, 1.5, &outside);
  EXPECT_EQ(outside, (std::vector<bool>{true, false}));
  for (int64_t y = 0; y < 8; ++y)
    for (int64_t x = 0; x < 8; ++x) EXPECT_EQ(t.at(0, 0, y, x), 0.0);
}

TEST(Gaussian, RoundTripWithinHalfCell) {
  // Interior grid at 0.05-cell pitch; the decoder moves one axis by a
  // quarter cell, so each axis stays within half a cell.
  const int64_t h = 16, w = 16;
  double worst = 0;
  for (double y = 2.0; y <= 13.0 + 1e-9; y += 0.05) {
    std::vector<Point2> row;
    for (double x = 2.0; x <= 13.0 + 1e-9; x += 0.05) row.push_back({x, y});
    const Tensor t = gaussian_target<double>(row, h, w);
    const DecodedKeypoints d = decode_heatmap<double>(
        t.data(), static_cast<int64_t>(row.size()), h, w);
    for (size_t i = 0; i < row.size(); ++i) {
      worst = std::max({worst, std::abs(d.cells[i].x - row[i].x),
                        std::abs(d.cells[i].y - row[i].y)});
    }
  }
  EXPECT_LE(worst, 0.5);
}

TEST(Nme, HandComputed) {
  const std::vector<Point2> gt{{10, 10}, {20, 20}};
  const std::vector<Point2> pred{{13, 14}, {20, 20}};
  EXPECT_NEAR(nme(pred, gt, 50.0), 0.05, 1e-15);
  EXPECT_THROW(nme(pred, gt, 0.0), ConfigError);
}

TEST(Nme, InvariantUnderSimilarity) {
  // Rotating, translating and scaling both point sets and the normalizer
  // leaves NME unchanged.
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0, 100);
  std::vector<Point2> a(10), b(10), ta(10), tb(10);
  const double th = 0.7, s = 2.5, tx = -3, ty = 8;
  auto tf = [&](Point2 p) {
    return Point2{s * (std::cos(th) * p.x - std::sin(th) * p.y) + tx,
                  s * (std::sin(th) * p.x + std::cos(th) * p.y) + ty};
  };
  for (int i = 0; i < 10; ++i) {
    a[i] = {u(rng), u(rng)};
    b[i] = {u(rng), u(rng)};
    ta[i] = tf(a[i]);
    tb[i] = tf(b[i]);
  }
  EXPECT_NEAR(nme(a, b, 40.0), nme(ta, tb, 40.0 * s), 1e-12);
}

TEST(AucFr, TrivialCases) {
  const std::vector<double> zeros(10, 0.0);
  AucFr r = auc_fr(zeros, 0.1);
  EXPECT_DOUBLE_EQ(r.auc, 1.0);
  EXPECT_DOUBLE_EQ(r.fr, 0.0);
  const std::vector<double> big(10, 0.5);
  r = auc_fr(big, 0.1);
  EXPECT_DOUBLE_EQ(r.auc, 0.0);
  EXPECT_DOUBLE_EQ(r.fr, 1.0);
  EXPECT_THROW(auc_fr(big, 0.0), ConfigError);
}

TEST(AucFr, HandComputed) {
  // Curve through (0,0) (0.02,1/3) (0.05,2/3) (0.1,2/3).
  const std::vector<double> e{0.05, 0.2, 0.02};
  const AucFr r = auc_fr(e, 0.1);
  const double area = 0.02 * (1.0 / 3) / 2 + 0.03 * (1.0 / 3 + 2.0 / 3) / 2 +
                      0.05 * (2.0 / 3);
  EXPECT_NEAR(r.auc, area / 0.1, 1e-14);
  EXPECT_NEAR(r.fr, 1.0 / 3, 1e-15);
}

TEST(AucFr, UniformSampleMonteCarlo) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0, 0.1);
  std::vector<double> e(10000);
  for (double& v : e) v = u(rng);
  const AucFr r = auc_fr(e, 0.1);
  EXPECT_NEAR(r.auc, 0.5, 0.01);
  EXPECT_DOUBLE_EQ(r.fr, 0.0);
}

TEST(AucFr, FailureRateNonIncreasingInAlpha) {
  std::mt19937_64 rng(23);
  std::exponential_distribution<double> ex(20.0);
  std::vector<double> e(500);
  for (double& v : e) v = ex(rng);
  double prev_fr = 1.0;
  for (double a = 0.01; a <= 0.3; a += 0.01) {
    const AucFr r = auc_fr(e, a);
    EXPECT_LE(r.fr, prev_fr);
    EXPECT_GE(r.auc, 0.0);
    EXPECT_LE(r.auc, 1.0);
    prev_fr = r.fr;
  }
}

}  // namespace
}  // namespace hrforge
