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

#ifndef HRFORGE_SYNTHETIC_HPP_
#define HRFORGE_SYNTHETIC_HPP_

// Synthetic datasets with exact ground truth.
//
//   segmentation   bright rectangles and disks on a darker background plus
//                  per-pixel noise; the mask is exact (label = shape class).
//   landmarks      one colour-coded blob per landmark at a known sub-pixel
//                  position on a noisy background.
//   classification a single rectangle (even classes) or disk (odd classes).
//
// On disk: image_NNNN.ppm, label_NNNN.pgm (segmentation), landmarks.txt
// ("index x0 y0 x1 y1 ..."), classes.txt ("index class") and manifest.txt.

#include <cstdint>
#include <string>
#include <vector>

#include "hrforge/image_io.hpp"
#include "hrforge/metrics.hpp"
#include "hrforge/run_config.hpp"

namespace hrforge {

struct Sample {
  Image image;
  std::vector<int32_t> labels;   // h*w, segmentation only
  std::vector<Point2> landmarks; // pixel coordinates, landmark task only
  int32_t class_id = -1;         // classification only
  bool operator==(const Sample&) const = default;
};

struct Dataset {
  Task task = Task::kSegmentation;
  int64_t classes = 0;  // segmentation/classification classes or landmarks
  std::vector<Sample> samples;
  bool operator==(const Dataset&) const = default;
};

// Deterministic in (task, n, size, classes, seed); sample i uses its own
// stream so it does not depend on n.
Dataset generate_synthetic(Task task, int64_t n, int64_t h, int64_t w,
                           int64_t classes, uint64_t seed);

void write_dataset(const std::string& dir, const Dataset& data);
Dataset read_dataset(const std::string& dir);

// Synthetic or directory data as selected by the run config.
Dataset load_dataset(const RunConfig& config);

}  // namespace hrforge

#endif  // HRFORGE_SYNTHETIC_HPP_
