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

#include "hrforge/synthetic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "hrforge/error.hpp"
#include "hrforge/rng.hpp"

namespace hrforge {

namespace {

constexpr double kNoise = 0.2;

uint8_t to_byte(double v) {
  return static_cast<uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

// Per-channel gain pattern for a class or landmark id; never all zero.
std::array<double, 3> palette(int64_t id) {
  static constexpr double kP[7][3] = {{1, 1, 1}, {1, 0.2, 0.2}, {0.2, 1, 0.2},
                                      {0.2, 0.2, 1}, {1, 1, 0.2}, {0.2, 1, 1},
                                      {1, 0.2, 1}};
  const auto& p = kP[id % 7];
  return {p[0], p[1], p[2]};
}

struct Shape2 {
  bool disk = false;
  double cx = 0, cy = 0, rx = 0, ry = 0;

  bool contains(double x, double y) const {
    if (disk) {
      const double dx = x - cx;
      const double dy = y - cy;
      return dx * dx + dy * dy <= rx * rx;
    }
    return std::abs(x - cx) <= rx && std::abs(y - cy) <= ry;
  }
};

Shape2 random_shape(Rng& rng, int64_t h, int64_t w, bool disk) {
  Shape2 s;
  s.disk = disk;
  const double m = static_cast<double>(std::min(h, w));
  s.rx = rng.uniform(0.24, 0.40) * m * (disk ? 1.2 : 1.0);
  s.ry = disk ? s.rx : rng.uniform(0.24, 0.40) * m;
  s.cx = rng.uniform(0.25, 0.75) * static_cast<double>(w - 1);
  s.cy = rng.uniform(0.25, 0.75) * static_cast<double>(h - 1);
  return s;
}

Image blank_canvas(Rng& rng, int64_t h, int64_t w, double lo, double hi,
                       std::vector<double>& base) {
  Image img{h, w, 3, std::vector<uint8_t>(h * w * 3)};
  base.assign(3, 0);
  for (double& b : base) b = rng.uniform(lo, hi);
  return img;
}

Sample segmentation_sample(Rng& rng, int64_t h, int64_t w, int64_t classes) {
  Sample s;
  std::vector<double> bg;
  s.image = blank_canvas(rng, h, w, 0.15, 0.45, bg);
  s.labels.assign(h * w, 0);
  const int64_t count = rng.integer(1, 3);
  std::vector<std::pair<Shape2, int32_t>> shapes;
  std::vector<std::array<double, 3>> colors;
  for (int64_t i = 0; i < count; ++i) {
    const int32_t cls = static_cast<int32_t>(rng.integer(1, classes - 1));
    const bool disk = i == 0 || rng.bernoulli(0.5);
    shapes.push_back({random_shape(rng, h, w, disk), cls});
    const auto p = palette(cls - 1);
    const double level = rng.uniform(0.55, 0.85);
    colors.push_back({level * p[0] + (1 - p[0]) * bg[0],
                      level * p[1] + (1 - p[1]) * bg[1],
                      level * p[2] + (1 - p[2]) * bg[2]});
  }
  for (int64_t y = 0; y < h; ++y) {
    for (int64_t x = 0; x < w; ++x) {
      // Shape 0 is always a disk and is painted last.
      int64_t top = -1;
      for (int64_t i = count - 1; i >= 0; --i) {
        if (shapes[i].first.contains(static_cast<double>(x),
                                     static_cast<double>(y))) {
          top = i;
        }
      }
      // Rectangles share the disks' appearance but stay background, so a
      // pixel's label depends on the outline around it.
      if (top >= 0 && shapes[top].first.disk) {
        s.labels[y * w + x] = shapes[top].second;
      }
      for (int64_t c = 0; c < 3; ++c) {
        const double base = top >= 0 ? colors[top][c] : bg[c];
        s.image.at(y, x, c) = to_byte(base + rng.normal(0, kNoise));
      }
    }
  }
  return s;
}

Sample landmark_sample(Rng& rng, int64_t h, int64_t w, int64_t landmarks) {
  Sample s;
  std::vector<double> bg;
  s.image = blank_canvas(rng, h, w, 0.05, 0.2, bg);
  const double margin = 0.12 * static_cast<double>(std::min(h, w));
  const double min_sep = 0.1 * static_cast<double>(std::min(h, w));
  for (int64_t l = 0; l < landmarks; ++l) {
    Point2 p;
    for (int attempt = 0; attempt < 1000; ++attempt) {
      p = {rng.uniform(margin, static_cast<double>(w - 1) - margin),
           rng.uniform(margin, static_cast<double>(h - 1) - margin)};
      bool ok = true;
      for (const Point2& q : s.landmarks) {
        if (std::hypot(p.x - q.x, p.y - q.y) < min_sep) ok = false;
      }
      if (ok) break;
    }
    s.landmarks.push_back(p);
  }
  // Solid anti-aliased disks in saturated colours; the soft rim keeps the
  // sub-pixel centre recoverable.
  const double kRadius = 2.5;
  for (int64_t y = 0; y < h; ++y) {
    for (int64_t x = 0; x < w; ++x) {
      double v[3] = {bg[0], bg[1], bg[2]};
      for (int64_t l = 0; l < landmarks; ++l) {
        const double d = std::hypot(static_cast<double>(x) - s.landmarks[l].x,
                                    static_cast<double>(y) - s.landmarks[l].y);
        const double g = 0.8 * std::clamp(kRadius + 0.5 - d, 0.0, 1.0);
        const auto p = palette(l + 1);
        for (int c = 0; c < 3; ++c) v[c] += g * (p[c] - 0.2) / 0.8;
      }
      for (int c = 0; c < 3; ++c) {
        s.image.at(y, x, c) = to_byte(v[c] + rng.normal(0, 0.05));
      }
    }
  }
  return s;
}

Sample classification_sample(Rng& rng, int64_t h, int64_t w, int64_t classes) {
  Sample s;
  std::vector<double> bg;
  s.image = blank_canvas(rng, h, w, 0.15, 0.45, bg);
  s.class_id = static_cast<int32_t>(rng.integer(0, classes - 1));
  Shape2 shape = random_shape(rng, h, w, s.class_id % 2 == 1);
  const auto p = palette(s.class_id / 2);
  const double level = rng.uniform(0.55, 0.85);
  for (int64_t y = 0; y < h; ++y) {
    for (int64_t x = 0; x < w; ++x) {
      const bool in =
          shape.contains(static_cast<double>(x), static_cast<double>(y));
      for (int c = 0; c < 3; ++c) {
        const double base = in ? level * p[c] + (1 - p[c]) * bg[c] : bg[c];
        s.image.at(y, x, c) = to_byte(base + rng.normal(0, kNoise));
      }
    }
  }
  return s;
}

std::string numbered(const char* stem, int64_t i, const char* ext) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s_%04lld.%s", stem,
                static_cast<long long>(i), ext);
  return buf;
}

}  // namespace

Dataset generate_synthetic(Task task, int64_t n, int64_t h, int64_t w,
                           int64_t classes, uint64_t seed) {
  if (n < 1) throw ConfigError("synthetic data: n must be >= 1");
  if (h < 8 || w < 8) throw ConfigError("synthetic data: size must be >= 8");
  if (task == Task::kPyramid) {
    throw ConfigError("synthetic data: no generator for the pyramid task");
  }
  if (task == Task::kSegmentation && classes < 2) {
    throw ConfigError("synthetic data: segmentation needs >= 2 classes");
  }
  if (classes < 1) throw ConfigError("synthetic data: classes must be >= 1");
  Dataset d;
  d.task = task;
  d.classes = classes;
  for (int64_t i = 0; i < n; ++i) {
    Rng rng(seed, static_cast<uint64_t>(i));
    switch (task) {
      case Task::kSegmentation:
        d.samples.push_back(segmentation_sample(rng, h, w, classes));
        break;
      case Task::kLandmarks:
        d.samples.push_back(landmark_sample(rng, h, w, classes));
        break;
      default:
        d.samples.push_back(classification_sample(rng, h, w, classes));
        break;
    }
  }
  return d;
}

void write_dataset(const std::string& dir, const Dataset& data) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory '" + dir + "'");
  const fs::path root(dir);
  {
    std::ofstream m(root / "manifest.txt");
    if (!m) throw IoError("cannot write manifest in '" + dir + "'");
    m << "task = " << to_string(data.task) << "\nsamples = "
      << data.samples.size() << "\nclasses = " << data.classes << '\n';
  }
  std::ofstream lm;
  std::ofstream cl;
  if (data.task == Task::kLandmarks) {
    lm.open(root / "landmarks.txt");
    lm.precision(17);
  }
  if (data.task == Task::kClassification) cl.open(root / "classes.txt");
  for (size_t i = 0; i < data.samples.size(); ++i) {
    const Sample& s = data.samples[i];
    write_pnm((root / numbered("image", i, "ppm")).string(), s.image);
    if (data.task == Task::kSegmentation) {
      Image label{s.image.h, s.image.w, 1, {}};
      label.pixels.reserve(s.labels.size());
      for (int32_t v : s.labels) label.pixels.push_back(static_cast<uint8_t>(v));
      write_pnm((root / numbered("label", i, "pgm")).string(), label);
    } else if (data.task == Task::kLandmarks) {
      lm << i;
      for (const Point2& p : s.landmarks) lm << ' ' << p.x << ' ' << p.y;
      lm << '\n';
    } else {
      cl << i << ' ' << s.class_id << '\n';
    }
  }
  if ((lm.is_open() && !lm) || (cl.is_open() && !cl)) {
    throw IoError("failed writing annotations in '" + dir + "'");
  }
}

Dataset read_dataset(const std::string& dir) {
  namespace fs = std::filesystem;
  const fs::path root(dir);
  std::ifstream m(root / "manifest.txt");
  if (!m) throw IoError("no manifest.txt in '" + dir + "'");
  Dataset d;
  int64_t n = -1;
  std::string line;
  while (std::getline(m, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    std::string key = line.substr(0, eq);
    std::string val = line.substr(eq + 1);
    key.erase(key.find_last_not_of(' ') + 1);
    val.erase(0, val.find_first_not_of(' '));
    if (key == "task") d.task = parse_task(val);
    if (key == "samples") n = std::stoll(val);
    if (key == "classes") d.classes = std::stoll(val);
  }
  if (n < 1 || d.classes < 1) throw IoError(dir + ": incomplete manifest");
  std::ifstream lm;
  std::ifstream cl;
  if (d.task == Task::kLandmarks) {
    lm.open(root / "landmarks.txt");
    if (!lm) throw IoError(dir + ": missing landmarks.txt");
  }
  if (d.task == Task::kClassification) {
    cl.open(root / "classes.txt");
    if (!cl) throw IoError(dir + ": missing classes.txt");
  }
  for (int64_t i = 0; i < n; ++i) {
    Sample s;
    s.image = read_pnm((root / numbered("image", i, "ppm")).string());
    if (d.task == Task::kSegmentation) {
      const Image label =
          read_pnm((root / numbered("label", i, "pgm")).string());
      if (label.h != s.image.h || label.w != s.image.w || label.channels != 1) {
        throw IoError(dir + ": label " + std::to_string(i) +
                      " does not match its image");
      }
      s.labels.assign(label.pixels.begin(), label.pixels.end());
    } else if (d.task == Task::kLandmarks) {
      int64_t idx = -1;
      if (!(lm >> idx) || idx != i) {
        throw IoError(dir + ": landmarks.txt out of sync at sample " +
                      std::to_string(i));
      }
      for (int64_t l = 0; l < d.classes; ++l) {
        Point2 p;
        if (!(lm >> p.x >> p.y)) throw IoError(dir + ": truncated landmarks");
        s.landmarks.push_back(p);
      }
    } else {
      int64_t idx = -1;
      if (!(cl >> idx >> s.class_id) || idx != i) {
        throw IoError(dir + ": classes.txt out of sync at sample " +
                      std::to_string(i));
      }
    }
    d.samples.push_back(std::move(s));
  }
  return d;
}

Dataset load_dataset(const RunConfig& config) {
  if (config.data.source == DataSource::kDirectory) {
    Dataset d = read_dataset(config.data.dir);
    if (d.task != config.task) {
      throw ConfigError("data.dir holds " + to_string(d.task) +
                        " data but the task is " + to_string(config.task));
    }
    return d;
  }
  return generate_synthetic(config.task, config.data.samples,
                            config.network.input_h, config.network.input_w,
                            config.network.num_outputs, config.seed);
}

}  // namespace hrforge
