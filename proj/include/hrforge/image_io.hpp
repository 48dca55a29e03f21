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

#ifndef HRFORGE_IMAGE_IO_HPP_
#define HRFORGE_IMAGE_IO_HPP_

// Binary PGM (P5) / PPM (P6) with maxval <= 255, and a raw tensor dump:
// "HRFT" followed by one tensor record (see checkpoint.hpp).

#include <cstdint>
#include <string>
#include <vector>

#include "hrforge/checkpoint.hpp"
#include "hrforge/tensor.hpp"

namespace hrforge {

// Interleaved 8-bit pixels, channels 1 (gray) or 3 (RGB).
struct Image {
  int64_t h = 0;
  int64_t w = 0;
  int64_t channels = 0;
  std::vector<uint8_t> pixels;

  uint8_t& at(int64_t y, int64_t x, int64_t c) {
    return pixels[(y * w + x) * channels + c];
  }
  uint8_t at(int64_t y, int64_t x, int64_t c) const {
    return pixels[(y * w + x) * channels + c];
  }
  bool operator==(const Image&) const = default;
};

void write_pnm(const std::string& path, const Image& image);
Image read_pnm(const std::string& path);

// (1, C, h, w) planar values in [0, 1].
template <typename T>
BasicTensor<T> image_to_tensor(const Image& image);
// Channel c of sample n, clamped to [0, 1] and rounded to 8 bits.
template <typename T>
Image tensor_to_image(const BasicTensor<T>& t, int64_t n = 0);

void write_tensor_dump(const std::string& path, const StoredTensor& t);
StoredTensor read_tensor_dump(const std::string& path);

}  // namespace hrforge

#endif  // HRFORGE_IMAGE_IO_HPP_
