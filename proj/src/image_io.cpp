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

#include "hrforge/image_io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>

#include "hrforge/error.hpp"

namespace hrforge {

void write_pnm(const std::string& path, const Image& image) {
  if (image.channels != 1 && image.channels != 3) {
    throw ConfigError("write_pnm: channels must be 1 or 3");
  }
  if (static_cast<int64_t>(image.pixels.size()) !=
      image.h * image.w * image.channels) {
    throw ConfigError("write_pnm: pixel buffer does not match extents");
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write image '" + path + "'");
  out << (image.channels == 1 ? "P5" : "P6") << '\n'
      << image.w << ' ' << image.h << "\n255\n";
  out.write(reinterpret_cast<const char*>(image.pixels.data()),
            static_cast<std::streamsize>(image.pixels.size()));
  if (!out) throw IoError("failed writing image '" + path + "'");
}

namespace {

// Next whitespace-delimited header token, skipping '#' comments.
int64_t header_int(std::istream& in, const std::string& path) {
  int ch = in.get();
  while (true) {
    while (ch != EOF && std::isspace(ch)) ch = in.get();
    if (ch != '#') break;
    while (ch != EOF && ch != '\n') ch = in.get();
  }
  if (ch == EOF || !std::isdigit(ch)) {
    throw IoError(path + ": malformed PNM header");
  }
  int64_t v = 0;
  while (ch != EOF && std::isdigit(ch)) {
    v = v * 10 + (ch - '0');
    if (v > (int64_t{1} << 30)) throw IoError(path + ": PNM extent too large");
    ch = in.get();
  }
  if (ch == EOF || !std::isspace(ch)) {
    throw IoError(path + ": malformed PNM header");
  }
  return v;
}

}  // namespace

Image read_pnm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open image '" + path + "'");
  char magic[2];
  if (!in.read(magic, 2) || magic[0] != 'P' ||
      (magic[1] != '5' && magic[1] != '6')) {
    throw IoError(path + ": not a binary PGM/PPM file");
  }
  Image img;
  img.channels = magic[1] == '5' ? 1 : 3;
  img.w = header_int(in, path);
  img.h = header_int(in, path);
  const int64_t maxval = header_int(in, path);
  if (img.w < 1 || img.h < 1 || maxval < 1 || maxval > 255) {
    throw IoError(path + ": unsupported PNM extents or maxval");
  }
  img.pixels.resize(img.h * img.w * img.channels);
  if (!in.read(reinterpret_cast<char*>(img.pixels.data()),
               static_cast<std::streamsize>(img.pixels.size()))) {
    throw IoError(path + ": truncated pixel data");
  }
  if (maxval != 255) {
    for (auto& p : img.pixels) {
      p = static_cast<uint8_t>(std::lround(p * 255.0 / maxval));
    }
  }
  return img;
}

template <typename T>
BasicTensor<T> image_to_tensor(const Image& image) {
  BasicTensor<T> t(Shape{1, image.channels, image.h, image.w});
  for (int64_t c = 0; c < image.channels; ++c) {
    for (int64_t y = 0; y < image.h; ++y) {
      for (int64_t x = 0; x < image.w; ++x) {
        t.at(0, c, y, x) = static_cast<T>(image.at(y, x, c) / 255.0);
      }
    }
  }
  return t;
}

template <typename T>
Image tensor_to_image(const BasicTensor<T>& t, int64_t n) {
  const Shape s = t.shape();
  if (s.c != 1 && s.c != 3) {
    throw ConfigError("tensor_to_image: need 1 or 3 channels, got " +
                      std::to_string(s.c));
  }
  Image img;
  img.h = s.h;
  img.w = s.w;
  img.channels = s.c;
  img.pixels.resize(s.h * s.w * s.c);
  for (int64_t c = 0; c < s.c; ++c) {
    for (int64_t y = 0; y < s.h; ++y) {
      for (int64_t x = 0; x < s.w; ++x) {
        const double v = std::clamp(static_cast<double>(t.at(n, c, y, x)), 0.0,
                                    1.0);
        img.at(y, x, c) = static_cast<uint8_t>(std::lround(v * 255.0));
      }
    }
  }
  return img;
}

void write_tensor_dump(const std::string& path, const StoredTensor& t) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write tensor dump '" + path + "'");
  out.write("HRFT", 4);
  write_tensor_record(out, t);
  if (!out) throw IoError("failed writing tensor dump '" + path + "'");
}

StoredTensor read_tensor_dump(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open tensor dump '" + path + "'");
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, "HRFT", 4) != 0) {
    throw IoError(path + ": not a tensor dump (bad magic)");
  }
  StoredTensor t = read_tensor_record(in, path);
  if (in.peek() != std::char_traits<char>::eof()) {
    throw IoError(path + ": trailing bytes after tensor payload");
  }
  return t;
}

template BasicTensor<float> image_to_tensor<float>(const Image&);
template BasicTensor<double> image_to_tensor<double>(const Image&);
template Image tensor_to_image<float>(const TensorF&, int64_t);
template Image tensor_to_image<double>(const Tensor&, int64_t);

}  // namespace hrforge
