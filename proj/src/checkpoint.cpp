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

#include "hrforge/checkpoint.hpp"

#include <algorithm>
#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "hrforge/error.hpp"

namespace hrforge {

namespace {

static_assert(std::endian::native == std::endian::little ||
                  std::endian::native == std::endian::big,
              "mixed-endian hosts are not supported");

template <typename U>
void put(std::ostream& out, U v) {
  unsigned char b[sizeof(U)];
  std::memcpy(b, &v, sizeof(U));
  if constexpr (std::endian::native == std::endian::big) {
    std::reverse(b, b + sizeof(U));
  }
  out.write(reinterpret_cast<const char*>(b), sizeof(U));
}

template <typename U>
U get(std::istream& in, const std::string& where) {
  unsigned char b[sizeof(U)];
  if (!in.read(reinterpret_cast<char*>(b), sizeof(U))) {
    throw IoError(where + ": truncated file");
  }
  if constexpr (std::endian::native == std::endian::big) {
    std::reverse(b, b + sizeof(U));
  }
  U v;
  std::memcpy(&v, b, sizeof(U));
  return v;
}

constexpr char kMagic[4] = {'H', 'R', 'F', 'G'};
constexpr uint32_t kMaxName = 4096;

size_t dtype_size(DType d) { return d == DType::kF32 ? 4 : 8; }

}  // namespace

template <typename T>
StoredTensor StoredTensor::from(std::string name, Shape shape,
                                std::span<const T> values) {
  if (shape.numel() != static_cast<int64_t>(values.size())) {
    throw ConfigError("tensor '" + name + "': shape " + shape.str() +
                      " does not match " + std::to_string(values.size()) +
                      " values");
  }
  StoredTensor t;
  t.name = std::move(name);
  t.dtype = dtype_of<T>();
  t.shape = shape;
  t.payload.resize(values.size() * sizeof(T));
  std::memcpy(t.payload.data(), values.data(), t.payload.size());
  if constexpr (std::endian::native == std::endian::big) {
    for (size_t i = 0; i < values.size(); ++i) {
      std::reverse(t.payload.begin() + i * sizeof(T),
                   t.payload.begin() + (i + 1) * sizeof(T));
    }
  }
  return t;
}

template <typename T>
BasicTensor<T> StoredTensor::to_tensor() const {
  if (dtype != dtype_of<T>()) {
    throw IoError("tensor '" + name + "': stored as " +
                  (dtype == DType::kF32 ? "f32" : "f64") +
                  ", requested the other precision");
  }
  std::vector<T> values(shape.numel());
  std::vector<unsigned char> bytes = payload;
  if constexpr (std::endian::native == std::endian::big) {
    for (size_t i = 0; i < values.size(); ++i) {
      std::reverse(bytes.begin() + i * sizeof(T),
                   bytes.begin() + (i + 1) * sizeof(T));
    }
  }
  std::memcpy(values.data(), bytes.data(), bytes.size());
  return BasicTensor<T>(shape, std::move(values));
}

void write_tensor_record(std::ostream& out, const StoredTensor& t) {
  put<uint8_t>(out, static_cast<uint8_t>(t.dtype));
  put<int64_t>(out, t.shape.n);
  put<int64_t>(out, t.shape.c);
  put<int64_t>(out, t.shape.h);
  put<int64_t>(out, t.shape.w);
  out.write(reinterpret_cast<const char*>(t.payload.data()),
            static_cast<std::streamsize>(t.payload.size()));
}

StoredTensor read_tensor_record(std::istream& in, const std::string& where) {
  StoredTensor t;
  const uint8_t code = get<uint8_t>(in, where);
  if (code != 1 && code != 2) {
    throw IoError(where + ": unknown dtype code " + std::to_string(code));
  }
  t.dtype = static_cast<DType>(code);
  t.shape.n = get<int64_t>(in, where);
  t.shape.c = get<int64_t>(in, where);
  t.shape.h = get<int64_t>(in, where);
  t.shape.w = get<int64_t>(in, where);
  constexpr int64_t kMaxDim = int64_t{1} << 31;
  for (int64_t d : {t.shape.n, t.shape.c, t.shape.h, t.shape.w}) {
    if (d < 0 || d > kMaxDim) throw IoError(where + ": corrupt tensor extents");
  }
  const int64_t numel = t.shape.numel();
  if (numel < 0 || numel > (int64_t{1} << 34)) {
    throw IoError(where + ": corrupt tensor extents");
  }
  t.payload.resize(static_cast<size_t>(numel) * dtype_size(t.dtype));
  if (!in.read(reinterpret_cast<char*>(t.payload.data()),
               static_cast<std::streamsize>(t.payload.size()))) {
    throw IoError(where + ": truncated tensor payload");
  }
  return t;
}

const StoredTensor& Checkpoint::get(const std::string& name) const {
  for (const StoredTensor& t : tensors) {
    if (t.name == name) return t;
  }
  throw IoError("checkpoint has no tensor '" + name + "'");
}

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write checkpoint '" + path + "'");
    out.write(kMagic, 4);
    put<uint32_t>(out, ckpt.version);
    put<uint64_t>(out, ckpt.config_digest);
    put<int64_t>(out, ckpt.iteration);
    put<uint32_t>(out, static_cast<uint32_t>(ckpt.tensors.size()));
    for (const StoredTensor& t : ckpt.tensors) {
      put<uint32_t>(out, static_cast<uint32_t>(t.name.size()));
      out.write(t.name.data(), static_cast<std::streamsize>(t.name.size()));
      write_tensor_record(out, t);
    }
    if (!out.flush()) throw IoError("failed writing checkpoint '" + path + "'");
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    throw IoError("cannot move checkpoint into place at '" + path + "'");
  }
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint '" + path + "'");
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) {
    throw IoError(path + ": not a checkpoint (bad magic)");
  }
  Checkpoint c;
  c.version = get<uint32_t>(in, path);
  if (c.version != kCheckpointVersion) {
    throw IoError(path + ": unsupported checkpoint version " +
                  std::to_string(c.version));
  }
  c.config_digest = get<uint64_t>(in, path);
  c.iteration = get<int64_t>(in, path);
  const uint32_t count = get<uint32_t>(in, path);
  for (uint32_t i = 0; i < count; ++i) {
    const uint32_t len = get<uint32_t>(in, path);
    if (len > kMaxName) throw IoError(path + ": corrupt tensor name length");
    std::string name(len, '\0');
    if (!in.read(name.data(), len)) throw IoError(path + ": truncated file");
    StoredTensor t = read_tensor_record(in, path + ": " + name);
    t.name = std::move(name);
    c.tensors.push_back(std::move(t));
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw IoError(path + ": trailing bytes after last tensor");
  }
  return c;
}

Checkpoint load_checkpoint(const std::string& path, uint64_t expected_digest) {
  Checkpoint c = load_checkpoint(path);
  if (c.config_digest != expected_digest) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "digest %016llx, config has %016llx",
                  static_cast<unsigned long long>(c.config_digest),
                  static_cast<unsigned long long>(expected_digest));
    throw IoError(path + ": checkpoint was written for a different config (" +
                  buf + ")");
  }
  return c;
}

template <typename T>
Checkpoint capture_state(Network<T>& net, const OptimizerState<T>& opt,
                         uint64_t config_digest) {
  Checkpoint c;
  c.config_digest = config_digest;
  c.iteration = opt.iter;
  const auto& specs = net.graph().params();
  for (size_t i = 0; i < specs.size(); ++i) {
    const BasicTensor<T>& p = net.params()[i];
    c.tensors.push_back(StoredTensor::from<T>("param/" + specs[i].name,
                                              p.shape(), p.data()));
  }
  for (const auto& b : net.buffers()) {
    const std::span<const T> v(*b.values);
    c.tensors.push_back(StoredTensor::from<T>(
        "buffer/" + b.name, Shape{1, static_cast<int64_t>(v.size()), 1, 1}, v));
  }
  for (size_t i = 0; i < opt.momentum_buffers.size(); ++i) {
    c.tensors.push_back(StoredTensor::from<T>(
        "momentum/" + specs[i].name, net.params()[i].shape(),
        std::span<const T>(opt.momentum_buffers[i])));
  }
  return c;
}

template <typename T>
void restore_state(const Checkpoint& ckpt, Network<T>& net,
                   OptimizerState<T>& opt) {
  const auto& specs = net.graph().params();
  for (size_t i = 0; i < specs.size(); ++i) {
    BasicTensor<T> t = ckpt.get("param/" + specs[i].name).template to_tensor<T>();
    if (t.shape() != net.params()[i].shape()) {
      throw IoError("checkpoint tensor '" + specs[i].name + "' has shape " +
                    t.shape().str() + ", network expects " +
                    net.params()[i].shape().str());
    }
    net.params()[i].storage() = t.storage();
  }
  for (auto& b : net.buffers()) {
    BasicTensor<T> t = ckpt.get("buffer/" + b.name).template to_tensor<T>();
    if (t.storage().size() != b.values->size()) {
      throw IoError("checkpoint buffer '" + b.name + "' has the wrong size");
    }
    *b.values = t.storage();
  }
  opt.momentum_buffers.clear();
  bool any = false;
  for (const StoredTensor& t : ckpt.tensors) {
    if (t.name.rfind("momentum/", 0) == 0) any = true;
  }
  if (any) {
    for (size_t i = 0; i < specs.size(); ++i) {
      BasicTensor<T> t = ckpt.get("momentum/" + specs[i].name).template to_tensor<T>();
      if (t.shape() != net.params()[i].shape()) {
        throw IoError("checkpoint momentum '" + specs[i].name +
                      "' has the wrong shape");
      }
      opt.momentum_buffers.push_back(t.storage());
    }
  }
  opt.iter = ckpt.iteration;
}

#define HRFORGE_INSTANTIATE(T)                                              \
  template StoredTensor StoredTensor::from<T>(std::string, Shape,           \
                                              std::span<const T>);          \
  template BasicTensor<T> StoredTensor::to_tensor<T>() const;               \
  template Checkpoint capture_state<T>(Network<T>&, const OptimizerState<T>&, \
                                       uint64_t);                           \
  template void restore_state<T>(const Checkpoint&, Network<T>&,            \
                                 OptimizerState<T>&);

HRFORGE_INSTANTIATE(float)
HRFORGE_INSTANTIATE(double)
#undef HRFORGE_INSTANTIATE

}  // namespace hrforge
