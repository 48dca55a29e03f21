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

#ifndef HRFORGE_CHECKPOINT_HPP_
#define HRFORGE_CHECKPOINT_HPP_

// Binary checkpoint, all integers and payloads little-endian:
//
//   "HRFG" u32 version u64 config_digest i64 iteration u32 count
//   count x { u32 name_len, name, u8 dtype, i64 n, c, h, w, payload }
//
// dtype 1 = f32, 2 = f64. Tensor names are "param/<name>",
// "buffer/<bn>.running_mean|running_var" and "momentum/<name>".

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "hrforge/network.hpp"
#include "hrforge/optim.hpp"
#include "hrforge/tensor.hpp"

namespace hrforge {

enum class DType : uint8_t { kF32 = 1, kF64 = 2 };

template <typename T>
constexpr DType dtype_of() {
  return sizeof(T) == 4 ? DType::kF32 : DType::kF64;
}

struct StoredTensor {
  std::string name;
  DType dtype = DType::kF64;
  Shape shape;
  std::vector<unsigned char> payload;  // little-endian

  template <typename T>
  static StoredTensor from(std::string name, Shape shape,
                           std::span<const T> values);
  // Throws IoError if the stored dtype differs from T.
  template <typename T>
  BasicTensor<T> to_tensor() const;
  bool operator==(const StoredTensor&) const = default;
};

// Single tensor record without the name: u8 dtype, 4 x i64 extents, payload.
void write_tensor_record(std::ostream& out, const StoredTensor& t);
StoredTensor read_tensor_record(std::istream& in, const std::string& where);

inline constexpr uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  uint32_t version = kCheckpointVersion;
  uint64_t config_digest = 0;
  int64_t iteration = 0;
  std::vector<StoredTensor> tensors;

  const StoredTensor& get(const std::string& name) const;
  bool operator==(const Checkpoint&) const = default;
};

void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);
// Also rejects a digest other than expected_digest.
Checkpoint load_checkpoint(const std::string& path, uint64_t expected_digest);

template <typename T>
Checkpoint capture_state(Network<T>& net, const OptimizerState<T>& opt,
                         uint64_t config_digest);
// Restores parameters, running statistics, momentum and iteration count.
template <typename T>
void restore_state(const Checkpoint& ckpt, Network<T>& net,
                   OptimizerState<T>& opt);

}  // namespace hrforge

#endif  // HRFORGE_CHECKPOINT_HPP_
