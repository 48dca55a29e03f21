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

#ifndef HRFORGE_TENSOR_HPP_
#define HRFORGE_TENSOR_HPP_

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "hrforge/error.hpp"

namespace hrforge {

// NCHW extents. All four are non-negative.
struct Shape {
  int64_t n = 0;
  int64_t c = 0;
  int64_t h = 0;
  int64_t w = 0;

  int64_t numel() const { return n * c * h * w; }
  int64_t plane() const { return h * w; }
  bool operator==(const Shape&) const = default;
  std::string str() const;
};

// Double precision is the verification mode: every kernel output is checked
// for NaN/Inf. Single precision is the speed mode and skips the checks.
template <typename T>
inline constexpr bool kVerifyMode = std::is_same_v<T, double>;

enum class Precision { kVerify, kFast };

template <typename T>
class BasicTensor {
 public:
  using value_type = T;

  BasicTensor() = default;
  explicit BasicTensor(Shape shape, T fill = T{0});
  BasicTensor(Shape shape, std::vector<T> data);

  const Shape& shape() const { return shape_; }
  int64_t numel() const { return static_cast<int64_t>(data_.size()); }
  bool empty() const { return data_.empty(); }

  std::span<T> data() { return data_; }
  std::span<const T> data() const { return data_; }
  T* ptr() { return data_.data(); }
  const T* ptr() const { return data_.data(); }
  std::vector<T>& storage() { return data_; }
  const std::vector<T>& storage() const { return data_; }

  T& at(int64_t n, int64_t c, int64_t h, int64_t w) {
    return data_[index(n, c, h, w)];
  }
  T at(int64_t n, int64_t c, int64_t h, int64_t w) const {
    return data_[index(n, c, h, w)];
  }
  T& operator[](int64_t i) { return data_[i]; }
  T operator[](int64_t i) const { return data_[i]; }

  // Gradient buffer; absent until ensure_grad() is called.
  bool has_grad() const { return has_grad_; }
  void ensure_grad();
  void drop_grad();
  void zero_grad();
  std::span<T> grad();
  std::span<const T> grad() const;

  void fill(T v);
  bool all_finite() const;

  // Same data, new extents with the same element count.
  BasicTensor reshaped(Shape shape) const;

  bool operator==(const BasicTensor& o) const {
    return shape_ == o.shape_ && data_ == o.data_;
  }

 private:
  int64_t index(int64_t n, int64_t c, int64_t h, int64_t w) const {
    return ((n * shape_.c + c) * shape_.h + h) * shape_.w + w;
  }

  Shape shape_;
  std::vector<T> data_;
  std::vector<T> grad_;
  bool has_grad_ = false;
};

using Tensor = BasicTensor<double>;
using TensorF = BasicTensor<float>;

// Throws NumericalError naming `where` when a value is NaN or infinite.
template <typename T>
void require_finite(std::span<const T> values, const std::string& where);

template <typename T>
void check_kernel_output(const BasicTensor<T>& t, const char* kernel) {
  if constexpr (kVerifyMode<T>) {
    require_finite<T>(t.data(), kernel);
  }
}

template <typename To, typename From>
BasicTensor<To> tensor_cast(const BasicTensor<From>& t) {
  std::vector<To> out(t.data().begin(), t.data().end());
  return BasicTensor<To>(t.shape(), std::move(out));
}

}  // namespace hrforge

#endif  // HRFORGE_TENSOR_HPP_
