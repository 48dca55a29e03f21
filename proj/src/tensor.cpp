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

#include "hrforge/tensor.hpp"

#include <algorithm>
#include <sstream>

namespace hrforge {

std::string Shape::str() const {
  std::ostringstream os;
  os << n << "x" << c << "x" << h << "x" << w;
  return os.str();
}

namespace {
void validate_shape(const Shape& s) {
  if (s.n < 0 || s.c < 0 || s.h < 0 || s.w < 0) {
    throw ConfigError("negative tensor extent " + s.str());
  }
}
}  // namespace

template <typename T>
BasicTensor<T>::BasicTensor(Shape shape, T fill) : shape_(shape) {
  validate_shape(shape);
  data_.assign(static_cast<size_t>(shape.numel()), fill);
}

template <typename T>
BasicTensor<T>::BasicTensor(Shape shape, std::vector<T> data)
    : shape_(shape), data_(std::move(data)) {
  validate_shape(shape);
  if (static_cast<int64_t>(data_.size()) != shape.numel()) {
    throw ConfigError("tensor data length " + std::to_string(data_.size()) +
                      " does not match shape " + shape.str());
  }
}

template <typename T>
void BasicTensor<T>::ensure_grad() {
  if (!has_grad_) {
    grad_.assign(data_.size(), T{0});
    has_grad_ = true;
  }
}

template <typename T>
void BasicTensor<T>::drop_grad() {
  grad_.clear();
  grad_.shrink_to_fit();
  has_grad_ = false;
}

template <typename T>
void BasicTensor<T>::zero_grad() {
  if (has_grad_) std::fill(grad_.begin(), grad_.end(), T{0});
}

template <typename T>
std::span<T> BasicTensor<T>::grad() {
  if (!has_grad_) throw ConfigError("tensor has no gradient buffer");
  return grad_;
}

template <typename T>
std::span<const T> BasicTensor<T>::grad() const {
  if (!has_grad_) throw ConfigError("tensor has no gradient buffer");
  return grad_;
}

template <typename T>
void BasicTensor<T>::fill(T v) {
  std::fill(data_.begin(), data_.end(), v);
}

template <typename T>
bool BasicTensor<T>::all_finite() const {
  return std::all_of(data_.begin(), data_.end(),
                     [](T v) { return std::isfinite(v); });
}

template <typename T>
BasicTensor<T> BasicTensor<T>::reshaped(Shape shape) const {
  if (shape.numel() != shape_.numel()) {
    throw ConfigError("cannot reshape " + shape_.str() + " to " + shape.str());
  }
  return BasicTensor<T>(shape, data_);
}

template <typename T>
void require_finite(std::span<const T> values, const std::string& where) {
  for (size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      throw NumericalError("non-finite value in " + where + " at element " +
                           std::to_string(i));
    }
  }
}

template class BasicTensor<float>;
template class BasicTensor<double>;
template void require_finite<float>(std::span<const float>, const std::string&);
template void require_finite<double>(std::span<const double>,
                                     const std::string&);

}  // namespace hrforge
