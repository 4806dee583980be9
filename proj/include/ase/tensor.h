// Copyright 2026 The Audio Spectral Enhancement Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef ASE_TENSOR_H_
#define ASE_TENSOR_H_

#include <algorithm>
#include <cstddef>
#include <functional>
#include <numeric>
#include <span>
#include <utility>
#include <vector>

namespace ase {

// Dense row-major tensor. Rank-3 tensors are laid out as
// [channel][row][column], so each channel is one contiguous plane.
template <typename T>
class Tensor {
 public:
  using value_type = T;

  Tensor() = default;
  explicit Tensor(std::vector<size_t> shape, T fill = T(0))
      : shape_(std::move(shape)), data_(ElementCount(shape_), fill) {}
  Tensor(std::vector<size_t> shape, std::vector<T> data)
      : shape_(std::move(shape)), data_(std::move(data)) {}

  const std::vector<size_t>& shape() const { return shape_; }
  size_t rank() const { return shape_.size(); }
  size_t dim(size_t i) const { return shape_[i]; }
  size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }
  std::span<T> values() { return data_; }
  std::span<const T> values() const { return data_; }
  std::vector<T>& storage() { return data_; }
  const std::vector<T>& storage() const { return data_; }

  T& operator[](size_t i) { return data_[i]; }
  const T& operator[](size_t i) const { return data_[i]; }

  // Rank-2 access.
  T& at(size_t r, size_t c) { return data_[r * shape_[1] + c]; }
  const T& at(size_t r, size_t c) const { return data_[r * shape_[1] + c]; }

  // Rank-3 access.
  T& at(size_t ch, size_t r, size_t c) {
    return data_[(ch * shape_[1] + r) * shape_[2] + c];
  }
  const T& at(size_t ch, size_t r, size_t c) const {
    return data_[(ch * shape_[1] + r) * shape_[2] + c];
  }

  size_t plane_size() const { return shape_[1] * shape_[2]; }
  std::span<T> plane(size_t ch) {
    return std::span<T>(data_).subspan(ch * plane_size(), plane_size());
  }
  std::span<const T> plane(size_t ch) const {
    return std::span<const T>(data_).subspan(ch * plane_size(), plane_size());
  }

  void Fill(T value) { std::fill(data_.begin(), data_.end(), value); }

  bool operator==(const Tensor& other) const = default;

  static size_t ElementCount(const std::vector<size_t>& shape) {
    return std::accumulate(shape.begin(), shape.end(), size_t{1},
                           std::multiplies<>());
  }

 private:
  std::vector<size_t> shape_;
  std::vector<T> data_;
};

template <typename To, typename From>
Tensor<To> TensorCast(const Tensor<From>& src) {
  std::vector<To> out(src.size());
  for (size_t i = 0; i < src.size(); ++i) out[i] = static_cast<To>(src[i]);
  return Tensor<To>(src.shape(), std::move(out));
}

// [2, frames, bins]: plane 0 holds real parts, plane 1 imaginary parts.
using StackedSpectrogram = Tensor<float>;

}  // namespace ase

#endif  // ASE_TENSOR_H_
