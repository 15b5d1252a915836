/*
 * Copyright 2026 The QIPF Toolkit Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstddef>
#include <span>
#include <type_traits>
#include <vector>

namespace qipf {

/// Row-major 2-D array. Grid<bool> stores one byte per cell so elements are
/// addressable.
template <class T>
class Grid {
 public:
  using value_type = std::conditional_t<std::is_same_v<T, bool>, unsigned char, T>;

  Grid() = default;
  Grid(std::size_t rows, std::size_t cols, T fill = T{})
      : rows_(rows), cols_(cols), data_(rows * cols, static_cast<value_type>(fill)) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }

  value_type& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const value_type& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::vector<value_type>& data() noexcept { return data_; }
  const std::vector<value_type>& data() const noexcept { return data_; }

  bool same_shape(const Grid& other) const noexcept { return rows_ == other.rows_ && cols_ == other.cols_; }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<value_type> data_;
};

/// Row-major H x W x C array of reals.
class Image {
 public:
  Image() = default;
  Image(std::size_t height, std::size_t width, std::size_t channels, double fill = 0.0)
      : height_(height), width_(width), channels_(channels), data_(height * width * channels, fill) {}

  std::size_t height() const noexcept { return height_; }
  std::size_t width() const noexcept { return width_; }
  std::size_t channels() const noexcept { return channels_; }

  double& operator()(std::size_t r, std::size_t c, std::size_t ch) { return data_[(r * width_ + c) * channels_ + ch]; }
  double operator()(std::size_t r, std::size_t c, std::size_t ch) const {
    return data_[(r * width_ + c) * channels_ + ch];
  }

  std::span<double> pixel(std::size_t r, std::size_t c) { return {data_.data() + (r * width_ + c) * channels_, channels_}; }
  std::span<const double> pixel(std::size_t r, std::size_t c) const {
    return {data_.data() + (r * width_ + c) * channels_, channels_};
  }

  std::vector<double>& data() noexcept { return data_; }
  const std::vector<double>& data() const noexcept { return data_; }

  friend bool operator==(const Image&, const Image&) = default;

 private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::size_t channels_ = 0;
  std::vector<double> data_;
};

}  // namespace qipf
