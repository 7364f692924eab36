// Copyright 2026 The clickloop Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "clickloop/errors.hpp"

namespace clickloop {

struct PixelCoord {
  int row = 0;
  int col = 0;

  friend constexpr auto operator<=>(const PixelCoord&, const PixelCoord&) = default;
};

struct Shape {
  int height = 0;
  int width = 0;

  constexpr std::size_t size() const {
    return static_cast<std::size_t>(height) * static_cast<std::size_t>(width);
  }
  constexpr bool contains(PixelCoord p) const {
    return p.row >= 0 && p.col >= 0 && p.row < height && p.col < width;
  }
  friend constexpr bool operator==(const Shape&, const Shape&) = default;
};

inline std::string to_string(Shape s) {
  return std::to_string(s.height) + "x" + std::to_string(s.width);
}

/// Row-major H x W grid of values.
template <typename T>
class Grid {
 public:
  using value_type = T;

  Grid() = default;
  Grid(int height, int width, T fill = T{}) : shape_{height, width} {
    if (height < 1 || width < 1) {
      throw ShapeError("grid dimensions must be positive, got " + to_string(shape_));
    }
    data_.assign(shape_.size(), fill);
  }
  explicit Grid(Shape shape, T fill = T{}) : Grid(shape.height, shape.width, fill) {}
  Grid(Shape shape, std::vector<T> values) : shape_(shape), data_(std::move(values)) {
    if (shape.height < 1 || shape.width < 1) {
      throw ShapeError("grid dimensions must be positive, got " + to_string(shape_));
    }
    if (data_.size() != shape_.size()) {
      throw ShapeError("value count " + std::to_string(data_.size()) +
                       " does not match shape " + to_string(shape_));
    }
  }

  int height() const { return shape_.height; }
  int width() const { return shape_.width; }
  Shape shape() const { return shape_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }
  bool contains(PixelCoord p) const { return shape_.contains(p); }

  std::size_t index(int row, int col) const {
    return static_cast<std::size_t>(row) * static_cast<std::size_t>(shape_.width) +
           static_cast<std::size_t>(col);
  }

  T& operator()(int row, int col) { return data_[index(row, col)]; }
  const T& operator()(int row, int col) const { return data_[index(row, col)]; }
  T& operator[](PixelCoord p) { return data_[index(p.row, p.col)]; }
  const T& operator[](PixelCoord p) const { return data_[index(p.row, p.col)]; }

  std::span<T> values() { return data_; }
  std::span<const T> values() const { return data_; }
  const std::vector<T>& data() const { return data_; }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  Shape shape_{};
  std::vector<T> data_;
};

template <typename A, typename B>
void require_same_shape(const Grid<A>& a, const Grid<B>& b, const char* what) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(what) + ": shape mismatch " + to_string(a.shape()) + " vs " +
                     to_string(b.shape()));
  }
}

/// Boolean grid stored one byte per pixel (0 or 1).
class BinaryMask : public Grid<std::uint8_t> {
 public:
  using Grid::Grid;
  BinaryMask(const Grid<std::uint8_t>& g) : Grid(g) {}  // NOLINT(google-explicit-constructor)

  bool test(int row, int col) const { return (*this)(row, col) != 0; }
  bool test(PixelCoord p) const { return (*this)[p] != 0; }
  void set(PixelCoord p, bool v = true) { (*this)[p] = v ? 1 : 0; }

  std::size_t count() const {
    return static_cast<std::size_t>(std::count(values().begin(), values().end(), 1));
  }
  bool any() const { return count() != 0; }

  BinaryMask operator~() const {
    BinaryMask out(shape());
    auto src = values();
    auto dst = out.values();
    for (std::size_t i = 0; i < src.size(); ++i) dst[i] = src[i] ? 0 : 1;
    return out;
  }
};

inline BinaryMask operator&(const BinaryMask& a, const BinaryMask& b) {
  require_same_shape(a, b, "mask and");
  BinaryMask out(a.shape());
  for (std::size_t i = 0; i < a.size(); ++i) out.values()[i] = a.values()[i] & b.values()[i];
  return out;
}

inline BinaryMask operator|(const BinaryMask& a, const BinaryMask& b) {
  require_same_shape(a, b, "mask or");
  BinaryMask out(a.shape());
  for (std::size_t i = 0; i < a.size(); ++i) out.values()[i] = a.values()[i] | b.values()[i];
  return out;
}

inline BinaryMask operator^(const BinaryMask& a, const BinaryMask& b) {
  require_same_shape(a, b, "mask xor");
  BinaryMask out(a.shape());
  for (std::size_t i = 0; i < a.size(); ++i) out.values()[i] = a.values()[i] ^ b.values()[i];
  return out;
}

/// Grid of probabilities; every value lies in [0, 1].
class ProbabilityMap : public Grid<double> {
 public:
  using Grid::Grid;
  ProbabilityMap(Shape shape, std::vector<double> values) : Grid(shape, std::move(values)) {
    validate();
  }

  void validate() const {
    for (double v : values()) {
      if (!(v >= 0.0 && v <= 1.0)) {
        throw InputError("probability value " + std::to_string(v) + " outside [0, 1]");
      }
    }
  }

  static ProbabilityMap from_mask(const BinaryMask& m) {
    ProbabilityMap p(m.shape());
    for (std::size_t i = 0; i < m.size(); ++i) p.values()[i] = m.values()[i] ? 1.0 : 0.0;
    return p;
  }
};

using DistanceGrid = Grid<double>;

/// H x W x 3 colour image, channel-interleaved, intensities in [0, 1].
/// Grayscale sources are replicated across the three channels.
struct Image {
  Shape shape{};
  std::vector<float> rgb;

  Image() = default;
  explicit Image(Shape s, float fill = 0.0F) : shape(s), rgb(s.size() * 3, fill) {
    if (s.height < 1 || s.width < 1) throw ShapeError("image dimensions must be positive");
  }

  int height() const { return shape.height; }
  int width() const { return shape.width; }

  float& at(int row, int col, int ch) {
    return rgb[(static_cast<std::size_t>(row) * shape.width + col) * 3 + ch];
  }
  float at(int row, int col, int ch) const {
    return rgb[(static_cast<std::size_t>(row) * shape.width + col) * 3 + ch];
  }
  float intensity(int row, int col) const {
    return (at(row, col, 0) + at(row, col, 1) + at(row, col, 2)) / 3.0F;
  }
  void set_gray(int row, int col, float v) {
    at(row, col, 0) = v;
    at(row, col, 1) = v;
    at(row, col, 2) = v;
  }

  friend bool operator==(const Image&, const Image&) = default;
};

}  // namespace clickloop
