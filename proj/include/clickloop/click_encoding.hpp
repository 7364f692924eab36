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
#include <cstddef>
#include <vector>

#include "clickloop/click.hpp"
#include "clickloop/errors.hpp"
#include "clickloop/grid.hpp"

namespace clickloop {

inline constexpr int kDefaultDiskRadius = 5;

/// Two-channel disk map for one click source. Human and pseudo clicks are
/// always kept in separate encodings.
struct DiskEncoding {
  BinaryMask positive;
  BinaryMask negative;
  ClickSource source = ClickSource::kHuman;
  int radius = kDefaultDiskRadius;

  DiskEncoding() = default;
  DiskEncoding(Shape shape, ClickSource src, int r)
      : positive(shape), negative(shape), source(src), radius(r) {}

  Shape shape() const { return positive.shape(); }
  friend bool operator==(const DiskEncoding&, const DiskEncoding&) = default;
};

namespace detail {

inline void paint_disk(BinaryMask& channel, PixelCoord center, int radius) {
  const int r2 = radius * radius;
  const int r0 = std::max(0, center.row - radius);
  const int r1 = std::min(channel.height() - 1, center.row + radius);
  const int c0 = std::max(0, center.col - radius);
  const int c1 = std::min(channel.width() - 1, center.col + radius);
  for (int r = r0; r <= r1; ++r) {
    const int dr = r - center.row;
    for (int c = c0; c <= c1; ++c) {
      const int dc = c - center.col;
      if (dr * dr + dc * dc <= r2) channel(r, c) = 1;
    }
  }
}

}  // namespace detail

inline DiskEncoding add_click(DiskEncoding enc, const Click& click) {
  if (click.source != enc.source) {
    throw InputError("add_click: click source '" + std::string(to_string(click.source)) +
                     "' does not match encoding source '" + std::string(to_string(enc.source)) +
                     "'");
  }
  require_in_bounds(click, enc.shape());
  detail::paint_disk(click.positive() ? enc.positive : enc.negative, click.pos, enc.radius);
  return enc;
}

/// Rasterises every click of `source_filter` as a filled disk of `radius`
/// (Euclidean distance <= radius, clipped at the image border).
inline DiskEncoding encode_clicks(const std::vector<Click>& clicks, Shape shape, int radius,
                                  ClickSource source_filter) {
  if (radius < 0) throw ConfigError("encode_clicks: radius must be non-negative");
  DiskEncoding enc(shape, source_filter, radius);
  for (const Click& c : clicks) {
    require_in_bounds(c, shape);
    if (c.source != source_filter) continue;
    detail::paint_disk(c.positive() ? enc.positive : enc.negative, c.pos, radius);
  }
  return enc;
}

/// Channel-major (C, H, W) stack of float planes.
struct ChannelStack {
  Shape shape{};
  int channels = 0;
  std::vector<float> data;

  ChannelStack() = default;
  ChannelStack(Shape s, int c) : shape(s), channels(c), data(s.size() * c, 0.0F) {}

  float& at(int ch, int row, int col) {
    return data[(static_cast<std::size_t>(ch) * shape.height + row) * shape.width + col];
  }
  float at(int ch, int row, int col) const {
    return data[(static_cast<std::size_t>(ch) * shape.height + row) * shape.width + col];
  }
};

/// Channels ordered [human+, human-, pseudo+, pseudo-] with 0/1 values.
inline ChannelStack merge_encodings(const DiskEncoding& human, const DiskEncoding& pseudo) {
  require_same_shape(human.positive, pseudo.positive, "merge_encodings");
  require_same_shape(human.positive, human.negative, "merge_encodings");
  require_same_shape(pseudo.positive, pseudo.negative, "merge_encodings");
  ChannelStack out(human.shape(), 4);
  const BinaryMask* planes[4] = {&human.positive, &human.negative, &pseudo.positive,
                                 &pseudo.negative};
  const std::size_t n = human.shape().size();
  for (int ch = 0; ch < 4; ++ch) {
    for (std::size_t i = 0; i < n; ++i) {
      out.data[ch * n + i] = planes[ch]->values()[i] ? 1.0F : 0.0F;
    }
  }
  return out;
}

/// Everything a segmenter sees for one forward pass. The raw click lists ride
/// along with their disk encodings for segmenters that work on seed points.
struct SegmentationInput {
  Image image;
  ProbabilityMap prev_mask;
  DiskEncoding human;
  DiskEncoding pseudo;
  std::vector<Click> human_clicks;
  std::vector<Click> pseudo_clicks;

  Shape shape() const { return image.shape; }

  void validate() const {
    const Shape s = image.shape;
    if (image.rgb.size() != s.size() * 3) throw InputError("image buffer size mismatch");
    if (prev_mask.shape() != s || human.shape() != s || pseudo.shape() != s ||
        human.negative.shape() != s || pseudo.negative.shape() != s) {
      throw InputError("segmentation input planes do not share the image shape " + to_string(s));
    }
    if (human.source != ClickSource::kHuman || pseudo.source != ClickSource::kPseudo) {
      throw InputError("segmentation input encodings have swapped sources");
    }
    for (const Click& c : human_clicks) require_in_bounds(c, s);
    for (const Click& c : pseudo_clicks) require_in_bounds(c, s);
  }
};

}  // namespace clickloop
