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

// Pixel-level primitives shared by the interaction loop: mask algebra, IoU,
// connected components, exact Euclidean distance transform and region centers.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "clickloop/errors.hpp"
#include "clickloop/grid.hpp"

namespace clickloop {

enum class Connectivity { kFour = 4, kEight = 8 };

/// How positions outside the image are treated by the distance transform.
enum class BorderMode {
  kBackground,  ///< outside counts as false; distances never exceed the gap to the border
  kIgnore,      ///< only in-image false pixels count
};

struct Region {
  int label = 0;
  std::vector<PixelCoord> pixels;  // raster order
  std::size_t area = 0;
  PixelCoord bbox_origin{};  // (min_row, min_col)
};

inline double iou(const BinaryMask& a, const BinaryMask& b) {
  require_same_shape(a, b, "iou");
  std::size_t inter = 0;
  std::size_t uni = 0;
  auto av = a.values();
  auto bv = b.values();
  for (std::size_t i = 0; i < av.size(); ++i) {
    inter += static_cast<std::size_t>(av[i] & bv[i]);
    uni += static_cast<std::size_t>(av[i] | bv[i]);
  }
  if (uni == 0) return 1.0;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

/// Labels are 1..K in raster-scan discovery order.
inline std::vector<Region> connected_components(const BinaryMask& mask,
                                                Connectivity conn = Connectivity::kEight) {
  const int h = mask.height();
  const int w = mask.width();
  Grid<int> labels(mask.shape(), 0);
  std::vector<Region> regions;
  std::vector<PixelCoord> stack;

  static constexpr int kDr[8] = {-1, 1, 0, 0, -1, -1, 1, 1};
  static constexpr int kDc[8] = {0, 0, -1, 1, -1, 1, -1, 1};
  const int neighbours = conn == Connectivity::kEight ? 8 : 4;

  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      if (!mask.test(r, c) || labels(r, c) != 0) continue;
      Region region;
      region.label = static_cast<int>(regions.size()) + 1;
      labels(r, c) = region.label;
      stack.push_back({r, c});
      while (!stack.empty()) {
        PixelCoord p = stack.back();
        stack.pop_back();
        region.pixels.push_back(p);
        for (int k = 0; k < neighbours; ++k) {
          PixelCoord q{p.row + kDr[k], p.col + kDc[k]};
          if (!mask.contains(q) || !mask.test(q) || labels[q] != 0) continue;
          labels[q] = region.label;
          stack.push_back(q);
        }
      }
      std::sort(region.pixels.begin(), region.pixels.end());
      region.area = region.pixels.size();
      region.bbox_origin = region.pixels.front();
      for (const PixelCoord& p : region.pixels) {
        region.bbox_origin.col = std::min(region.bbox_origin.col, p.col);
      }
      regions.push_back(std::move(region));
    }
  }
  return regions;
}

/// Largest area wins; ties go to the lexicographically smallest bbox origin,
/// then to the lowest label.
inline std::optional<Region> largest_region(const std::vector<Region>& regions) {
  const Region* best = nullptr;
  for (const Region& r : regions) {
    if (best == nullptr || r.area > best->area ||
        (r.area == best->area && (r.bbox_origin < best->bbox_origin ||
                                  (r.bbox_origin == best->bbox_origin && r.label < best->label)))) {
      best = &r;
    }
  }
  if (best == nullptr) return std::nullopt;
  return *best;
}

namespace detail {

inline constexpr std::int64_t kInfSq = std::numeric_limits<std::int64_t>::max() / 4;

// Exact 1-D squared distance transform (lower envelope of parabolas).
inline void squared_edt_1d(const std::vector<std::int64_t>& f, std::vector<std::int64_t>& d,
                           std::vector<int>& v, std::vector<double>& z) {
  const int n = static_cast<int>(f.size());
  d.assign(n, kInfSq);
  v.assign(n, 0);
  z.assign(n + 1, 0.0);
  int k = -1;
  for (int q = 0; q < n; ++q) {
    if (f[q] >= kInfSq) continue;
    if (k < 0) {
      k = 0;
      v[0] = q;
      z[0] = -std::numeric_limits<double>::infinity();
      z[1] = std::numeric_limits<double>::infinity();
      continue;
    }
    auto intersect = [&](int a, int b) {
      return (static_cast<double>(f[a] + static_cast<std::int64_t>(a) * a) -
              static_cast<double>(f[b] + static_cast<std::int64_t>(b) * b)) /
             (2.0 * (a - b));
    };
    double s = intersect(q, v[k]);
    while (s <= z[k]) {  // z[0] is -inf, so k never drops below 0
      --k;
      s = intersect(q, v[k]);
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = std::numeric_limits<double>::infinity();
  }
  if (k < 0) return;
  int j = 0;
  for (int q = 0; q < n; ++q) {
    while (z[j + 1] < q) ++j;
    const std::int64_t dq = q - v[j];
    d[q] = dq * dq + f[v[j]];
  }
}

}  // namespace detail

/// Squared Euclidean distance from each true pixel to the nearest false pixel,
/// 0 at false pixels. Exact integer arithmetic. Under BorderMode::kIgnore a mask
/// without false pixels yields detail::kInfSq everywhere.
inline Grid<std::int64_t> squared_distance_transform(const BinaryMask& mask,
                                                     BorderMode border = BorderMode::kBackground) {
  const int pad = border == BorderMode::kBackground ? 1 : 0;
  const int h = mask.height() + 2 * pad;
  const int w = mask.width() + 2 * pad;
  auto is_true = [&](int r, int c) {
    const int mr = r - pad;
    const int mc = c - pad;
    if (mr < 0 || mc < 0 || mr >= mask.height() || mc >= mask.width()) return false;
    return mask.test(mr, mc);
  };

  Grid<std::int64_t> work(h, w, 0);
  std::vector<std::int64_t> f;
  std::vector<std::int64_t> d;
  std::vector<int> v;
  std::vector<double> z;

  f.resize(h);
  for (int c = 0; c < w; ++c) {
    for (int r = 0; r < h; ++r) f[r] = is_true(r, c) ? detail::kInfSq : 0;
    detail::squared_edt_1d(f, d, v, z);
    for (int r = 0; r < h; ++r) work(r, c) = d[r];
  }
  f.resize(w);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) f[c] = work(r, c);
    detail::squared_edt_1d(f, d, v, z);
    for (int c = 0; c < w; ++c) work(r, c) = d[c];
  }

  Grid<std::int64_t> out(mask.shape(), 0);
  for (int r = 0; r < mask.height(); ++r) {
    for (int c = 0; c < mask.width(); ++c) out(r, c) = work(r + pad, c + pad);
  }
  return out;
}

inline DistanceGrid distance_transform(const BinaryMask& mask,
                                       BorderMode border = BorderMode::kBackground) {
  const auto sq = squared_distance_transform(mask, border);
  DistanceGrid out(mask.shape(), 0.0);
  for (std::size_t i = 0; i < sq.size(); ++i) {
    const std::int64_t v = sq.values()[i];
    out.values()[i] = v >= detail::kInfSq ? std::numeric_limits<double>::infinity()
                                          : std::sqrt(static_cast<double>(v));
  }
  return out;
}

/// The region pixel deepest inside the region; ties go to the smallest (row, col).
inline PixelCoord region_center(const Region& region, const DistanceGrid& dt) {
  if (region.pixels.empty()) throw PreconditionError("region_center: empty region");
  PixelCoord best = region.pixels.front();
  double best_value = -1.0;
  for (const PixelCoord& p : region.pixels) {
    if (!dt.contains(p)) throw ShapeError("region_center: pixel outside distance grid");
    const double v = dt[p];
    if (v > best_value || (v == best_value && p < best)) {
      best = p;
      best_value = v;
    }
  }
  return best;
}

/// Mask holding only the pixels of `region`.
inline BinaryMask region_mask(const Region& region, Shape shape) {
  BinaryMask m(shape);
  for (const PixelCoord& p : region.pixels) m.set(p);
  return m;
}

/// Center of a region measured against its own isolated mask.
inline PixelCoord region_center(const Region& region, Shape shape) {
  return region_center(region, distance_transform(region_mask(region, shape)));
}

inline void require_open_unit(double tau, const char* what) {
  if (!(tau > 0.0 && tau < 1.0)) {
    throw ConfigError(std::string(what) + ": threshold must lie in (0, 1), got " +
                      std::to_string(tau));
  }
}

inline BinaryMask threshold(const ProbabilityMap& p, double tau) {
  require_open_unit(tau, "threshold");
  BinaryMask out(p.shape());
  for (std::size_t i = 0; i < p.size(); ++i) out.values()[i] = p.values()[i] >= tau ? 1 : 0;
  return out;
}

inline BinaryMask erode(const BinaryMask& mask, double radius) {
  if (radius < 0.0) throw ConfigError("erode: radius must be non-negative");
  const auto dt = distance_transform(mask);
  BinaryMask out(mask.shape());
  for (std::size_t i = 0; i < mask.size(); ++i) out.values()[i] = dt.values()[i] > radius ? 1 : 0;
  return out;
}

}  // namespace clickloop
