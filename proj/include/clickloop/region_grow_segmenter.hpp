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
#include <cmath>
#include <cstdint>
#include <limits>
#include <queue>
#include <string>
#include <tuple>
#include <vector>

#include "clickloop/mask_core.hpp"
#include "clickloop/segmenter.hpp"

namespace clickloop {

struct RegionGrowConfig {
  double intensity_weight = 100.0;  // cost per unit of intensity change, in pixels
  double uncertainty_band = 2.0;   // pixels

  void validate() const {
    if (!(intensity_weight >= 0.0) || !std::isfinite(intensity_weight)) {
      throw ConfigError("region-grow: intensity_weight must be finite and >= 0");
    }
    if (!(uncertainty_band >= 0.0) || !std::isfinite(uncertainty_band)) {
      throw ConfigError("region-grow: uncertainty_band must be finite and >= 0");
    }
  }
};

/// Result of the seeded geodesic partition.
struct SeedPartition {
  Grid<int> seed;        // index into the seed list, per pixel
  Grid<double> cost;     // geodesic cost to that seed
};

namespace detail {

/// Least accumulated intensity change along any 8-connected path from `source`.
inline Grid<double> intensity_path_cost(const Image& image, PixelCoord source) {
  const Shape shape = image.shape;
  Grid<double> dist(shape, std::numeric_limits<double>::infinity());
  using Entry = std::tuple<double, int, int>;  // cost, row, col
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> queue;
  dist[source] = 0.0;
  queue.emplace(0.0, source.row, source.col);
  static constexpr int kDr[8] = {-1, 1, 0, 0, -1, -1, 1, 1};
  static constexpr int kDc[8] = {0, 0, -1, 1, -1, 1, -1, 1};
  while (!queue.empty()) {
    const auto [cost, row, col] = queue.top();
    queue.pop();
    if (cost != dist(row, col)) continue;
    const double ip = image.intensity(row, col);
    for (int k = 0; k < 8; ++k) {
      const PixelCoord q{row + kDr[k], col + kDc[k]};
      if (!shape.contains(q)) continue;
      const double c = cost + std::abs(static_cast<double>(image.intensity(q.row, q.col)) - ip);
      if (c < dist[q]) {
        dist[q] = c;
        queue.emplace(c, q.row, q.col);
      }
    }
  }
  return dist;
}

}  // namespace detail

/// Seeded geodesic labelling. Reaching pixel q from seed s costs
/// |q - s| + weight * A_s(q), where |.| is the Euclidean distance and A_s(q)
/// the least accumulated intensity change over 8-connected paths from s.
/// Each pixel takes the cheapest seed; equal costs go to the earlier seed.
/// With weight 0 this is exactly the nearest-seed Voronoi partition.
inline SeedPartition geodesic_partition(const Image& image, const std::vector<PixelCoord>& seeds,
                                        double intensity_weight) {
  const Shape shape = image.shape;
  SeedPartition out{Grid<int>(shape, -1),
                    Grid<double>(shape, std::numeric_limits<double>::infinity())};
  for (int s = 0; s < static_cast<int>(seeds.size()); ++s) {
    const PixelCoord origin = seeds[s];
    if (!shape.contains(origin)) throw InputError("region-grow: seed outside image");
    if (std::find(seeds.begin(), seeds.begin() + s, origin) != seeds.begin() + s) {
      continue;  // duplicate seed position: first wins
    }
    Grid<double> acc;
    if (intensity_weight > 0.0) acc = detail::intensity_path_cost(image, origin);
    for (int r = 0; r < shape.height; ++r) {
      for (int c = 0; c < shape.width; ++c) {
        const double dr = r - origin.row;
        const double dc = c - origin.col;
        double cost = std::sqrt(dr * dr + dc * dc);
        if (intensity_weight > 0.0) cost += intensity_weight * acc(r, c);
        if (cost < out.cost(r, c)) {
          out.cost(r, c) = cost;
          out.seed(r, c) = s;
        }
      }
    }
  }
  return out;
}

/// Classical baseline: every click (human or pseudo) seeds a geodesic region
/// and each pixel takes the polarity of its cheapest seed. Probabilities ramp
/// linearly from 0.5 at the decision boundary to 0 / 1 over the uncertainty
/// band; the band on each side is reported as a 0.5-valued error estimate.
class RegionGrowSegmenter final : public Segmenter {
 public:
  explicit RegionGrowSegmenter(RegionGrowConfig cfg = {}) : cfg_(cfg) { cfg_.validate(); }

  std::string name() const override { return "region-grow"; }

  SegmenterOutput predict(const SegmentationInput& input) override {
    input.validate();
    const Shape shape = input.shape();
    std::vector<PixelCoord> seeds;
    std::vector<bool> positive;
    for (const auto* clicks : {&input.human_clicks, &input.pseudo_clicks}) {
      for (const Click& c : *clicks) {
        seeds.push_back(c.pos);
        positive.push_back(c.positive());
      }
    }
    if (std::find(positive.begin(), positive.end(), true) == positive.end()) {
      return {input.prev_mask, ErrorMapPair::zeros(shape)};
    }

    const auto part = geodesic_partition(input.image, seeds, cfg_.intensity_weight);
    BinaryMask fg(shape);
    for (std::size_t i = 0; i < fg.size(); ++i) {
      fg.values()[i] = positive[static_cast<std::size_t>(part.seed.values()[i])] ? 1 : 0;
    }
    return soften(fg);
  }

  /// Turns a hard labelling into probability and error maps.
  SegmenterOutput soften(const BinaryMask& fg) const {
    const Shape shape = fg.shape();
    const auto d_in = distance_transform(fg, BorderMode::kIgnore);
    const auto d_out = distance_transform(~fg, BorderMode::kIgnore);
    const double band = cfg_.uncertainty_band;
    SegmenterOutput out{ProbabilityMap(shape, 0.0), ErrorMapPair::zeros(shape)};
    for (std::size_t i = 0; i < fg.size(); ++i) {
      const bool inside = fg.values()[i] != 0;
      const double d = inside ? d_in.values()[i] : d_out.values()[i];
      const double ramp = band > 0.0 ? std::min(1.0, d / band) : 1.0;
      out.prob.values()[i] = inside ? 0.5 + 0.5 * ramp : 0.5 - 0.5 * ramp;
      if (d <= band) (inside ? out.errors.fp : out.errors.fn).values()[i] = 0.5;
    }
    return out;
  }

 private:
  RegionGrowConfig cfg_;
};

}  // namespace clickloop
