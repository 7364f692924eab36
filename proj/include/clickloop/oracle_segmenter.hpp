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
#include <cstdint>
#include <string>
#include <vector>

#include "clickloop/error_analysis.hpp"
#include "clickloop/mask_core.hpp"
#include "clickloop/random.hpp"
#include "clickloop/segmenter.hpp"

namespace clickloop {

struct OracleNoiseConfig {
  int flip_blob_count = 0;
  int blob_radius = 5;
  double error_estimate_fidelity = 1.0;
  std::uint64_t rng_seed = 0;
  // Centre the first blob on the deepest pixel of the largest object region,
  // the spot a simulated user clicks on an empty mask.
  bool anchor_first_blob = false;

  void validate() const {
    if (flip_blob_count < 0) throw ConfigError("oracle: flip_blob_count must be >= 0");
    if (blob_radius < 0) throw ConfigError("oracle: blob_radius must be >= 0");
    if (!(error_estimate_fidelity >= 0.0 && error_estimate_fidelity <= 1.0)) {
      throw ConfigError("oracle: error_estimate_fidelity must lie in [0, 1]");
    }
  }
};

/// Width of the low-confidence rim of each error region at fidelity 0, in
/// units of blob radius.
inline constexpr double kOracleRimPerBlobRadius = 4.0;

/// Test double for a trained network: the ground truth corrupted by disjoint
/// disk-shaped flips. A click whose polarity agrees with the ground truth heals
/// every flipped blob containing it, permanently.
///
/// Emitted error maps are the true errors of the emitted map. Below fidelity 1
/// the estimate fades toward zero inside a rim of width
/// (1 - fidelity) * kOracleRimPerBlobRadius * blob_radius around each error
/// region, so the 0.5-binarized estimate is the error region eroded by that rim.
class OracleSegmenter final : public Segmenter {
 public:
  struct Blob {
    PixelCoord center;
    bool healed = false;
  };

  OracleSegmenter(BinaryMask gt, OracleNoiseConfig cfg) : gt_(std::move(gt)), cfg_(cfg) {
    cfg_.validate();
    place_blobs();
  }

  std::string name() const override { return "oracle"; }
  const std::vector<Blob>& blobs() const { return blobs_; }
  const BinaryMask& ground_truth() const { return gt_; }

  SegmenterOutput predict(const SegmentationInput& input) override {
    input.validate();
    if (input.shape() != gt_.shape()) {
      throw InputError("oracle: input shape " + to_string(input.shape()) +
                       " differs from ground truth " + to_string(gt_.shape()));
    }
    for (const auto* clicks : {&input.human_clicks, &input.pseudo_clicks}) {
      for (const Click& c : *clicks) heal(c);
    }

    BinaryMask pred = gt_;
    for (const Blob& b : blobs_) {
      if (b.healed) continue;
      for_each_blob_pixel(b, [&](PixelCoord p) { pred.set(p, !gt_.test(p)); });
    }
    for (const auto* clicks : {&input.human_clicks, &input.pseudo_clicks}) {
      for (const Click& c : *clicks) pred.set(c.pos, c.positive());
    }

    SegmenterOutput out;
    out.prob = ProbabilityMap::from_mask(pred);
    const auto truth = ground_truth_error_maps(out.prob, gt_, kDefaultTau);
    out.errors.fp = estimate(truth.m_fp);
    out.errors.fn = estimate(truth.m_fn);
    return out;
  }

  double rim_width() const {
    return (1.0 - cfg_.error_estimate_fidelity) * kOracleRimPerBlobRadius * cfg_.blob_radius;
  }

 private:
  template <typename F>
  void for_each_blob_pixel(const Blob& b, F&& f) const {
    const int r = cfg_.blob_radius;
    for (int dr = -r; dr <= r; ++dr) {
      for (int dc = -r; dc <= r; ++dc) {
        if (dr * dr + dc * dc > r * r) continue;
        PixelCoord p{b.center.row + dr, b.center.col + dc};
        if (gt_.contains(p)) f(p);
      }
    }
  }

  bool in_blob(const Blob& b, PixelCoord p) const {
    const int dr = p.row - b.center.row;
    const int dc = p.col - b.center.col;
    return dr * dr + dc * dc <= cfg_.blob_radius * cfg_.blob_radius;
  }

  void heal(const Click& c) {
    if (!gt_.contains(c.pos) || c.positive() != gt_.test(c.pos)) return;
    for (Blob& b : blobs_) {
      if (!b.healed && in_blob(b, c.pos)) b.healed = true;
    }
  }

  // Centers are kept 2R + 3 apart so flipped pixels of different blobs are
  // never 8-adjacent: every connected error region lies inside one blob.
  void place_blobs() {
    Rng rng(cfg_.rng_seed);
    const std::int64_t min_sep = 2 * cfg_.blob_radius + 3;
    constexpr int kMaxAttempts = 10000;
    int start = 0;
    if (cfg_.anchor_first_blob && cfg_.flip_blob_count > 0) {
      auto largest = largest_region(connected_components(gt_, Connectivity::kEight));
      if (largest) {
        blobs_.push_back({region_center(*largest, gt_.shape()), false});
        start = 1;
      }
    }
    for (int i = start; i < cfg_.flip_blob_count; ++i) {
      bool placed = false;
      for (int attempt = 0; attempt < kMaxAttempts && !placed; ++attempt) {
        PixelCoord c{uniform_int(rng, 0, gt_.height() - 1), uniform_int(rng, 0, gt_.width() - 1)};
        placed = std::all_of(blobs_.begin(), blobs_.end(), [&](const Blob& b) {
          const std::int64_t dr = c.row - b.center.row;
          const std::int64_t dc = c.col - b.center.col;
          return dr * dr + dc * dc >= min_sep * min_sep;
        });
        if (placed) blobs_.push_back({c, false});
      }
      if (!placed) {
        throw ConfigError("oracle: cannot place " + std::to_string(cfg_.flip_blob_count) +
                          " disjoint blobs of radius " + std::to_string(cfg_.blob_radius) +
                          " in a " + to_string(gt_.shape()) + " image");
      }
    }
  }

  ProbabilityMap estimate(const BinaryMask& truth) const {
    ProbabilityMap out(truth.shape(), 0.0);
    const double rim = rim_width();
    if (rim <= 0.0) {
      for (std::size_t i = 0; i < truth.size(); ++i) out.values()[i] = truth.values()[i];
      return out;
    }
    const auto depth = distance_transform(truth, BorderMode::kIgnore);
    for (std::size_t i = 0; i < truth.size(); ++i) {
      if (!truth.values()[i]) continue;
      out.values()[i] = std::min(1.0, depth.values()[i] / (2.0 * rim));
    }
    return out;
  }

  BinaryMask gt_;
  OracleNoiseConfig cfg_;
  std::vector<Blob> blobs_;
};

}  // namespace clickloop
