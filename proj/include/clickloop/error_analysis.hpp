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

// False-positive / false-negative error maps: ground-truth supervision targets,
// pseudo-click extraction from estimated maps, and error-map post-processing.

#pragma once

#include <algorithm>
#include <optional>

#include "clickloop/click.hpp"
#include "clickloop/grid.hpp"
#include "clickloop/mask_core.hpp"

namespace clickloop {

inline constexpr double kDefaultTau = 0.5;

/// Estimated error maps emitted alongside a segmentation.
struct ErrorMapPair {
  ProbabilityMap fp;
  ProbabilityMap fn;

  static ErrorMapPair zeros(Shape s) { return {ProbabilityMap(s, 0.0), ProbabilityMap(s, 0.0)}; }
  friend bool operator==(const ErrorMapPair&, const ErrorMapPair&) = default;
};

struct GroundTruthErrors {
  BinaryMask m_fp;  // predicted foreground that is background
  BinaryMask m_fn;  // missed foreground
};

inline GroundTruthErrors ground_truth_error_maps(const ProbabilityMap& p, const BinaryMask& m,
                                                 double tau = kDefaultTau) {
  require_same_shape(p, m, "ground_truth_error_maps");
  require_open_unit(tau, "ground_truth_error_maps");
  GroundTruthErrors out{BinaryMask(m.shape()), BinaryMask(m.shape())};
  for (std::size_t i = 0; i < m.size(); ++i) {
    const bool fg = m.values()[i] != 0;
    const bool pred = p.values()[i] >= tau;
    out.m_fp.values()[i] = (!fg && pred) ? 1 : 0;
    out.m_fn.values()[i] = (fg && !pred) ? 1 : 0;
  }
  return out;
}

/// The error region a click should target, and which map it came from.
struct ErrorRegionChoice {
  Region region;
  bool from_fp = false;
};

/// Largest connected region across both binary error masks. Exact area ties
/// prefer the FN mask, then the smaller bbox origin, then the lower label.
inline std::optional<ErrorRegionChoice> select_error_region(const BinaryMask& fp,
                                                            const BinaryMask& fn,
                                                            Connectivity conn) {
  require_same_shape(fp, fn, "select_error_region");
  auto best_fp = largest_region(connected_components(fp, conn));
  auto best_fn = largest_region(connected_components(fn, conn));
  if (!best_fp && !best_fn) return std::nullopt;
  if (!best_fp) return ErrorRegionChoice{std::move(*best_fn), false};
  if (!best_fn) return ErrorRegionChoice{std::move(*best_fp), true};
  if (best_fp->area > best_fn->area) return ErrorRegionChoice{std::move(*best_fp), true};
  return ErrorRegionChoice{std::move(*best_fn), false};
}

struct PseudoClickOptions {
  double tau = kDefaultTau;
  std::size_t min_area = 1;
  Connectivity connectivity = Connectivity::kEight;
};

/// One pseudo click at the center of the largest binarized error region, or
/// nothing when no region reaches `min_area`. FP regions yield negative clicks.
inline std::optional<Click> generate_pseudo_click(const ErrorMapPair& errs,
                                                  const PseudoClickOptions& opts = {}) {
  require_same_shape(errs.fp, errs.fn, "generate_pseudo_click");
  auto choice = select_error_region(threshold(errs.fp, opts.tau), threshold(errs.fn, opts.tau),
                                    opts.connectivity);
  if (!choice || choice->region.area < std::max<std::size_t>(opts.min_area, 1)) {
    return std::nullopt;
  }
  Click c;
  c.pos = region_center(choice->region, errs.fp.shape());
  c.polarity = choice->from_fp ? Polarity::kNegative : Polarity::kPositive;
  c.source = ClickSource::kPseudo;
  return c;
}

/// Post-processing refinement: FP probability is removed from the
/// segmentation and FN probability added back, clamped to [0, 1].
inline ProbabilityMap subtract_error_maps(const ProbabilityMap& p, const ErrorMapPair& errs) {
  require_same_shape(p, errs.fp, "subtract_error_maps");
  require_same_shape(p, errs.fn, "subtract_error_maps");
  ProbabilityMap out(p.shape());
  for (std::size_t i = 0; i < p.size(); ++i) {
    out.values()[i] = std::clamp(p.values()[i] - errs.fp.values()[i] + errs.fn.values()[i], 0.0, 1.0);
  }
  return out;
}

}  // namespace clickloop
