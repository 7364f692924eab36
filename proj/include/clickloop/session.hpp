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

// The interaction loop. Each human click triggers a forward pass; in
// pseudo-click mode the system then places its own click(s) at the largest
// predicted error region and runs another pass, in post-process mode it folds
// the predicted error maps into the segmentation instead.

#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "clickloop/click.hpp"
#include "clickloop/click_encoding.hpp"
#include "clickloop/error_analysis.hpp"
#include "clickloop/mask_core.hpp"
#include "clickloop/random.hpp"
#include "clickloop/segmenter.hpp"

namespace clickloop {

enum class RefinementMode { kNone, kPostProcess, kPseudoClick };

inline std::string_view to_string(RefinementMode m) {
  switch (m) {
    case RefinementMode::kNone: return "none";
    case RefinementMode::kPostProcess: return "post";
    case RefinementMode::kPseudoClick: return "pseudo";
  }
  return "none";
}

inline RefinementMode parse_refinement_mode(std::string_view s) {
  if (s == "none") return RefinementMode::kNone;
  if (s == "post" || s == "post_process") return RefinementMode::kPostProcess;
  if (s == "pseudo" || s == "pseudo_click") return RefinementMode::kPseudoClick;
  throw ConfigError("unknown refinement mode '" + std::string(s) + "'");
}

/// Parameters of the random (order-free) click simulation.
struct RandomClickConfig {
  int max_positive = 10;  // N_pos drawn from [1, max_positive]
  int max_negative = 10;  // N_neg drawn from [0, max_negative]
  double margin = 5.0;    // erosion margin from the object boundary
  double min_distance = 10.0;
  int max_retries = 50;
};

struct SessionConfig {
  double tau = kDefaultTau;
  int disk_radius = kDefaultDiskRadius;
  int pseudo_clicks_per_round = 1;
  RefinementMode refinement_mode = RefinementMode::kPseudoClick;
  int click_budget = 20;
  std::vector<double> target_ious{0.85, 0.90};
  Connectivity connectivity = Connectivity::kEight;
  std::size_t min_error_area = 1;
  std::uint64_t rng_seed = 0;
  RandomClickConfig random;

  void validate() const {
    require_open_unit(tau, "session");
    if (disk_radius < 0) throw ConfigError("disk_radius must be >= 0");
    if (pseudo_clicks_per_round < 0) throw ConfigError("pseudo_clicks_per_round must be >= 0");
    if (click_budget < 1) throw ConfigError("click_budget must be >= 1");
    if (target_ious.empty()) throw ConfigError("target_ious must not be empty");
    for (std::size_t i = 0; i < target_ious.size(); ++i) {
      const double t = target_ious[i];
      if (!(t > 0.0 && t <= 1.0)) throw ConfigError("target IoUs must lie in (0, 1]");
      if (i > 0 && !(t > target_ious[i - 1])) {
        throw ConfigError("target IoUs must be strictly increasing");
      }
    }
  }

  double max_target() const { return target_ious.back(); }

  PseudoClickOptions pseudo_options() const { return {tau, min_error_area, connectivity}; }
};

struct SessionState {
  Image image;
  std::optional<BinaryMask> gt;  // absent in human-evaluation mode
  std::vector<Click> human_clicks;
  std::vector<Click> pseudo_clicks;
  DiskEncoding human_enc;
  DiskEncoding pseudo_enc;
  ProbabilityMap prev_mask;  // prob map of the last completed forward pass
  std::optional<SegmenterOutput> current;
  int round = 0;

  static SessionState fresh(Image image, std::optional<BinaryMask> gt, const SessionConfig& cfg) {
    cfg.validate();
    if (gt && gt->shape() != image.shape) {
      throw ShapeError("ground truth " + to_string(gt->shape()) + " does not match image " +
                       to_string(image.shape));
    }
    SessionState s;
    const Shape shape = image.shape;
    s.image = std::move(image);
    s.gt = std::move(gt);
    s.human_enc = DiskEncoding(shape, ClickSource::kHuman, cfg.disk_radius);
    s.pseudo_enc = DiskEncoding(shape, ClickSource::kPseudo, cfg.disk_radius);
    s.prev_mask = ProbabilityMap(shape, 0.0);
    return s;
  }

  Shape shape() const { return image.shape; }

  /// Current thresholded mask (all background before the first click).
  BinaryMask mask(double tau) const { return threshold(prev_mask, tau); }

  SegmentationInput input() const {
    return {image, prev_mask, human_enc, pseudo_enc, human_clicks, pseudo_clicks};
  }
};

struct RoundResult {
  int round = 0;
  Click human;
  std::vector<Click> pseudo;      // placed this round
  ProbabilityMap prob_initial;    // after the human-click pass
  ProbabilityMap prob_final;      // after refinement
  std::optional<double> iou_initial;
  std::optional<double> iou_final;
  int forward_passes = 0;
};

/// Applies one human click and the configured refinement, mutating `state`.
inline RoundResult apply_human_click(SessionState& state, Click click, Segmenter& seg,
                                     const SessionConfig& cfg) {
  if (click.source != ClickSource::kHuman) throw InputError("apply_human_click: click is not human");
  require_in_bounds(click, state.shape());

  RoundResult result;
  result.round = state.round + 1;
  click.index = result.round;
  state.human_clicks.push_back(click);
  state.human_enc = add_click(std::move(state.human_enc), click);
  result.human = click;

  auto forward = [&]() {
    SegmenterOutput out = seg.predict(state.input());
    if (out.prob.shape() != state.shape() || out.errors.fp.shape() != state.shape() ||
        out.errors.fn.shape() != state.shape()) {
      throw ShapeError("segmenter '" + seg.name() + "' returned maps of the wrong shape");
    }
    state.prev_mask = out.prob;
    ++result.forward_passes;
    return out;
  };
  auto score = [&](const ProbabilityMap& p) -> std::optional<double> {
    if (!state.gt) return std::nullopt;
    return iou(threshold(p, cfg.tau), *state.gt);
  };

  SegmenterOutput a = forward();
  result.prob_initial = a.prob;
  result.iou_initial = score(a.prob);

  if (cfg.refinement_mode == RefinementMode::kPseudoClick) {
    for (int i = 0; i < cfg.pseudo_clicks_per_round; ++i) {
      auto pc = generate_pseudo_click(a.errors, cfg.pseudo_options());
      if (!pc) break;
      pc->index = result.round;
      state.pseudo_clicks.push_back(*pc);
      state.pseudo_enc = add_click(std::move(state.pseudo_enc), *pc);
      result.pseudo.push_back(*pc);
      a = forward();
    }
  } else if (cfg.refinement_mode == RefinementMode::kPostProcess) {
    a.prob = subtract_error_maps(a.prob, a.errors);
  }

  state.prev_mask = a.prob;
  result.prob_final = a.prob;
  result.iou_final = score(a.prob);
  state.current = std::move(a);
  state.round = result.round;
  return result;
}

/// Simulated human: a click at the center of the largest misclassified
/// region, positive on missed foreground and negative on spill. Empty when
/// the thresholded prediction already equals the ground truth.
inline std::optional<Click> iterative_next_click(const ProbabilityMap& prob, const BinaryMask& gt,
                                                 const SessionConfig& cfg) {
  const auto errs = ground_truth_error_maps(prob, gt, cfg.tau);
  auto choice = select_error_region(errs.m_fp, errs.m_fn, cfg.connectivity);
  if (!choice) return std::nullopt;
  Click c;
  c.pos = region_center(choice->region, gt.shape());
  c.polarity = choice->from_fp ? Polarity::kNegative : Polarity::kPositive;
  c.source = ClickSource::kHuman;
  return c;
}

namespace detail {

inline std::vector<PixelCoord> pixels_of(const BinaryMask& m) {
  std::vector<PixelCoord> out;
  for (int r = 0; r < m.height(); ++r) {
    for (int c = 0; c < m.width(); ++c) {
      if (m.test(r, c)) out.push_back({r, c});
    }
  }
  return out;
}

// Draws up to `count` distinct pixels from `pool`, preferring candidates at
// least `min_dist` from everything already in `taken`; after `retries` misses
// the spacing rule is dropped for that draw.
inline std::vector<PixelCoord> spaced_sample(std::vector<PixelCoord> pool, int count,
                                             std::vector<PixelCoord>& taken,
                                             const RandomClickConfig& cfg, Rng& rng) {
  std::vector<PixelCoord> out;
  const double min_d2 = cfg.min_distance * cfg.min_distance;
  auto spaced = [&](PixelCoord p) {
    return std::all_of(taken.begin(), taken.end(), [&](PixelCoord q) {
      const double dr = p.row - q.row;
      const double dc = p.col - q.col;
      return dr * dr + dc * dc >= min_d2;
    });
  };
  while (static_cast<int>(out.size()) < count && !pool.empty()) {
    std::size_t pick = 0;
    bool found = false;
    for (int attempt = 0; attempt < cfg.max_retries && !found; ++attempt) {
      pick = uniform_int<std::size_t>(rng, 0, pool.size() - 1);
      found = spaced(pool[pick]);
    }
    if (!found) pick = uniform_int<std::size_t>(rng, 0, pool.size() - 1);
    out.push_back(pool[pick]);
    taken.push_back(pool[pick]);
    pool[pick] = pool.back();
    pool.pop_back();
  }
  return out;
}

}  // namespace detail

/// Order-free click set for training-style simulation: positives inside the
/// eroded object, negatives inside the eroded background. When erosion
/// empties the object the uneroded object is used.
inline std::vector<Click> random_click_set(const BinaryMask& gt, const RandomClickConfig& cfg,
                                           Rng& rng) {
  if (!gt.any()) throw InputError("random_click_set: ground truth is empty");
  if (cfg.max_positive < 1 || cfg.max_negative < 0) {
    throw ConfigError("random_click_set: bad click count range");
  }
  auto pos_pool = detail::pixels_of(erode(gt, cfg.margin));
  if (pos_pool.empty()) pos_pool = detail::pixels_of(gt);
  const auto neg_pool = detail::pixels_of(erode(~gt, cfg.margin));

  const int n_pos = uniform_int(rng, 1, cfg.max_positive);
  const int n_neg = uniform_int(rng, 0, cfg.max_negative);
  std::vector<PixelCoord> taken;
  std::vector<Click> clicks;
  for (PixelCoord p : detail::spaced_sample(pos_pool, n_pos, taken, cfg, rng)) {
    clicks.push_back({p, Polarity::kPositive, ClickSource::kHuman, 0});
  }
  for (PixelCoord p : detail::spaced_sample(neg_pool, n_neg, taken, cfg, rng)) {
    clicks.push_back({p, Polarity::kNegative, ClickSource::kHuman, 0});
  }
  return clicks;
}

struct RoundRecord {
  int round = 0;
  Click human;
  std::vector<Click> pseudo;
  std::optional<double> iou_initial;
  std::optional<double> iou;  // after refinement; the value the metrics use

  friend bool operator==(const RoundRecord&, const RoundRecord&) = default;
};

inline RoundRecord to_record(const RoundResult& r) {
  return {r.round, r.human, r.pseudo, r.iou_initial, r.iou_final};
}

struct SessionTrace {
  std::vector<RoundRecord> rounds;
  BinaryMask final_mask;

  std::vector<double> ious() const {
    std::vector<double> out;
    for (const auto& r : rounds) out.push_back(r.iou.value_or(0.0));
    return out;
  }
};

/// Automatic evaluation: iterative simulated clicks until the highest target
/// IoU or the click budget is reached. Pseudo clicks never count as clicks.
inline SessionTrace run_simulated_session(const Image& image, const BinaryMask& gt, Segmenter& seg,
                                          const SessionConfig& cfg) {
  cfg.validate();
  if (!gt.any()) throw InputError("run_simulated_session: ground truth is empty");
  SessionState state = SessionState::fresh(image, gt, cfg);
  SessionTrace trace;
  while (static_cast<int>(trace.rounds.size()) < cfg.click_budget) {
    auto click = iterative_next_click(state.prev_mask, gt, cfg);
    if (!click) break;
    const RoundResult r = apply_human_click(state, *click, seg, cfg);
    trace.rounds.push_back(to_record(r));
    if (*r.iou_final >= cfg.max_target()) break;
  }
  trace.final_mask = state.mask(cfg.tau);
  return trace;
}

}  // namespace clickloop
