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

// Segmentation losses with analytic gradients with respect to the predicted
// probabilities. All losses read a prediction p against a 0/1 target through
// the correct-class probability p_t = p where the target is set and 1 - p
// elsewhere.

#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include "clickloop/error_analysis.hpp"
#include "clickloop/errors.hpp"
#include "clickloop/grid.hpp"

namespace clickloop {

/// Normaliser of the normalized focal loss.
enum class NflNormalization {
  kProbabilitySum,  ///< Z = sum of p_t over the map
  kFocalSum,        ///< Z = sum of (1 - p_t)^gamma over the map
};

struct LossWeights {
  double lambda1 = 1.0;  // segmentation head
  double lambda2 = 0.5;  // FP head
  double lambda3 = 0.5;  // FN head
  double gamma = 2.0;
  double tau = kDefaultTau;
  double eps = 1e-7;
  NflNormalization normalization = NflNormalization::kProbabilitySum;

  void validate() const {
    if (!(lambda1 > 0 && lambda2 > 0 && lambda3 > 0)) {
      throw ConfigError("loss weights must be strictly positive");
    }
    if (!(gamma > 0)) throw ConfigError("focusing parameter gamma must be positive");
    if (!(tau > 0 && tau < 1)) throw ConfigError("tau must lie in (0, 1)");
    if (!(eps > 0 && eps < 1e-3)) throw ConfigError("eps must lie in (0, 1e-3)");
  }
};

struct LossResult {
  double value = 0.0;
  Grid<double> grad;  // d loss / d p, per pixel
};

namespace detail {

struct CorrectClass {
  double pt = 0.0;
  double sign = 1.0;    // d p_t / d p
  bool active = true;   // false when p_t sits on the clamp
};

inline CorrectClass correct_class(double p, bool target, double eps) {
  const double raw = target ? p : 1.0 - p;
  CorrectClass out;
  out.sign = target ? 1.0 : -1.0;
  out.pt = std::clamp(raw, eps, 1.0 - eps);
  out.active = raw > eps && raw < 1.0 - eps;
  return out;
}

// (1 - p_t)^gamma * log p_t and its derivative in p_t.
inline double focal_term(double pt, double gamma) { return std::pow(1.0 - pt, gamma) * std::log(pt); }
inline double focal_term_deriv(double pt, double gamma) {
  return -gamma * std::pow(1.0 - pt, gamma - 1.0) * std::log(pt) + std::pow(1.0 - pt, gamma) / pt;
}

inline void require_gamma(double gamma) {
  if (!(gamma > 0)) throw ConfigError("focusing parameter gamma must be positive");
}

}  // namespace detail

/// Normalized focal loss, -(1/Z) * sum (1 - p_t)^gamma log p_t. The gradient
/// includes the dependence of Z on p.
inline LossResult nfl(const ProbabilityMap& p, const BinaryMask& target, double gamma = 2.0,
                      double eps = 1e-7,
                      NflNormalization norm = NflNormalization::kProbabilitySum) {
  require_same_shape(p, target, "nfl");
  detail::require_gamma(gamma);
  const std::size_t n = p.size();
  std::vector<detail::CorrectClass> cc(n);
  double s = 0.0;
  double z = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    cc[i] = detail::correct_class(p.values()[i], target.values()[i] != 0, eps);
    s += detail::focal_term(cc[i].pt, gamma);
    z += norm == NflNormalization::kProbabilitySum ? cc[i].pt : std::pow(1.0 - cc[i].pt, gamma);
  }
  LossResult out{0.0, Grid<double>(p.shape(), 0.0)};
  if (z <= 0.0) return out;  // focal normaliser vanishes only on a perfect map
  out.value = -s / z;
  for (std::size_t i = 0; i < n; ++i) {
    if (!cc[i].active) continue;
    const double pt = cc[i].pt;
    const double dz = norm == NflNormalization::kProbabilitySum
                          ? 1.0
                          : -gamma * std::pow(1.0 - pt, gamma - 1.0);
    const double dl_dpt = -detail::focal_term_deriv(pt, gamma) / z + s / (z * z) * dz;
    out.grad.values()[i] = cc[i].sign * dl_dpt;
  }
  return out;
}

/// Mean binary cross entropy.
inline LossResult bce(const ProbabilityMap& p, const BinaryMask& target, double eps = 1e-7) {
  require_same_shape(p, target, "bce");
  const double n = static_cast<double>(p.size());
  LossResult out{0.0, Grid<double>(p.shape(), 0.0)};
  for (std::size_t i = 0; i < p.size(); ++i) {
    const auto cc = detail::correct_class(p.values()[i], target.values()[i] != 0, eps);
    out.value -= std::log(cc.pt) / n;
    if (cc.active) out.grad.values()[i] = -cc.sign / (cc.pt * n);
  }
  return out;
}

/// Mean focal loss.
inline LossResult fl(const ProbabilityMap& p, const BinaryMask& target, double gamma = 2.0,
                     double eps = 1e-7) {
  require_same_shape(p, target, "fl");
  detail::require_gamma(gamma);
  const double n = static_cast<double>(p.size());
  LossResult out{0.0, Grid<double>(p.shape(), 0.0)};
  for (std::size_t i = 0; i < p.size(); ++i) {
    const auto cc = detail::correct_class(p.values()[i], target.values()[i] != 0, eps);
    out.value -= detail::focal_term(cc.pt, gamma) / n;
    if (cc.active) out.grad.values()[i] = -cc.sign * detail::focal_term_deriv(cc.pt, gamma) / n;
  }
  return out;
}

/// 1 - soft intersection over soft union; 0 when both maps are empty.
inline LossResult soft_iou(const ProbabilityMap& p, const BinaryMask& target) {
  require_same_shape(p, target, "soft_iou");
  double inter = 0.0;
  double sum_p = 0.0;
  double sum_t = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double t = target.values()[i] ? 1.0 : 0.0;
    inter += p.values()[i] * t;
    sum_p += p.values()[i];
    sum_t += t;
  }
  const double uni = sum_p + sum_t - inter;
  LossResult out{0.0, Grid<double>(p.shape(), 0.0)};
  if (uni <= 0.0) return out;
  out.value = 1.0 - inter / uni;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double t = target.values()[i] ? 1.0 : 0.0;
    out.grad.values()[i] = -(t * uni - inter * (1.0 - t)) / (uni * uni);
  }
  return out;
}

/// Three-head loss over segmentation and estimated FP/FN maps.
struct CombinedLossResult {
  double value = 0.0;
  double seg = 0.0;  // unweighted head values
  double fp = 0.0;
  double fn = 0.0;
  Grid<double> grad_prob;
  Grid<double> grad_fp;
  Grid<double> grad_fn;
};

/// Variant with explicit error targets, which are constants for the gradient.
inline CombinedLossResult combined_loss(const ProbabilityMap& p, const ErrorMapPair& errs,
                                        const BinaryMask& m, const GroundTruthErrors& targets,
                                        const LossWeights& w) {
  w.validate();
  require_same_shape(p, m, "combined_loss");
  require_same_shape(p, errs.fp, "combined_loss");
  require_same_shape(p, errs.fn, "combined_loss");
  require_same_shape(p, targets.m_fp, "combined_loss");
  require_same_shape(p, targets.m_fn, "combined_loss");

  auto seg = nfl(p, m, w.gamma, w.eps, w.normalization);
  auto fp = nfl(errs.fp, targets.m_fp, w.gamma, w.eps, w.normalization);
  auto fn = nfl(errs.fn, targets.m_fn, w.gamma, w.eps, w.normalization);

  CombinedLossResult out;
  out.seg = seg.value;
  out.fp = fp.value;
  out.fn = fn.value;
  out.value = w.lambda1 * seg.value + w.lambda2 * fp.value + w.lambda3 * fn.value;
  out.grad_prob = std::move(seg.grad);
  out.grad_fp = std::move(fp.grad);
  out.grad_fn = std::move(fn.grad);
  for (double& g : out.grad_prob.values()) g *= w.lambda1;
  for (double& g : out.grad_fp.values()) g *= w.lambda2;
  for (double& g : out.grad_fn.values()) g *= w.lambda3;
  return out;
}

inline CombinedLossResult combined_loss(const ProbabilityMap& p, const ErrorMapPair& errs,
                                        const BinaryMask& m, const LossWeights& w = {}) {
  w.validate();
  return combined_loss(p, errs, m, ground_truth_error_maps(p, m, w.tau), w);
}

}  // namespace clickloop
