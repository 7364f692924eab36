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
#include <span>
#include <vector>

#include "clickloop/errors.hpp"
#include "clickloop/session.hpp"

namespace clickloop {

struct NocResult {
  int clicks = 0;
  bool failed = false;  // target not reached within the budget; clicks == budget

  friend bool operator==(const NocResult&, const NocResult&) = default;
};

/// Number of human clicks until the round-end IoU first reaches `target`.
inline NocResult noc(std::span<const double> ious, double target, int budget) {
  if (!(target > 0.0 && target <= 1.0)) throw ConfigError("noc: target must lie in (0, 1]");
  if (budget < 1) throw ConfigError("noc: budget must be >= 1");
  const int n = std::min(budget, static_cast<int>(ious.size()));
  for (int i = 0; i < n; ++i) {
    if (ious[i] >= target) return {i + 1, false};
  }
  return {budget, true};
}

inline NocResult noc(const SessionTrace& trace, double target, int budget) {
  const auto v = trace.ious();
  return noc(std::span<const double>(v), target, budget);
}

/// IoU after min(k, length) clicks; traces that stopped early carry their
/// final IoU forward.
inline double iou_at_k(std::span<const double> ious, int k) {
  if (k < 1) throw ConfigError("iou_at_k: k must be >= 1");
  if (ious.empty()) throw InputError("iou_at_k: empty trace");
  return ious[std::min<std::size_t>(static_cast<std::size_t>(k), ious.size()) - 1];
}

inline double miou_at_k(const std::vector<std::vector<double>>& traces, int k) {
  if (traces.empty()) throw InputError("miou_at_k: no traces");
  double sum = 0.0;
  for (const auto& t : traces) sum += iou_at_k(t, k);
  return sum / static_cast<double>(traces.size());
}

inline double miou_at_k(const std::vector<SessionTrace>& traces, int k) {
  std::vector<std::vector<double>> ious;
  ious.reserve(traces.size());
  for (const auto& t : traces) ious.push_back(t.ious());
  return miou_at_k(ious, k);
}

}  // namespace clickloop
