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

#include <memory>
#include <string>

#include "clickloop/click_encoding.hpp"
#include "clickloop/error_analysis.hpp"

namespace clickloop {

/// Segmentation map plus the estimated FP / FN maps of the error decoder.
struct SegmenterOutput {
  ProbabilityMap prob;
  ErrorMapPair errors;

  friend bool operator==(const SegmenterOutput&, const SegmenterOutput&) = default;
};

/// A segmentation model driven by clicks.
///
/// Implementations must be deterministic for identical inputs and internal
/// state, and must obey clicks: a positive click pixel maps to a probability
/// >= 0.5, a negative one to < 0.5. One instance serves one session; calls to
/// predict() must be serialized by the caller.
class Segmenter {
 public:
  virtual ~Segmenter() = default;
  virtual SegmenterOutput predict(const SegmentationInput& input) = 0;
  virtual std::string name() const = 0;
};

}  // namespace clickloop
