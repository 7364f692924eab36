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

#include <string>
#include <string_view>

#include "clickloop/errors.hpp"
#include "clickloop/grid.hpp"

namespace clickloop {

enum class Polarity { kPositive, kNegative };
enum class ClickSource { kHuman, kPseudo };

struct Click {
  PixelCoord pos{};
  Polarity polarity = Polarity::kPositive;
  ClickSource source = ClickSource::kHuman;
  int index = 0;  // interaction round the click belongs to (1-based)

  bool positive() const { return polarity == Polarity::kPositive; }
  friend bool operator==(const Click&, const Click&) = default;
};

inline std::string_view to_string(Polarity p) {
  return p == Polarity::kPositive ? "positive" : "negative";
}

inline std::string_view to_string(ClickSource s) {
  return s == ClickSource::kHuman ? "human" : "pseudo";
}

inline Polarity parse_polarity(std::string_view s) {
  if (s == "positive" || s == "pos" || s == "+") return Polarity::kPositive;
  if (s == "negative" || s == "neg" || s == "-") return Polarity::kNegative;
  throw InputError("unknown click polarity '" + std::string(s) + "'");
}

inline ClickSource parse_source(std::string_view s) {
  if (s == "human") return ClickSource::kHuman;
  if (s == "pseudo") return ClickSource::kPseudo;
  throw InputError("unknown click source '" + std::string(s) + "'");
}

inline void require_in_bounds(const Click& c, Shape shape) {
  if (!shape.contains(c.pos)) {
    throw InputError("click (" + std::to_string(c.pos.row) + ", " + std::to_string(c.pos.col) +
                     ") outside image " + to_string(shape));
  }
}

}  // namespace clickloop
