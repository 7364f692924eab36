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


// Run-length encoding of binary masks over row-major order. Runs alternate
// background/foreground and always start with a background run, which may be
// empty.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "clickloop/errors.hpp"
#include "clickloop/grid.hpp"

namespace clickloop {

struct Rle {
  int height = 0;
  int width = 0;
  std::vector<std::uint64_t> counts;

  friend bool operator==(const Rle&, const Rle&) = default;
};

inline Rle rle_encode(const BinaryMask& m) {
  Rle r{m.height(), m.width(), {}};
  std::uint8_t current = 0;
  std::uint64_t run = 0;
  for (std::uint8_t v : m.values()) {
    if (v != current) {
      r.counts.push_back(run);
      run = 0;
      current = v;
    }
    ++run;
  }
  r.counts.push_back(run);
  return r;
}

inline BinaryMask rle_decode(const Rle& r) {
  if (r.height < 1 || r.width < 1) throw InputError("rle: dimensions must be positive");
  const std::uint64_t total = static_cast<std::uint64_t>(r.height) * static_cast<std::uint64_t>(r.width);
  std::uint64_t sum = 0;
  for (std::size_t i = 0; i < r.counts.size(); ++i) {
    if (r.counts[i] == 0 && i != 0) throw InputError("rle: only the first run may be empty");
    if (r.counts[i] > total - sum) throw InputError("rle: runs exceed the pixel count");
    sum += r.counts[i];
  }
  if (sum != total) throw InputError("rle: runs cover " + std::to_string(sum) + " of " + std::to_string(total) + " pixels");
  BinaryMask m(r.height, r.width);
  auto v = m.values();
  std::size_t pos = 0;
  for (std::size_t i = 0; i < r.counts.size(); ++i) {
    const std::uint8_t bit = i % 2 == 1 ? 1 : 0;
    for (std::uint64_t k = 0; k < r.counts[i]; ++k) v[pos++] = bit;
  }
  return m;
}

inline nlohmann::json rle_to_json(const Rle& r) {
  return {{"height", r.height}, {"width", r.width}, {"counts", r.counts}};
}

inline Rle rle_from_json(const nlohmann::json& j) {
  try {
    return Rle{j.at("height").get<int>(), j.at("width").get<int>(), j.at("counts").get<std::vector<std::uint64_t>>()};
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("rle: ") + e.what());
  }
}

}  // namespace clickloop
