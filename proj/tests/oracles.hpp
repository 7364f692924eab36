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

// Brute-force reference implementations used only by tests. Nothing here
// calls into the library algorithms it is compared against.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "clickloop/grid.hpp"
#include "clickloop/random.hpp"

namespace clickloop::oracle {

struct Blob {
  std::vector<PixelCoord> pixels;  // raster order
  PixelCoord origin;               // (min row, min col)
};

/// Breadth-first flood fill from each unvisited true pixel in raster order.
inline std::vector<Blob> flood_fill(const BinaryMask& m, bool eight) {
  std::vector<std::vector<char>> seen(m.height(), std::vector<char>(m.width(), 0));
  std::vector<Blob> out;
  for (int r = 0; r < m.height(); ++r) {
    for (int c = 0; c < m.width(); ++c) {
      if (!m.test(r, c) || seen[r][c]) continue;
      Blob b;
      std::deque<PixelCoord> q{{r, c}};
      seen[r][c] = 1;
      while (!q.empty()) {
        auto p = q.front();
        q.pop_front();
        b.pixels.push_back(p);
        for (int dr = -1; dr <= 1; ++dr) {
          for (int dc = -1; dc <= 1; ++dc) {
            if (dr == 0 && dc == 0) continue;
            if (!eight && dr != 0 && dc != 0) continue;
            const int nr = p.row + dr;
            const int nc = p.col + dc;
            if (nr < 0 || nc < 0 || nr >= m.height() || nc >= m.width()) continue;
            if (!m.test(nr, nc) || seen[nr][nc]) continue;
            seen[nr][nc] = 1;
            q.push_back({nr, nc});
          }
        }
      }
      std::sort(b.pixels.begin(), b.pixels.end());
      b.origin = {b.pixels.front().row, b.pixels.front().col};
      for (auto p : b.pixels) b.origin.col = std::min(b.origin.col, p.col);
      out.push_back(std::move(b));
    }
  }
  return out;
}

/// Squared distance to the nearest false pixel or outside position, by
/// scanning every false pixel.
inline std::int64_t brute_sq_dt(const BinaryMask& m, int r, int c, bool border_is_background = true) {
  if (!m.test(r, c)) return 0;
  std::int64_t best = std::numeric_limits<std::int64_t>::max();
  if (border_is_background) {
    // nearest outside position lies straight across one of the four borders
    const std::int64_t o = std::min({r + 1, c + 1, m.height() - r, m.width() - c});
    best = o * o;
  }
  for (int rr = 0; rr < m.height(); ++rr) {
    for (int cc = 0; cc < m.width(); ++cc) {
      if (m.test(rr, cc)) continue;
      const std::int64_t dr = rr - r;
      const std::int64_t dc = cc - c;
      best = std::min(best, dr * dr + dc * dc);
    }
  }
  return best;
}

/// Deepest pixel of the blob against its own isolated mask; smallest (row, col) on ties.
inline PixelCoord brute_center(const Blob& b, Shape shape) {
  BinaryMask only(shape);
  for (auto p : b.pixels) only.set(p);
  PixelCoord best = b.pixels.front();
  std::int64_t best_d = -1;
  for (auto p : b.pixels) {
    const std::int64_t d = brute_sq_dt(only, p.row, p.col);
    if (d > best_d || (d == best_d && p < best)) {
      best = p;
      best_d = d;
    }
  }
  return best;
}

struct ClickChoice {
  PixelCoord pos;
  bool negative = false;
  Blob region;
};

/// Largest region across both masks; ties: FN first, then origin, then discovery order.
inline std::optional<ClickChoice> brute_click(const BinaryMask& fp, const BinaryMask& fn, bool eight,
                                              std::size_t min_area = 1) {
  struct Cand {
    Blob blob;
    bool from_fp;
    std::size_t order;
  };
  std::vector<Cand> cands;
  std::size_t order = 0;
  for (auto& b : flood_fill(fn, eight)) cands.push_back({b, false, order++});
  for (auto& b : flood_fill(fp, eight)) cands.push_back({b, true, order++});
  if (cands.empty()) return std::nullopt;
  auto key_less = [](const Cand& a, const Cand& b) {
    if (a.blob.pixels.size() != b.blob.pixels.size()) return a.blob.pixels.size() > b.blob.pixels.size();
    if (a.from_fp != b.from_fp) return !a.from_fp;
    if (a.blob.origin != b.blob.origin) return a.blob.origin < b.blob.origin;
    return a.order < b.order;
  };
  const Cand best = *std::min_element(cands.begin(), cands.end(), key_less);
  if (best.blob.pixels.size() < min_area) return std::nullopt;
  return ClickChoice{brute_center(best.blob, fp.shape()), best.from_fp, best.blob};
}

/// Nearest-seed label by exhaustive squared Euclidean distances; ties go to the lower index.
inline Grid<int> brute_voronoi(Shape shape, const std::vector<PixelCoord>& seeds) {
  Grid<int> out(shape, -1);
  for (int r = 0; r < shape.height; ++r) {
    for (int c = 0; c < shape.width; ++c) {
      std::int64_t best = std::numeric_limits<std::int64_t>::max();
      for (int s = 0; s < static_cast<int>(seeds.size()); ++s) {
        const std::int64_t dr = seeds[s].row - r;
        const std::int64_t dc = seeds[s].col - c;
        const std::int64_t d = dr * dr + dc * dc;
        if (d < best) {
          best = d;
          out(r, c) = s;
        }
      }
    }
  }
  return out;
}

/// Geodesic labels by Bellman-Ford sweeps: least accumulated intensity change
/// per seed, plus the Euclidean distance to the seed; ties go to the lower index.
inline Grid<int> brute_geodesic_labels(const Image& img, const std::vector<PixelCoord>& seeds, double weight) {
  const Shape s = img.shape;
  Grid<int> label(s, -1);
  Grid<double> best(s, std::numeric_limits<double>::infinity());
  for (int k = 0; k < static_cast<int>(seeds.size()); ++k) {
    Grid<double> acc(s, std::numeric_limits<double>::infinity());
    acc[seeds[k]] = 0.0;
    for (bool changed = true; changed;) {
      changed = false;
      for (int r = 0; r < s.height; ++r) {
        for (int c = 0; c < s.width; ++c) {
          for (int dr = -1; dr <= 1; ++dr) {
            for (int dc = -1; dc <= 1; ++dc) {
              const int nr = r + dr;
              const int nc = c + dc;
              if (nr < 0 || nc < 0 || nr >= s.height || nc >= s.width) continue;
              const double v = acc(nr, nc) + std::abs(static_cast<double>(img.intensity(r, c)) -
                                                      static_cast<double>(img.intensity(nr, nc)));
              if (v < acc(r, c)) {
                acc(r, c) = v;
                changed = true;
              }
            }
          }
        }
      }
    }
    for (int r = 0; r < s.height; ++r) {
      for (int c = 0; c < s.width; ++c) {
        const double dr = r - seeds[k].row;
        const double dc = c - seeds[k].col;
        const double cost = std::hypot(dr, dc) + weight * acc(r, c);
        if (cost < best(r, c)) {
          best(r, c) = cost;
          label(r, c) = k;
        }
      }
    }
  }
  return label;
}

/// Central finite-difference gradient of f over the values of p.
template <typename F>
std::vector<double> central_difference(const ProbabilityMap& p, F&& f, double step = 1e-5) {
  std::vector<double> g(p.size());
  ProbabilityMap q = p;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double v = p.values()[i];
    q.values()[i] = v + step;
    const double up = f(q);
    q.values()[i] = v - step;
    const double down = f(q);
    q.values()[i] = v;
    g[i] = (up - down) / (2.0 * step);
  }
  return g;
}

/// Largest componentwise relative error, |a - n| / max(|a|, |n|, floor).
inline double max_relative_error(std::span<const double> analytic, std::span<const double> numeric,
                                 double floor = 1e-6) {
  double worst = 0.0;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    const double denom = std::max({std::abs(analytic[i]), std::abs(numeric[i]), floor});
    worst = std::max(worst, std::abs(analytic[i] - numeric[i]) / denom);
  }
  return worst;
}

inline BinaryMask random_mask(Shape s, double density, Rng& rng) {
  BinaryMask m(s);
  for (auto& v : m.values()) v = uniform_real(rng, 0.0, 1.0) < density ? 1 : 0;
  return m;
}

inline ProbabilityMap random_prob(Shape s, Rng& rng, double lo = 0.0, double hi = 1.0) {
  ProbabilityMap p(s);
  for (auto& v : p.values()) v = uniform_real(rng, lo, hi);
  return p;
}

}  // namespace clickloop::oracle
