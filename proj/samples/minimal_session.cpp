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


// Drives one interactive session by hand: a synthetic image, the region-grow
// segmenter and a few clicks, printing the mask as text.

#include <iostream>
#include <optional>

#include "clickloop/dataset.hpp"
#include "clickloop/region_grow_segmenter.hpp"
#include "clickloop/rle.hpp"
#include "clickloop/session.hpp"

using namespace clickloop;

namespace {

void print_mask(const BinaryMask& m) {
  for (int r = 0; r < m.height(); r += 2) {
    for (int c = 0; c < m.width(); ++c) std::cout << (m.test(r, c) ? '#' : '.');
    std::cout << '\n';
  }
}

Click click_at(int row, int col, Polarity p) {
  Click c;
  c.pos = {row, col};
  c.polarity = p;
  return c;
}

}  // namespace

int main() {
  SynthSpec spec;
  spec.count = 1;
  spec.size = 40;
  spec.seed = 4;
  spec.kinds = {SynthKind::kEllipse};
  const auto detailed = synth_dataset_detailed(spec);
  const Instance& inst = detailed[0].instance;
  const SynthShape& shape = detailed[0].shape;

  SessionConfig cfg;
  cfg.refinement_mode = RefinementMode::kPseudoClick;
  RegionGrowSegmenter seg;
  SessionState state = SessionState::fresh(inst.image, inst.gt, cfg);

  // First click by hand, then let the simulated user pick the next ones.
  std::optional<Click> next = click_at(static_cast<int>(shape.cy), static_cast<int>(shape.cx), Polarity::kPositive);
  for (int round = 1; round <= 5 && next; ++round) {
    const RoundResult r = apply_human_click(state, *next, seg, cfg);
    std::cout << "round " << r.round << ": " << to_string(next->polarity) << " click at (" << next->pos.row << ","
              << next->pos.col << "), IoU " << r.iou_final.value_or(0.0) << ", pseudo clicks:";
    for (const Click& p : r.pseudo) std::cout << " (" << p.pos.row << "," << p.pos.col << "," << to_string(p.polarity) << ")";
    std::cout << '\n';
    next = iterative_next_click(state.prev_mask, inst.gt, cfg);
  }
  print_mask(state.mask(cfg.tau));

  const Rle rle = rle_encode(state.mask(cfg.tau));
  std::cout << "mask RLE has " << rle.counts.size() << " runs\n";
  return 0;
}
