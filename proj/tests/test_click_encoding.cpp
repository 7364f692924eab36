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


#include <gtest/gtest.h>

#include "clickloop/click_encoding.hpp"
#include "oracles.hpp"

namespace clickloop {
namespace {

Click make_click(int r, int c, Polarity pol, ClickSource src = ClickSource::kHuman) {
  return Click{{r, c}, pol, src, 1};
}

std::vector<Click> random_clicks(Rng& rng, Shape s, int n) {
  std::vector<Click> out;
  for (int i = 0; i < n; ++i) {
    out.push_back(make_click(uniform_int(rng, 0, s.height - 1), uniform_int(rng, 0, s.width - 1),
                             uniform_int(rng, 0, 1) ? Polarity::kPositive : Polarity::kNegative,
                             uniform_int(rng, 0, 1) ? ClickSource::kHuman : ClickSource::kPseudo));
  }
  return out;
}

TEST(EncodeClicks, NoClicks) {
  auto enc = encode_clicks({}, {8, 8}, 5, ClickSource::kHuman);
  EXPECT_FALSE(enc.positive.any());
  EXPECT_FALSE(enc.negative.any());
}

TEST(EncodeClicks, RadiusZeroIsSinglePixel) {
  auto enc = encode_clicks({make_click(10, 10, Polarity::kPositive)}, {32, 32}, 0, ClickSource::kHuman);
  EXPECT_EQ(enc.positive.count(), 1U);
  EXPECT_TRUE(enc.positive.test(10, 10));
  EXPECT_FALSE(enc.negative.any());
}

TEST(EncodeClicks, CornerDiskIsClipped) {
  auto enc = encode_clicks({make_click(0, 0, Polarity::kNegative)}, {32, 32}, 2, ClickSource::kHuman);
  EXPECT_EQ(enc.negative.count(), 6U);
  for (auto p : std::vector<PixelCoord>{{0, 0}, {0, 1}, {0, 2}, {1, 0}, {1, 1}, {2, 0}}) {
    EXPECT_TRUE(enc.negative.test(p));
  }
  EXPECT_FALSE(enc.positive.any());
}

TEST(EncodeClicks, OutOfBoundsThrows) {
  EXPECT_THROW(encode_clicks({make_click(8, 0, Polarity::kPositive)}, {8, 8}, 1, ClickSource::kHuman),
               InputError);
  EXPECT_THROW(encode_clicks({}, {8, 8}, -1, ClickSource::kHuman), ConfigError);
}

TEST(EncodeClicks, MatchesBruteForceDisks) {
  Rng rng(1);
  for (int t = 0; t < 100; ++t) {
    const Shape s{uniform_int(rng, 5, 24), uniform_int(rng, 5, 24)};
    const int radius = uniform_int(rng, 0, 6);
    auto clicks = random_clicks(rng, s, uniform_int(rng, 0, 6));
    for (auto src : {ClickSource::kHuman, ClickSource::kPseudo}) {
      auto enc = encode_clicks(clicks, s, radius, src);
      for (int r = 0; r < s.height; ++r) {
        for (int c = 0; c < s.width; ++c) {
          bool pos = false;
          bool neg = false;
          for (const auto& k : clicks) {
            if (k.source != src) continue;
            const int dr = k.pos.row - r;
            const int dc = k.pos.col - c;
            if (std::sqrt(static_cast<double>(dr * dr + dc * dc)) <= radius) {
              (k.positive() ? pos : neg) = true;
            }
          }
          ASSERT_EQ(enc.positive.test(r, c), pos);
          ASSERT_EQ(enc.negative.test(r, c), neg);
        }
      }
    }
  }
}

TEST(AddClick, EquivalentToSingletonEncoding) {
  const Shape s{16, 16};
  auto c = make_click(3, 4, Polarity::kPositive);
  auto inc = add_click(DiskEncoding(s, ClickSource::kHuman, 3), c);
  EXPECT_EQ(inc, encode_clicks({c}, s, 3, ClickSource::kHuman));
}

TEST(AddClick, Idempotent) {
  const Shape s{16, 16};
  auto c = make_click(3, 4, Polarity::kNegative, ClickSource::kPseudo);
  auto once = add_click(DiskEncoding(s, ClickSource::kPseudo, 5), c);
  EXPECT_EQ(add_click(once, c), once);
}

TEST(AddClick, SourceMismatchThrows) {
  EXPECT_THROW(add_click(DiskEncoding({4, 4}, ClickSource::kHuman, 1),
                         make_click(1, 1, Polarity::kPositive, ClickSource::kPseudo)),
               InputError);
}

TEST(AddClick, IncrementalEqualsBatch) {
  Rng rng(2);
  for (int t = 0; t < 50; ++t) {
    const Shape s{20, 20};
    auto clicks = random_clicks(rng, s, 5);
    for (auto& c : clicks) c.source = ClickSource::kHuman;
    DiskEncoding inc(s, ClickSource::kHuman, 4);
    for (const auto& c : clicks) inc = add_click(inc, c);
    EXPECT_EQ(inc, encode_clicks(clicks, s, 4, ClickSource::kHuman));
  }
}

TEST(Encoding, HumanAndPseudoStaySeparate) {
  Rng rng(3);
  const Shape s{20, 20};
  auto clicks = random_clicks(rng, s, 8);
  std::vector<Click> human_only;
  for (const auto& c : clicks) {
    if (c.source == ClickSource::kHuman) human_only.push_back(c);
  }
  EXPECT_EQ(encode_clicks(clicks, s, 3, ClickSource::kHuman), encode_clicks(human_only, s, 3, ClickSource::kHuman));
  EXPECT_FALSE(encode_clicks(human_only, s, 3, ClickSource::kPseudo).positive.any());
}

TEST(MergeEncodings, Cases) {
  const Shape s{12, 12};
  auto empty = merge_encodings(DiskEncoding(s, ClickSource::kHuman, 2), DiskEncoding(s, ClickSource::kPseudo, 2));
  EXPECT_EQ(empty.channels, 4);
  for (float v : empty.data) EXPECT_EQ(v, 0.0F);

  auto human = encode_clicks({make_click(5, 5, Polarity::kPositive)}, s, 2, ClickSource::kHuman);
  auto pseudo = encode_clicks({make_click(5, 6, Polarity::kPositive, ClickSource::kPseudo)}, s, 2,
                              ClickSource::kPseudo);
  auto one = merge_encodings(human, DiskEncoding(s, ClickSource::kPseudo, 2));
  for (int r = 0; r < 12; ++r) {
    for (int c = 0; c < 12; ++c) {
      EXPECT_EQ(one.at(0, r, c), human.positive.test(r, c) ? 1.0F : 0.0F);
      EXPECT_EQ(one.at(1, r, c) + one.at(2, r, c) + one.at(3, r, c), 0.0F);
    }
  }
  auto both = merge_encodings(human, pseudo);
  EXPECT_EQ(both.at(0, 5, 6), 1.0F);
  EXPECT_EQ(both.at(2, 5, 6), 1.0F);
  EXPECT_EQ(both.at(2, 5, 3), 0.0F);
  EXPECT_THROW(merge_encodings(human, DiskEncoding({4, 4}, ClickSource::kPseudo, 2)), ShapeError);
}

TEST(SegmentationInput, ValidateCatchesMismatch) {
  const Shape s{6, 6};
  SegmentationInput in{Image(s), ProbabilityMap(s), DiskEncoding(s, ClickSource::kHuman, 1),
                       DiskEncoding(s, ClickSource::kPseudo, 1), {}, {}};
  EXPECT_NO_THROW(in.validate());
  in.prev_mask = ProbabilityMap(Shape{5, 6});
  EXPECT_THROW(in.validate(), InputError);
}

}  // namespace
}  // namespace clickloop
