// Copyright 2026 The simsearch Authors
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

#include <algorithm>
#include <set>

#include "common/config.hpp"
#include "common/error.hpp"
#include "common/png_io.hpp"
#include "core_model/orientation.hpp"
#include "core_model/types.hpp"
#include "support/support.hpp"

namespace simsearch {
namespace {

using testing::RandomImage;

TEST(Orientation, ComposeExamples) {
  EXPECT_EQ(ComposeOrientations(Orientation::kR90, Orientation::kR90), Orientation::kR180);
  EXPECT_EQ(ComposeOrientations(Orientation::kR0, Orientation::kMR90), Orientation::kMR90);
  EXPECT_EQ(ComposeOrientations(Orientation::kMR0, Orientation::kMR0), Orientation::kR0);
}

TEST(Orientation, CompositionTableIsLatinSquare) {
  for (Orientation a : kAllOrientations) {
    std::set<int> row, col;
    for (Orientation b : kAllOrientations) {
      row.insert(OrientationCode(ComposeOrientations(a, b)));
      col.insert(OrientationCode(ComposeOrientations(b, a)));
    }
    EXPECT_EQ(row.size(), 8u);
    EXPECT_EQ(col.size(), 8u);
    EXPECT_EQ(ComposeOrientations(a, InverseOrientation(a)), Orientation::kR0);
  }
}

TEST(Orientation, TwoByTwoQuarterTurnIsCounterClockwise) {
  // [[a,b],[c,d]] -> [[b,d],[a,c]]
  Image img(2, 2);
  const std::uint8_t a = 10, b = 20, c = 30, d = 40;
  auto set = [&](int x, int y, std::uint8_t v) {
    for (int ch = 0; ch < 3; ++ch) img.at(x, y, ch) = v;
  };
  set(0, 0, a);
  set(1, 0, b);
  set(0, 1, c);
  set(1, 1, d);
  const Image r = ApplyOrientation(img, Orientation::kR90);
  EXPECT_EQ(r.at(0, 0, 0), b);
  EXPECT_EQ(r.at(1, 0, 0), d);
  EXPECT_EQ(r.at(0, 1, 0), a);
  EXPECT_EQ(r.at(1, 1, 0), c);
}

TEST(Orientation, ConstantImageIsFixed) {
  Image img(5, 5);
  std::fill(img.mutable_data().begin(), img.mutable_data().end(), std::uint8_t{77});
  for (Orientation o : kAllOrientations) EXPECT_EQ(ApplyOrientation(img, o), img);
}

TEST(Orientation, FourQuarterTurnsIsIdentity) {
  const Image img = RandomImage(9, 9, 3);
  Image r = img;
  for (int i = 0; i < 4; ++i) r = ApplyOrientation(r, Orientation::kR90);
  EXPECT_EQ(r, img);
}

TEST(Orientation, ApplyMatchesComposition) {
  const Image img = RandomImage(6, 6, 5);
  for (Orientation a : kAllOrientations) {
    for (Orientation b : kAllOrientations) {
      EXPECT_EQ(ApplyOrientation(ApplyOrientation(img, b), a),
                ApplyOrientation(img, ComposeOrientations(a, b)))
          << OrientationName(a) << " after " << OrientationName(b);
    }
  }
}

TEST(Orientation, PixelMultisetPreserved) {
  const Image img = RandomImage(7, 7, 11);
  auto sorted = [](const Image& i) {
    std::vector<std::uint8_t> v(i.data().begin(), i.data().end());
    std::sort(v.begin(), v.end());
    return v;
  };
  for (Orientation o : kAllOrientations) EXPECT_EQ(sorted(ApplyOrientation(img, o)), sorted(img));
}

TEST(Orientation, NonSquareQuarterTurnRejected) {
  const Image img = RandomImage(4, 3, 1);
  try {
    ApplyOrientation(img, Orientation::kR90);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidArgument);
  }
  EXPECT_NO_THROW(ApplyOrientation(img, Orientation::kR180));
  EXPECT_NO_THROW(ApplyOrientation(img, Orientation::kMR0));
}

TEST(Orientation, NamesRoundTrip) {
  for (Orientation o : kAllOrientations) EXPECT_EQ(ParseOrientation(OrientationName(o)), o);
  EXPECT_FALSE(ParseOrientation("R45").has_value());
  EXPECT_THROW(OrientationFromCode(8), Error);
}

TEST(BaseCenter, Examples) {
  EXPECT_EQ(BaseCenter(0, 0, 300, Magnification::k10X), std::make_pair(600.0, 600.0));
  EXPECT_EQ(BaseCenter(1000, 2000, 300, Magnification::k40X), std::make_pair(1150.0, 2150.0));
  EXPECT_NE(BaseCenter(0, 0, 300, Magnification::k40X), BaseCenter(0, 0, 300, Magnification::k20X));
  // 600 px at 20X covers the same base footprint as 300 px at 10X.
  EXPECT_EQ(BaseCenter(0, 0, 600, Magnification::k20X), BaseCenter(0, 0, 300, Magnification::k10X));
}

TEST(Magnification, DownsampleFactors) {
  EXPECT_EQ(Downsample(Magnification::k40X), 1);
  EXPECT_EQ(Downsample(Magnification::k20X), 2);
  EXPECT_EQ(Downsample(Magnification::k10X), 4);
  EXPECT_EQ(Downsample(Magnification::k5X), 8);
  EXPECT_EQ(ParseMagnification("20X"), Magnification::k20X);
  EXPECT_THROW(ParseMagnification("30X"), Error);
}

TEST(Types, LabelSetJsonRoundTrip) {
  LabelSet l;
  l.histologic_features = {"stroma", "nerve"};
  l.organ = "prostate";
  l.gleason = Gleason::kGP4;
  l.tumor_present = true;
  EXPECT_EQ(LabelSetFromJson(ToJson(l)), l);
  EXPECT_EQ(LabelSetFromJson(ToJson(LabelSet{})), LabelSet{});
}

TEST(Types, PatchRecordJsonRoundTrip) {
  PatchRecord p;
  p.patch_id = 42;
  p.slide_id = 3;
  p.magnification = Magnification::k20X;
  p.x = 600;
  p.y = 1200;
  p.labels.histologic_features = {"fat"};
  EXPECT_EQ(PatchRecordFromJson(ToJson(p)), p);
}

TEST(Types, PatchOutsideSlideInvalid) {
  SlideRef s;
  s.slide_id = 0;
  s.base_width_px = 1200;
  s.base_height_px = 1200;
  s.tile_size_px = 256;
  s.levels = {MagLevel::Of(Magnification::k40X), MagLevel::Of(Magnification::k10X)};
  PatchRecord p;
  p.magnification = Magnification::k10X;
  p.x = 0;
  EXPECT_NO_THROW(p.Validate(s));
  p.x = 4;
  EXPECT_THROW(p.Validate(s), Error);
  p.x = 2;  // not on the 10X grid
  p.side_px = 100;
  EXPECT_THROW(p.Validate(s), Error);
}

TEST(Png, RoundTrip) {
  const Image img = RandomImage(37, 19, 9);
  const auto bytes = EncodePng(img);
  ASSERT_GT(bytes.size(), 8u);
  EXPECT_EQ(DecodePng(bytes), img);
}

TEST(Png, GarbageRejected) {
  const std::vector<std::uint8_t> junk(64, 0x42);
  try {
    DecodePng(junk);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kFormat);
  }
}

TEST(Config, ParsesKeyValueText) {
  const Config c = ParseConfigText(
      "# comment\n"
      "store = /data/store\n"
      "magnifications = 40X, 10X\n"
      "k = 7\n"
      "exclude_self = false\n"
      "\n");
  EXPECT_EQ(c.store, "/data/store");
  EXPECT_EQ(c.magnifications, (std::vector<std::string>{"40X", "10X"}));
  EXPECT_EQ(c.k, 7);
  EXPECT_FALSE(c.exclude_self);
  EXPECT_EQ(c.leaf_target, 40);
  EXPECT_EQ(c.max_depth, 6);
}

TEST(Config, UnknownKeyRejected) {
  EXPECT_THROW(ParseConfigText("colour = red\n"), Error);
  Config c;
  EXPECT_THROW(SetConfigValue(c, "nope", "1"), Error);
  EXPECT_THROW(ApplyConfigJson(c, json{{"nope", 1}}), Error);
}

TEST(Config, RangesChecked) {
  EXPECT_THROW(ParseConfigText("k = 0\n").Validate(), Error);
  EXPECT_THROW(ParseConfigText("n_shards = 0\n").Validate(), Error);
  EXPECT_THROW(ParseConfigText("hash_bits = 40\n").Validate(), Error);
  EXPECT_THROW(ParseConfigText("study_fraction = 1.5\n").Validate(), Error);
  EXPECT_NO_THROW(Config{}.Validate());
}

TEST(Config, TextRoundTrip) {
  Config c;
  c.store = "/s";
  c.k = 9;
  c.magnifications = {"40X", "20X"};
  c.seed = 123;
  const Config back = ParseConfigText(ToConfigText(c));
  EXPECT_EQ(ToJson(back), ToJson(c));
}

}  // namespace
}  // namespace simsearch
