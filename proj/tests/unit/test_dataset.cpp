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

#include <fstream>
#include <random>
#include <set>

#include "common/error.hpp"
#include "common/json_io.hpp"
#include "common/png_io.hpp"
#include "dataset/annotations.hpp"
#include "dataset/extract.hpp"
#include "dataset/sampling.hpp"
#include "dataset/slide_store.hpp"
#include "dataset/synth.hpp"
#include "support/support.hpp"

namespace simsearch::dataset {
namespace {

namespace fs = std::filesystem;
using testing::SmallSpec;
using testing::TempDir;

std::string FileBytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Store with slide metadata only; extraction never reads pixels.
SlideStore MetadataStore(const fs::path& root, std::int64_t side_px) {
  SlideRef s;
  s.slide_id = 0;
  s.name = "meta";
  s.base_width_px = side_px;
  s.base_height_px = side_px;
  s.tile_size_px = 512;
  s.levels = {MagLevel::Of(Magnification::k40X), MagLevel::Of(Magnification::k20X),
              MagLevel::Of(Magnification::k10X)};
  fs::create_directories(root);
  WriteFileAtomic(SlideStore::ManifestPath(root), SlideStore::ManifestJson({s}).dump());
  // Placeholder tiles so the store opens.
  for (std::size_t level = 0; level < s.levels.size(); ++level) {
    const std::int64_t n = (s.LevelWidth(level) + s.tile_size_px - 1) / s.tile_size_px;
    fs::create_directories(root / "0" / std::to_string(level));
    for (std::int64_t ty = 0; ty < n; ++ty) {
      for (std::int64_t tx = 0; tx < n; ++tx) {
        std::ofstream(root / "0" / std::to_string(level) /
                      (std::to_string(ty) + "_" + std::to_string(tx) + ".png"));
      }
    }
  }
  return SlideStore::Open(root);
}

std::vector<Point> Square(double x0, double y0, double x1, double y1) {
  return {{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}};
}

TEST(Synth, SameSeedGivesIdenticalTiles) {
  TempDir a("synth-a"), b("synth-b");
  const auto spec = SmallSpec(2);
  GenerateSynthetic(spec, a.path());
  GenerateSynthetic(spec, b.path(), 2);
  std::size_t files = 0;
  for (const auto& e : fs::recursive_directory_iterator(a.path())) {
    if (!e.is_regular_file()) continue;
    const fs::path rel = fs::relative(e.path(), a.path());
    ASSERT_TRUE(fs::exists(b.path() / rel)) << rel;
    EXPECT_EQ(FileBytes(e.path()), FileBytes(b.path() / rel)) << rel;
    ++files;
  }
  EXPECT_GT(files, 10u);
}

TEST(Synth, DifferentSeedDiffers) {
  TempDir a("synth-a"), b("synth-b");
  GenerateSynthetic(SmallSpec(1, 1200, 1), a.path());
  GenerateSynthetic(SmallSpec(1, 1200, 2), b.path());
  EXPECT_NE(FileBytes(a / "0/0/0_0.png"), FileBytes(b / "0/0/0_0.png"));
}

TEST(Synth, NineClassesGiveNineLabels) {
  TempDir dir("synth");
  const auto out = GenerateSynthetic(SmallSpec(3), dir.path());
  std::set<std::string> features;
  for (const auto& a : out.annotations) {
    if (a.kind == LabelKind::kHistologicFeature) features.insert(a.label);
  }
  EXPECT_EQ(features.size(), 9u);
  const auto reread = ReadAnnotations(dir / "annotations.json");
  EXPECT_EQ(reread.size(), out.annotations.size());
}

TEST(Synth, InteriorPatchesAreLabelPure) {
  TempDir dir("synth");
  const auto spec = SmallSpec(2);
  const auto out = GenerateSynthetic(spec, dir.path());
  const auto store = SlideStore::Open(dir.path());
  ExtractOptions ex;
  ex.magnifications = {Magnification::k40X};
  ex.side_px = 100;
  const auto patches = ExtractPatches(store, out.annotations, ex);
  std::map<std::string, const ClassDescriptor*> by_name;
  for (const auto& c : spec.classes) by_name[c.name] = &c;

  std::size_t checked = 0;
  for (const auto& region : out.annotations) {
    if (region.kind != LabelKind::kHistologicFeature) continue;
    for (const auto& p : patches) {
      if (p.slide_id != region.slide_id) continue;
      // Brute-force coverage over pixel centers.
      std::int64_t inside = 0;
      for (int y = 0; y < p.side_px; ++y) {
        for (int x = 0; x < p.side_px; ++x) {
          inside += PointInPolygon(region.polygon, static_cast<double>(p.x + x) + 0.5,
                                   static_cast<double>(p.y + y) + 0.5);
        }
      }
      if (inside != static_cast<std::int64_t>(p.side_px) * p.side_px) continue;
      EXPECT_EQ(p.labels.histologic_features, std::set<std::string>{region.label});
      const Image px = store.ReadRegion(p.slide_id, p.magnification, p.x, p.y, p.side_px, p.side_px);
      const auto& tex = by_name.at(region.label)->texture;
      for (int y = 0; y < p.side_px; y += 7) {
        for (int x = 0; x < p.side_px; x += 7) {
          const auto want = TexturePixel(tex, spec.seed, p.slide_id, p.x + x, p.y + y);
          ASSERT_EQ(px.at(x, y, 0), want[0]);
          ASSERT_EQ(px.at(x, y, 1), want[1]);
          ASSERT_EQ(px.at(x, y, 2), want[2]);
        }
      }
      ++checked;
    }
  }
  EXPECT_EQ(checked, 8u * 9u);  // 8 regions of 300 px, 3x3 patches of 100 px each
}

TEST(Synth, TooManyRegionsRejected) {
  TempDir dir("synth");
  auto spec = SmallSpec(1);
  spec.regions_per_slide = 17;  // 16 cells
  try {
    GenerateSynthetic(spec, dir.path());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidArgument);
    EXPECT_NE(std::string(e.what()).find("too small"), std::string::npos);
  }
}

TEST(Synth, PyramidIsBoxFiltered) {
  TempDir dir("synth");
  GenerateSynthetic(SmallSpec(1), dir.path());
  const auto store = SlideStore::Open(dir.path());
  const Image hi = store.ReadRegion(0, Magnification::k40X, 0, 0, 400, 400);
  const Image lo = store.ReadRegion(0, Magnification::k20X, 0, 0, 200, 200);
  EXPECT_EQ(Downsample2x(hi), lo);
}

TEST(Coverage, MatchesPerPixelOracle) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1600.0);
  for (int trial = 0; trial < 30; ++trial) {
    // Random convex quad (sorted by angle around a center), non-integer vertices.
    const double cx = 400 + u(rng) / 2, cy = 400 + u(rng) / 2;
    std::vector<Point> poly;
    for (int i = 0; i < 5; ++i) {
      const double a = (i + u(rng) / 1600.0 * 0.8) * 2 * 3.14159265358979 / 5;
      const double r = 150 + u(rng) / 4;
      poly.push_back({cx + r * std::cos(a) + 0.37, cy + r * std::sin(a) + 0.61});
    }
    const int ds = trial % 2 == 0 ? 1 : 4;
    const int side = 60;
    const std::int64_t x = static_cast<std::int64_t>(cx) / (ds * side) * ds * side;
    const std::int64_t y = static_cast<std::int64_t>(cy) / (ds * side) * ds * side;
    std::int64_t want = 0;
    for (int r = 0; r < side; ++r) {
      for (int c = 0; c < side; ++c) {
        want += PointInPolygon(poly, (static_cast<double>(x / ds + c) + 0.5) * ds,
                               (static_cast<double>(y / ds + r) + 0.5) * ds);
      }
    }
    EXPECT_EQ(CoveredPixels({&poly}, x, y, side, ds), want) << "trial " << trial;
  }
}

TEST(Extract, FullyInsideIsLabeled) {
  TempDir dir("meta");
  const auto store = MetadataStore(dir.path(), 4800);
  std::vector<AnnotationRegion> anns{{0, "nerve", LabelKind::kHistologicFeature, Square(0, 0, 1200, 1200)}};
  ExtractOptions ex;
  ex.magnifications = {Magnification::k10X};
  const auto patches = ExtractPatches(store, anns, ex);
  ASSERT_EQ(patches.size(), 1u);
  EXPECT_EQ(patches[0].x, 0);
  EXPECT_EQ(patches[0].labels.histologic_features, std::set<std::string>{"nerve"});
}

TEST(Extract, HalfInsideIsUnlabeled) {
  TempDir dir("meta");
  const auto store = MetadataStore(dir.path(), 4800);
  std::vector<AnnotationRegion> anns{{0, "nerve", LabelKind::kHistologicFeature, Square(0, 0, 600, 1200)}};
  ExtractOptions ex;
  ex.magnifications = {Magnification::k10X};
  EXPECT_TRUE(ExtractPatches(store, anns, ex).empty());
  ex.coverage_threshold = 0.5;
  EXPECT_EQ(ExtractPatches(store, anns, ex).size(), 1u);
  ex.coverage_threshold = 0.75;
  ex.keep_unlabeled = true;
  const auto all = ExtractPatches(store, anns, ex);
  EXPECT_EQ(all.size(), 16u);
  for (const auto& p : all) EXPECT_TRUE(p.labels.empty());
}

TEST(Extract, ThreeByThreeCellSquareGivesNinePatches) {
  TempDir dir("meta");
  const auto store = MetadataStore(dir.path(), 6000);
  for (auto mag : {Magnification::k40X, Magnification::k10X}) {
    const double cell = 300.0 * Downsample(mag);
    std::vector<AnnotationRegion> anns{
        {0, "fat", LabelKind::kHistologicFeature, Square(cell, cell, 4 * cell, 4 * cell)}};
    ExtractOptions ex;
    ex.magnifications = {mag};
    const auto patches = ExtractPatches(store, anns, ex);
    EXPECT_EQ(patches.size(), 9u) << MagnificationName(mag);
  }
}

TEST(Extract, FootprintsDisjointPerLevel) {
  TempDir dir("meta");
  const auto store = MetadataStore(dir.path(), 4800);
  ExtractOptions ex;
  ex.magnifications = {Magnification::k40X, Magnification::k10X};
  ex.keep_unlabeled = true;
  const auto patches = ExtractPatches(store, {}, ex);
  for (std::size_t i = 0; i < patches.size(); ++i) {
    EXPECT_EQ(patches[i].patch_id, i);
    for (std::size_t j = i + 1; j < patches.size(); ++j) {
      const auto& a = patches[i];
      const auto& b = patches[j];
      if (a.magnification != b.magnification) continue;
      const bool disjoint = a.x + a.base_side() <= b.x || b.x + b.base_side() <= a.x ||
                            a.y + a.base_side() <= b.y || b.y + b.base_side() <= a.y;
      ASSERT_TRUE(disjoint);
    }
  }
  EXPECT_EQ(patches.size(), 16u * 16u + 4u * 4u);
}

TEST(Extract, OrganAndGleasonLabels) {
  TempDir dir("meta");
  const auto store = MetadataStore(dir.path(), 4800);
  std::vector<AnnotationRegion> anns{
      {0, "prostate", LabelKind::kOrgan, Square(0, 0, 4800, 4800)},
      {0, "GP4", LabelKind::kGleason, Square(0, 0, 1200, 1200)},
      {0, "stroma", LabelKind::kHistologicFeature, Square(0, 0, 1200, 1200)},
  };
  ExtractOptions ex;
  ex.magnifications = {Magnification::k10X};
  const auto patches = ExtractPatches(store, anns, ex);
  ASSERT_EQ(patches.size(), 16u);
  EXPECT_EQ(patches[0].labels.gleason, Gleason::kGP4);
  EXPECT_EQ(patches[0].labels.tumor_present, true);
  EXPECT_EQ(patches[0].labels.organ, "prostate");
  EXPECT_FALSE(patches[1].labels.gleason.has_value());
}

TEST(Extract, UnknownSlideRejected) {
  TempDir dir("meta");
  const auto store = MetadataStore(dir.path(), 4800);
  std::vector<AnnotationRegion> anns{{9, "nerve", LabelKind::kHistologicFeature, Square(0, 0, 10, 10)}};
  try {
    ExtractPatches(store, anns, {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNotFound);
  }
}

TEST(Extract, MissingLevelRejected) {
  TempDir dir("meta");
  const auto store = MetadataStore(dir.path(), 4800);
  ExtractOptions ex;
  ex.magnifications = {Magnification::k5X};
  EXPECT_THROW(ExtractPatches(store, {}, ex), Error);
}

std::vector<PatchRecord> Labeled(const std::vector<std::string>& classes, std::size_t per_class,
                                 ClassAxis axis) {
  std::vector<PatchRecord> out;
  std::uint64_t id = 0;
  for (const auto& c : classes) {
    for (std::size_t i = 0; i < per_class; ++i) {
      PatchRecord p;
      p.patch_id = id++;
      if (axis == ClassAxis::kGleason) {
        p.labels.gleason = ParseGleason(c);
      } else {
        p.labels.histologic_features = {c};
      }
      out.push_back(p);
    }
  }
  return out;
}

TEST(Sampling, NineFeaturesThousandEach) {
  const std::vector<std::string> classes{"a", "b", "c", "d", "e", "f", "g", "h", "i"};
  const auto pool = Labeled(classes, 1200, ClassAxis::kFeature);
  const auto s = SampleBalanced(pool, 1000, ClassAxis::kFeature, 1);
  EXPECT_EQ(s.size(), 9000u);
  for (const auto& [_, n] : ClassHistogram(s, ClassAxis::kFeature)) EXPECT_EQ(n, 1000u);
  std::set<std::uint64_t> ids;
  for (const auto& p : s) ids.insert(p.patch_id);
  EXPECT_EQ(ids.size(), s.size());
  EXPECT_EQ(SampleBalanced(pool, 1000, ClassAxis::kFeature, 1), s);
  EXPECT_NE(SampleBalanced(pool, 1000, ClassAxis::kFeature, 2), s);
}

TEST(Sampling, FourGleasonClasses) {
  const auto pool = Labeled({"NT", "GP3", "GP4", "GP5"}, 2500, ClassAxis::kGleason);
  EXPECT_EQ(SampleBalanced(pool, 2000, ClassAxis::kGleason, 3).size(), 8000u);
}

TEST(Sampling, UnderflowNamesClass) {
  auto pool = Labeled({"big", "small"}, 10, ClassAxis::kFeature);
  pool.resize(15);  // "small" keeps 5
  try {
    SampleBalanced(pool, 8, ClassAxis::kFeature, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUnderflow);
    EXPECT_NE(std::string(e.what()).find("small=5"), std::string::npos);
  }
}

TEST(Sampling, MultiLabelUsesFirstLabel) {
  PatchRecord p;
  p.labels.histologic_features = {"stroma", "nerve"};
  EXPECT_EQ(PrimaryClass(p.labels, ClassAxis::kFeature), "nerve");
  p.labels.organ = "breast";
  EXPECT_EQ(PrimaryClass(p.labels, ClassAxis::kFeatureXOrgan), "nerve|breast");
  EXPECT_FALSE(PrimaryClass(p.labels, ClassAxis::kGleason).has_value());
}

class ReadRegionTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new TempDir("region");
    GenerateSynthetic(SmallSpec(1), dir_->path());
  }
  static void TearDownTestSuite() {
    delete dir_;
    dir_ = nullptr;
  }
  static TempDir* dir_;
};
TempDir* ReadRegionTest::dir_ = nullptr;

TEST_F(ReadRegionTest, TileAlignedReadEqualsTileFile) {
  const auto store = SlideStore::Open(dir_->path());
  const auto bytes = ReadBinaryFile(store.TilePath(0, 0, 1, 2));
  const Image tile = DecodePng(bytes);
  EXPECT_EQ(store.ReadRegion(0, Magnification::k40X, 256, 512, 256, 256), tile);
}

TEST_F(ReadRegionTest, SinglePixel) {
  const auto store = SlideStore::Open(dir_->path());
  const Image px = store.ReadRegion(0, Magnification::k40X, 0, 0, 1, 1);
  const auto tile = store.ReadTile(0, 0, 0, 0);
  ASSERT_EQ(px.width(), 1);
  for (int c = 0; c < 3; ++c) EXPECT_EQ(px.at(0, 0, c), tile->at(0, 0, c));
}

TEST_F(ReadRegionTest, FourTileSpanMatchesPerPixelLookup) {
  const auto store = SlideStore::Open(dir_->path());
  for (auto [mag, level] : {std::pair{Magnification::k40X, 0}, std::pair{Magnification::k10X, 2}}) {
    const int ds = Downsample(mag);
    const std::int64_t lx = 200, ly = 150;
    const Image img = store.ReadRegion(0, mag, lx * ds, ly * ds, 90, 120);
    for (int y = 0; y < img.height(); ++y) {
      for (int x = 0; x < img.width(); ++x) {
        const std::int64_t gx = lx + x, gy = ly + y;
        const auto tile = store.ReadTile(0, static_cast<std::size_t>(level), gx / 256, gy / 256);
        for (int c = 0; c < 3; ++c) {
          ASSERT_EQ(img.at(x, y, c), tile->at(static_cast<int>(gx % 256), static_cast<int>(gy % 256), c));
        }
      }
    }
  }
}

TEST_F(ReadRegionTest, OutOfBoundsRejected) {
  const auto store = SlideStore::Open(dir_->path());
  EXPECT_THROW(store.ReadRegion(0, Magnification::k40X, 1100, 0, 200, 10), Error);
  EXPECT_THROW(store.ReadRegion(0, Magnification::k5X, 0, 0, 10, 10), Error);
  EXPECT_THROW(store.ReadRegion(3, Magnification::k40X, 0, 0, 10, 10), Error);
}

TEST_F(ReadRegionTest, MissingTileRejectedOnOpen) {
  TempDir copy("region-copy");
  fs::copy(dir_->path(), copy.path(), fs::copy_options::recursive);
  fs::remove(copy / "0/0/0_0.png");
  try {
    SlideStore::Open(copy.path());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNotFound);
  }
}

TEST_F(ReadRegionTest, CorruptTileIsAnError) {
  TempDir copy("region-copy");
  fs::copy(dir_->path(), copy.path(), fs::copy_options::recursive);
  std::ofstream(copy / "0/0/0_0.png") << "not a png";
  const auto store = SlideStore::Open(copy.path());
  EXPECT_THROW(store.ReadRegion(0, Magnification::k40X, 0, 0, 10, 10), Error);
  EXPECT_NO_THROW(store.ReadRegion(0, Magnification::k40X, 512, 512, 10, 10));
}

TEST(PatchTable, RoundTrip) {
  TempDir dir("table");
  auto pool = Labeled({"x", "y"}, 3, ClassAxis::kFeature);
  pool[1].labels.organ = "colon";
  WritePatchTable(dir / "p.ndjson", pool);
  EXPECT_EQ(ReadPatchTable(dir / "p.ndjson"), pool);
}

}  // namespace
}  // namespace simsearch::dataset
