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

#include "dataset/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <set>

#include "common/error.hpp"
#include "common/json_io.hpp"
#include "common/parallel.hpp"
#include "common/png_io.hpp"
#include "dataset/slide_store.hpp"

namespace simsearch::dataset {
namespace fs = std::filesystem;

namespace {

// splitmix64 finalizer; gives position-keyed noise independent of the order
// in which pixels are rendered.
std::uint64_t Mix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

TextureParams TextureFromJson(const json& j, const TextureParams& defaults) {
  TextureParams t = defaults;
  if (j.contains("color")) {
    const auto& c = j["color"];
    Require(c.is_array() && c.size() == 3, ErrorCode::kInvalidArgument, "color must be [r,g,b]");
    for (int i = 0; i < 3; ++i) t.color[i] = c[i].get<int>();
  }
  t.stripe_period_px = j.value("stripe_period", t.stripe_period_px);
  t.stripe_angle_deg = j.value("stripe_angle", t.stripe_angle_deg);
  t.noise_amplitude = j.value("noise", t.noise_amplitude);
  t.stripe_depth = j.value("stripe_depth", t.stripe_depth);
  return t;
}

json TextureToJson(const TextureParams& t) {
  return json{{"color", t.color},
              {"stripe_period", t.stripe_period_px},
              {"stripe_angle", t.stripe_angle_deg},
              {"noise", t.noise_amplitude},
              {"stripe_depth", t.stripe_depth}};
}

struct PlacedRegion {
  std::int64_t cx = 0;  // in cells
  std::int64_t cy = 0;
  std::int64_t size = 1;
  int class_index = 0;
};

void ValidateTexture(const TextureParams& t, const std::string& what) {
  for (int c : t.color) {
    Require(c >= 0 && c <= 255, ErrorCode::kInvalidArgument, what + ": color out of [0,255]");
  }
  Require(t.stripe_period_px > 0, ErrorCode::kInvalidArgument, what + ": stripe_period must be > 0");
  Require(t.noise_amplitude >= 0, ErrorCode::kInvalidArgument, what + ": noise must be >= 0");
  Require(t.stripe_depth >= 0 && t.stripe_depth <= 1, ErrorCode::kInvalidArgument,
          what + ": stripe_depth must be in [0,1]");
}

}  // namespace

void SynthSpec::Validate() const {
  Require(n_slides >= 1, ErrorCode::kInvalidArgument, "n_slides must be >= 1");
  Require(slide_width_px > 0 && slide_height_px > 0, ErrorCode::kInvalidArgument,
          "slide size must be positive");
  Require(tile_size_px >= 16, ErrorCode::kInvalidArgument, "tile_size must be >= 16");
  Require(cell_px > 0, ErrorCode::kInvalidArgument, "cell_px must be positive");
  Require(regions_per_slide >= 0, ErrorCode::kInvalidArgument, "regions_per_slide must be >= 0");
  Require(region_cells_min >= 1 && region_cells_max >= region_cells_min,
          ErrorCode::kInvalidArgument, "region_cells must satisfy 1 <= min <= max");
  Require(!levels.empty() && levels.front() == Magnification::k40X, ErrorCode::kInvalidArgument,
          "levels must start at 40X");
  for (std::size_t i = 1; i < levels.size(); ++i) {
    Require(Downsample(levels[i]) > Downsample(levels[i - 1]), ErrorCode::kInvalidArgument,
            "levels must be in decreasing magnification order");
  }
  Require(classes.size() >= 2, ErrorCode::kInvalidArgument, "at least 2 classes are required");
  std::set<std::string> names;
  for (std::size_t i = 0; i < classes.size(); ++i) {
    const auto& c = classes[i];
    Require(!c.name.empty(), ErrorCode::kInvalidArgument, "class names must be non-empty");
    Require(names.insert(c.name).second, ErrorCode::kInvalidArgument,
            "duplicate class name '" + c.name + "'");
    Require(c.kind != LabelKind::kOrgan, ErrorCode::kInvalidArgument,
            "organ labels come from the organs list, not classes");
    if (c.kind == LabelKind::kGleason) {
      Require(ParseGleason(c.name).has_value(), ErrorCode::kInvalidArgument,
              "gleason class must be named NT, GP3, GP4 or GP5");
    }
    ValidateTexture(c.texture, "class '" + c.name + "'");
    for (std::size_t j = 0; j < i; ++j) {
      Require(!(classes[j].texture == c.texture), ErrorCode::kInvalidArgument,
              "classes '" + classes[j].name + "' and '" + c.name + "' share texture parameters");
    }
  }
  ValidateTexture(background, "background");
  const std::int64_t cells = (slide_width_px / cell_px) * (slide_height_px / cell_px);
  Require(static_cast<std::int64_t>(regions_per_slide) * region_cells_min * region_cells_min <= cells,
          ErrorCode::kInvalidArgument,
          "slide too small for requested regions: " + std::to_string(regions_per_slide) +
              " regions of at least " + std::to_string(region_cells_min) + "x" +
              std::to_string(region_cells_min) + " cells, but only " + std::to_string(cells) +
              " cells fit");
}

SynthSpec SynthSpecFromJson(const json& j) {
  SynthSpec s;
  try {
    s.seed = j.value("seed", s.seed);
    s.n_slides = j.value("n_slides", s.n_slides);
    s.slide_width_px = j.value("slide_width", s.slide_width_px);
    s.slide_height_px = j.value("slide_height", s.slide_height_px);
    s.tile_size_px = j.value("tile_size", s.tile_size_px);
    s.cell_px = j.value("cell_px", s.cell_px);
    s.regions_per_slide = j.value("regions_per_slide", s.regions_per_slide);
    if (j.contains("region_cells")) {
      s.region_cells_min = j["region_cells"].at(0).get<int>();
      s.region_cells_max = j["region_cells"].at(1).get<int>();
    }
    if (j.contains("levels")) {
      s.levels.clear();
      for (const auto& l : j["levels"]) s.levels.push_back(ParseMagnification(l.get<std::string>()));
    }
    if (j.contains("organs")) s.organs = j["organs"].get<std::vector<std::string>>();
    if (j.contains("background")) s.background = TextureFromJson(j["background"], s.background);
    for (const auto& c : j.at("classes")) {
      ClassDescriptor d;
      d.name = c.at("name").get<std::string>();
      d.kind = ParseLabelKind(c.value("kind", std::string("histologic_feature")));
      d.texture = TextureFromJson(c, TextureParams{});
      s.classes.push_back(std::move(d));
    }
  } catch (const json::exception& e) {
    Fail(ErrorCode::kInvalidArgument, std::string("bad synth spec: ") + e.what());
  }
  s.Validate();
  return s;
}

json ToJson(const SynthSpec& spec) {
  json classes = json::array();
  for (const auto& c : spec.classes) {
    json t = TextureToJson(c.texture);
    t["name"] = c.name;
    t["kind"] = std::string(LabelKindName(c.kind));
    classes.push_back(t);
  }
  json levels = json::array();
  for (auto m : spec.levels) levels.push_back(std::string(MagnificationName(m)));
  return json{{"seed", spec.seed},
              {"n_slides", spec.n_slides},
              {"slide_width", spec.slide_width_px},
              {"slide_height", spec.slide_height_px},
              {"tile_size", spec.tile_size_px},
              {"cell_px", spec.cell_px},
              {"regions_per_slide", spec.regions_per_slide},
              {"region_cells", {spec.region_cells_min, spec.region_cells_max}},
              {"levels", levels},
              {"organs", spec.organs},
              {"background", TextureToJson(spec.background)},
              {"classes", classes}};
}

namespace {

struct StripeBasis {
  double cos_a;
  double sin_a;
};

StripeBasis BasisOf(const TextureParams& t) {
  const double angle = t.stripe_angle_deg * std::numbers::pi / 180.0;
  return {std::cos(angle), std::sin(angle)};
}

std::array<std::uint8_t, 3> ShadePixel(const TextureParams& t, const StripeBasis& b,
                                       std::uint64_t seed, std::uint32_t slide_id, std::int64_t x,
                                       std::int64_t y) {
  const double phase =
      (static_cast<double>(x) * b.cos_a + static_cast<double>(y) * b.sin_a) / t.stripe_period_px;
  const double shade =
      1.0 - t.stripe_depth / 2.0 + t.stripe_depth / 2.0 * std::cos(2.0 * std::numbers::pi * phase);
  std::uint64_t h = Mix(seed ^ Mix(static_cast<std::uint64_t>(slide_id) ^
                                   Mix(static_cast<std::uint64_t>(x) ^
                                       (static_cast<std::uint64_t>(y) << 32))));
  std::array<std::uint8_t, 3> out{};
  for (int c = 0; c < 3; ++c) {
    h = Mix(h);
    // Uniform in [-1, 1].
    const double u = static_cast<double>(h >> 11) * 0x1.0p-53 * 2.0 - 1.0;
    const double v = t.color[c] * shade + u * t.noise_amplitude;
    out[c] = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
  }
  return out;
}

}  // namespace

std::array<std::uint8_t, 3> TexturePixel(const TextureParams& t, std::uint64_t seed,
                                         std::uint32_t slide_id, std::int64_t x, std::int64_t y) {
  return ShadePixel(t, BasisOf(t), seed, slide_id, x, y);
}

Image Downsample2x(const Image& src) {
  const int w = src.width() / 2;
  const int h = src.height() / 2;
  Image out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < 3; ++c) {
        const int sum = src.at(2 * x, 2 * y, c) + src.at(2 * x + 1, 2 * y, c) +
                        src.at(2 * x, 2 * y + 1, c) + src.at(2 * x + 1, 2 * y + 1, c);
        out.at(x, y, c) = static_cast<std::uint8_t>((sum + 2) / 4);
      }
    }
  }
  return out;
}

namespace {

std::vector<PlacedRegion> PlaceRegions(const SynthSpec& spec, std::uint32_t slide_id,
                                       std::mt19937_64& rng) {
  const std::int64_t gw = spec.slide_width_px / spec.cell_px;
  const std::int64_t gh = spec.slide_height_px / spec.cell_px;
  std::vector<std::uint8_t> occupied(static_cast<std::size_t>(gw * gh), 0);
  std::vector<PlacedRegion> placed;
  for (int r = 0; r < spec.regions_per_slide; ++r) {
    std::uniform_int_distribution<int> size_dist(spec.region_cells_min, spec.region_cells_max);
    const std::int64_t size = size_dist(rng);
    std::vector<std::pair<std::int64_t, std::int64_t>> free_spots;
    for (std::int64_t cy = 0; cy + size <= gh; ++cy) {
      for (std::int64_t cx = 0; cx + size <= gw; ++cx) {
        bool ok = true;
        for (std::int64_t dy = 0; dy < size && ok; ++dy) {
          for (std::int64_t dx = 0; dx < size && ok; ++dx) {
            ok = !occupied[static_cast<std::size_t>((cy + dy) * gw + cx + dx)];
          }
        }
        if (ok) free_spots.emplace_back(cx, cy);
      }
    }
    Require(!free_spots.empty(), ErrorCode::kInvalidArgument,
            "slide too small for requested regions: could not place region " +
                std::to_string(r) + " on slide " + std::to_string(slide_id));
    std::uniform_int_distribution<std::size_t> pick(0, free_spots.size() - 1);
    const auto [cx, cy] = free_spots[pick(rng)];
    for (std::int64_t dy = 0; dy < size; ++dy) {
      for (std::int64_t dx = 0; dx < size; ++dx) {
        occupied[static_cast<std::size_t>((cy + dy) * gw + cx + dx)] = 1;
      }
    }
    const auto global = static_cast<std::int64_t>(slide_id) * spec.regions_per_slide + r;
    placed.push_back({cx, cy, size,
                      static_cast<int>(global % static_cast<std::int64_t>(spec.classes.size()))});
  }
  return placed;
}

std::vector<Point> Rect(double x0, double y0, double x1, double y1) {
  return {{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}};
}

void RenderSlide(const SynthSpec& spec, const SlideRef& slide,
                 const std::vector<PlacedRegion>& regions, const fs::path& root) {
  const int w = static_cast<int>(slide.base_width_px);
  const int h = static_cast<int>(slide.base_height_px);
  // Per-cell texture lookup; -1 is background.
  const std::int64_t gw = spec.slide_width_px / spec.cell_px;
  const std::int64_t gh = spec.slide_height_px / spec.cell_px;
  std::vector<int> cell_class(static_cast<std::size_t>(gw * gh), -1);
  for (const auto& r : regions) {
    for (std::int64_t dy = 0; dy < r.size; ++dy) {
      for (std::int64_t dx = 0; dx < r.size; ++dx) {
        cell_class[static_cast<std::size_t>((r.cy + dy) * gw + r.cx + dx)] = r.class_index;
      }
    }
  }
  const StripeBasis background_basis = BasisOf(spec.background);
  std::vector<StripeBasis> bases;
  for (const auto& c : spec.classes) bases.push_back(BasisOf(c.texture));
  Image level(w, h);
  for (int y = 0; y < h; ++y) {
    const std::int64_t cy = y / spec.cell_px;
    for (int x = 0; x < w; ++x) {
      const std::int64_t cx = x / spec.cell_px;
      int cls = -1;
      if (cx < gw && cy < gh) cls = cell_class[static_cast<std::size_t>(cy * gw + cx)];
      const TextureParams& t = cls < 0 ? spec.background : spec.classes[cls].texture;
      const StripeBasis& b = cls < 0 ? background_basis : bases[static_cast<std::size_t>(cls)];
      const auto px = ShadePixel(t, b, spec.seed, slide.slide_id, x, y);
      std::copy(px.begin(), px.end(), level.pixel(x, y));
    }
  }
  int current_ds = 1;
  for (std::size_t li = 0; li < slide.levels.size(); ++li) {
    while (current_ds < slide.levels[li].downsample) {
      level = Downsample2x(level);
      current_ds *= 2;
    }
    const int ts = slide.tile_size_px;
    const fs::path dir = root / std::to_string(slide.slide_id) / std::to_string(li);
    fs::create_directories(dir);
    for (int ty = 0; ty * ts < level.height(); ++ty) {
      for (int tx = 0; tx * ts < level.width(); ++tx) {
        const int tw = std::min(ts, level.width() - tx * ts);
        const int th = std::min(ts, level.height() - ty * ts);
        const auto png = EncodePng(level.Crop(tx * ts, ty * ts, tw, th));
        WriteFileAtomic(dir / (std::to_string(ty) + "_" + std::to_string(tx) + ".png"),
                        std::string_view(reinterpret_cast<const char*>(png.data()), png.size()));
      }
    }
  }
}

}  // namespace

SynthOutput GenerateSynthetic(const SynthSpec& spec, const fs::path& root, std::size_t threads) {
  spec.Validate();
  SynthOutput out;
  std::vector<std::vector<PlacedRegion>> placements;
  // Placement draws from one generator in slide order, so the layout does not
  // depend on how rendering is scheduled.
  std::mt19937_64 rng(spec.seed);
  for (int s = 0; s < spec.n_slides; ++s) {
    SlideRef slide;
    slide.slide_id = static_cast<std::uint32_t>(s);
    slide.name = "synth_" + std::to_string(s);
    slide.base_width_px = spec.slide_width_px;
    slide.base_height_px = spec.slide_height_px;
    slide.tile_size_px = spec.tile_size_px;
    for (auto m : spec.levels) slide.levels.push_back(MagLevel::Of(m));
    slide.Validate();
    placements.push_back(PlaceRegions(spec, slide.slide_id, rng));
    for (const auto& r : placements.back()) {
      const auto& cls = spec.classes[r.class_index];
      const double x0 = static_cast<double>(r.cx * spec.cell_px);
      const double y0 = static_cast<double>(r.cy * spec.cell_px);
      const double side = static_cast<double>(r.size * spec.cell_px);
      out.annotations.push_back(
          {slide.slide_id, cls.name, cls.kind, Rect(x0, y0, x0 + side, y0 + side)});
    }
    if (!spec.organs.empty()) {
      out.annotations.push_back({slide.slide_id, spec.organs[s % spec.organs.size()],
                                 LabelKind::kOrgan,
                                 Rect(0, 0, static_cast<double>(slide.base_width_px),
                                      static_cast<double>(slide.base_height_px))});
    }
    out.slides.push_back(std::move(slide));
  }

  fs::create_directories(root);
  ParallelFor(out.slides.size(), threads,
              [&](std::size_t i) { RenderSlide(spec, out.slides[i], placements[i], root); });

  WriteAnnotations(root / "annotations.json", out.annotations);
  WriteFileAtomic(SlideStore::ManifestPath(root),
                  SlideStore::ManifestJson(out.slides).dump(1) + "\n");
  return out;
}

}  // namespace simsearch::dataset
