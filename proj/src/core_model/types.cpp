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

#include "core_model/types.hpp"

#include "common/error.hpp"

namespace simsearch {

std::string_view MagnificationName(Magnification m) {
  switch (m) {
    case Magnification::k40X: return "40X";
    case Magnification::k20X: return "20X";
    case Magnification::k10X: return "10X";
    case Magnification::k5X: return "5X";
  }
  return "?";
}

Magnification ParseMagnification(std::string_view name) {
  for (auto m : kAllMagnifications) {
    if (MagnificationName(m) == name) return m;
  }
  Fail(ErrorCode::kInvalidArgument,
       "invalid magnification '" + std::string(name) + "' (expected 40X, 20X, 10X or 5X)");
}

Magnification MagnificationFromDownsample(int downsample) {
  for (auto m : kAllMagnifications) {
    if (Downsample(m) == downsample) return m;
  }
  Fail(ErrorCode::kInvalidArgument, "invalid downsample " + std::to_string(downsample));
}

void MagLevel::Validate() const {
  Require(downsample == Downsample(magnification), ErrorCode::kInvalidArgument,
          "magnification " + std::string(MagnificationName(magnification)) +
              " does not pair with downsample " + std::to_string(downsample));
}

void SlideRef::Validate() const {
  Require(base_width_px > 0 && base_height_px > 0, ErrorCode::kInvalidArgument,
          "slide " + std::to_string(slide_id) + " has non-positive dimensions");
  Require(tile_size_px > 0, ErrorCode::kInvalidArgument,
          "slide " + std::to_string(slide_id) + " has non-positive tile size");
  Require(!levels.empty(), ErrorCode::kInvalidArgument,
          "slide " + std::to_string(slide_id) + " has no levels");
  Require(levels.front().downsample == 1, ErrorCode::kInvalidArgument,
          "slide " + std::to_string(slide_id) + " level 0 must have downsample 1");
  for (std::size_t i = 0; i < levels.size(); ++i) {
    levels[i].Validate();
    if (i > 0) {
      Require(levels[i].downsample > levels[i - 1].downsample, ErrorCode::kInvalidArgument,
              "slide " + std::to_string(slide_id) + " downsamples must strictly increase");
    }
  }
}

std::optional<std::size_t> SlideRef::LevelIndex(Magnification m) const {
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (levels[i].magnification == m) return i;
  }
  return std::nullopt;
}

std::string_view GleasonName(Gleason g) {
  switch (g) {
    case Gleason::kNT: return "NT";
    case Gleason::kGP3: return "GP3";
    case Gleason::kGP4: return "GP4";
    case Gleason::kGP5: return "GP5";
  }
  return "?";
}

std::optional<Gleason> ParseGleason(std::string_view name) {
  for (auto g : {Gleason::kNT, Gleason::kGP3, Gleason::kGP4, Gleason::kGP5}) {
    if (GleasonName(g) == name) return g;
  }
  return std::nullopt;
}

void LabelSet::Validate() const {
  if (!gleason) return;
  const bool tumor = *gleason != Gleason::kNT;
  Require(tumor_present.has_value() && *tumor_present == tumor, ErrorCode::kInvalidArgument,
          "gleason " + std::string(GleasonName(*gleason)) + " requires tumor_present=" +
              (tumor ? "true" : "false"));
}

void PatchRecord::Validate(const SlideRef& slide) const {
  Require(slide.slide_id == slide_id, ErrorCode::kInvalidArgument, "patch slide mismatch");
  Require(side_px > 0, ErrorCode::kInvalidArgument, "patch side must be positive");
  const int ds = downsample();
  Require(x >= 0 && y >= 0 && x % ds == 0 && y % ds == 0, ErrorCode::kInvalidArgument,
          "patch " + std::to_string(patch_id) + " origin must be non-negative multiples of " +
              std::to_string(ds));
  Require(x + base_side() <= slide.base_width_px && y + base_side() <= slide.base_height_px,
          ErrorCode::kInvalidArgument,
          "patch " + std::to_string(patch_id) + " extends outside slide " +
              std::to_string(slide_id));
  labels.Validate();
}

std::pair<double, double> BaseCenter(std::int64_t x, std::int64_t y, int side_px,
                                     Magnification m) {
  const double half = static_cast<double>(side_px) * Downsample(m) / 2.0;
  return {static_cast<double>(x) + half, static_cast<double>(y) + half};
}

std::pair<double, double> BaseCenter(const PatchRecord& p) {
  return BaseCenter(p.x, p.y, p.side_px, p.magnification);
}

json ToJson(const LabelSet& labels) {
  json j;
  j["features"] = labels.histologic_features;
  j["organ"] = labels.organ ? json(*labels.organ) : json(nullptr);
  j["gleason"] = labels.gleason ? json(std::string(GleasonName(*labels.gleason))) : json(nullptr);
  j["tumor_present"] = labels.tumor_present ? json(*labels.tumor_present) : json(nullptr);
  return j;
}

LabelSet LabelSetFromJson(const json& j) {
  LabelSet labels;
  if (j.contains("features")) {
    for (const auto& f : j.at("features")) labels.histologic_features.insert(f.get<std::string>());
  }
  if (j.contains("organ") && !j["organ"].is_null()) labels.organ = j["organ"].get<std::string>();
  if (j.contains("gleason") && !j["gleason"].is_null()) {
    const auto name = j["gleason"].get<std::string>();
    labels.gleason = ParseGleason(name);
    Require(labels.gleason.has_value(), ErrorCode::kFormat, "unknown gleason label " + name);
  }
  if (j.contains("tumor_present") && !j["tumor_present"].is_null()) {
    labels.tumor_present = j["tumor_present"].get<bool>();
  }
  labels.Validate();
  return labels;
}

json ToJson(const PatchRecord& p) {
  return json{{"patch_id", p.patch_id},
              {"slide_id", p.slide_id},
              {"mag", std::string(MagnificationName(p.magnification))},
              {"x", p.x},
              {"y", p.y},
              {"side_px", p.side_px},
              {"labels", ToJson(p.labels)}};
}

PatchRecord PatchRecordFromJson(const json& j) {
  try {
    PatchRecord p;
    p.patch_id = j.at("patch_id").get<std::uint64_t>();
    p.slide_id = j.at("slide_id").get<std::uint32_t>();
    p.magnification = ParseMagnification(j.at("mag").get<std::string>());
    p.x = j.at("x").get<std::int64_t>();
    p.y = j.at("y").get<std::int64_t>();
    p.side_px = j.value("side_px", kDefaultPatchSide);
    if (j.contains("labels")) p.labels = LabelSetFromJson(j["labels"]);
    return p;
  } catch (const json::exception& e) {
    Fail(ErrorCode::kFormat, std::string("bad patch record: ") + e.what());
  }
}

json ToJson(const SlideRef& s) {
  json levels = json::array();
  for (const auto& l : s.levels) {
    levels.push_back({{"magnification", std::string(MagnificationName(l.magnification))},
                      {"downsample", l.downsample}});
  }
  return json{{"slide_id", s.slide_id},   {"name", s.name},
              {"width", s.base_width_px}, {"height", s.base_height_px},
              {"tile_size", s.tile_size_px}, {"levels", levels}};
}

SlideRef SlideRefFromJson(const json& j) {
  try {
    SlideRef s;
    s.slide_id = j.at("slide_id").get<std::uint32_t>();
    s.name = j.value("name", std::string());
    s.base_width_px = j.at("width").get<std::int64_t>();
    s.base_height_px = j.at("height").get<std::int64_t>();
    s.tile_size_px = j.at("tile_size").get<int>();
    for (const auto& l : j.at("levels")) {
      s.levels.push_back({ParseMagnification(l.at("magnification").get<std::string>()),
                          l.at("downsample").get<int>()});
    }
    s.Validate();
    return s;
  } catch (const json::exception& e) {
    Fail(ErrorCode::kFormat, std::string("bad slide entry: ") + e.what());
  }
}

}  // namespace simsearch
