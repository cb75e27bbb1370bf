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

#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

namespace simsearch {

using json = nlohmann::json;

enum class Magnification : std::uint8_t { k40X = 0, k20X = 1, k10X = 2, k5X = 3 };

inline constexpr Magnification kAllMagnifications[] = {
    Magnification::k40X, Magnification::k20X, Magnification::k10X, Magnification::k5X};

// Downsample relative to the base (40X) level: 1, 2, 4, 8.
constexpr int Downsample(Magnification m) { return 1 << static_cast<int>(m); }
std::string_view MagnificationName(Magnification m);
Magnification ParseMagnification(std::string_view name);
Magnification MagnificationFromDownsample(int downsample);

struct MagLevel {
  Magnification magnification = Magnification::k40X;
  int downsample = 1;

  static MagLevel Of(Magnification m) { return {m, Downsample(m)}; }
  // Throws unless (magnification, downsample) is one of the four valid pairs.
  void Validate() const;
  friend bool operator==(const MagLevel&, const MagLevel&) = default;
};

struct SlideRef {
  std::uint32_t slide_id = 0;
  std::string name;
  std::int64_t base_width_px = 0;
  std::int64_t base_height_px = 0;
  int tile_size_px = 0;
  std::vector<MagLevel> levels;

  void Validate() const;
  // Index into `levels`, or nullopt when the slide lacks that magnification.
  std::optional<std::size_t> LevelIndex(Magnification m) const;
  std::int64_t LevelWidth(std::size_t level) const { return base_width_px / levels[level].downsample; }
  std::int64_t LevelHeight(std::size_t level) const { return base_height_px / levels[level].downsample; }
};

enum class Gleason : std::uint8_t { kNT = 0, kGP3 = 1, kGP4 = 2, kGP5 = 3 };
std::string_view GleasonName(Gleason g);
std::optional<Gleason> ParseGleason(std::string_view name);

struct LabelSet {
  std::set<std::string> histologic_features;
  std::optional<std::string> organ;
  std::optional<Gleason> gleason;
  std::optional<bool> tumor_present;

  bool empty() const {
    return histologic_features.empty() && !organ && !gleason && !tumor_present;
  }
  // Gleason grades imply tumor presence; NT implies absence.
  void Validate() const;
  friend bool operator==(const LabelSet&, const LabelSet&) = default;
};

struct PatchRecord {
  std::uint64_t patch_id = 0;
  std::uint32_t slide_id = 0;
  Magnification magnification = Magnification::k40X;
  std::int64_t x = 0;  // base-level pixels
  std::int64_t y = 0;
  int side_px = 300;   // level pixels
  LabelSet labels;

  int downsample() const { return Downsample(magnification); }
  std::int64_t base_side() const { return static_cast<std::int64_t>(side_px) * downsample(); }
  // Throws if the patch is misaligned or not fully inside the slide.
  void Validate(const SlideRef& slide) const;
  friend bool operator==(const PatchRecord&, const PatchRecord&) = default;
};

using Embedding = std::vector<float>;

inline constexpr int kDefaultEmbeddingDim = 128;
inline constexpr int kDefaultPatchSide = 300;

// Center of the patch footprint in base-level pixels.
std::pair<double, double> BaseCenter(const PatchRecord& p);
std::pair<double, double> BaseCenter(std::int64_t x, std::int64_t y, int side_px,
                                     Magnification m);

json ToJson(const LabelSet& labels);
LabelSet LabelSetFromJson(const json& j);
json ToJson(const PatchRecord& p);
PatchRecord PatchRecordFromJson(const json& j);
json ToJson(const SlideRef& s);
SlideRef SlideRefFromJson(const json& j);

}  // namespace simsearch
