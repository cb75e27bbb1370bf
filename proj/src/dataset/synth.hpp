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

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "core_model/image.hpp"
#include "core_model/types.hpp"
#include "dataset/annotations.hpp"

namespace simsearch::dataset {

struct TextureParams {
  std::array<int, 3> color{128, 128, 128};
  double stripe_period_px = 32;  // base pixels
  double stripe_angle_deg = 0;
  double noise_amplitude = 8;    // uniform noise in [-a, a] per channel
  double stripe_depth = 0.35;    // relative intensity swing of the stripes

  friend bool operator==(const TextureParams&, const TextureParams&) = default;
};

struct ClassDescriptor {
  std::string name;
  LabelKind kind = LabelKind::kHistologicFeature;
  TextureParams texture;
};

struct SynthSpec {
  std::uint64_t seed = 0;
  int n_slides = 1;
  std::int64_t slide_width_px = 4800;
  std::int64_t slide_height_px = 4800;
  int tile_size_px = 512;
  // Regions are squares of whole grid cells; cell_px should be a multiple
  // of the base footprint of the patches you plan to extract.
  int cell_px = 1200;
  int regions_per_slide = 4;
  int region_cells_min = 1;
  int region_cells_max = 1;
  std::vector<Magnification> levels{Magnification::k40X, Magnification::k20X,
                                    Magnification::k10X, Magnification::k5X};
  // Slide s is tagged with organs[s % organs.size()] via a slide-wide region.
  std::vector<std::string> organs;
  TextureParams background{{236, 226, 234}, 48, 0, 6, 0.0};
  std::vector<ClassDescriptor> classes;

  void Validate() const;
};

SynthSpec SynthSpecFromJson(const json& j);
json ToJson(const SynthSpec& spec);

struct SynthOutput {
  std::vector<SlideRef> slides;
  std::vector<AnnotationRegion> annotations;
};

// Renders slides, their pyramids and tiles under `root`, and writes
// manifest.json and annotations.json. Byte-identical for a fixed spec.
SynthOutput GenerateSynthetic(const SynthSpec& spec, const std::filesystem::path& root,
                              std::size_t threads = 1);

// Deterministic texture value at base pixel (x, y); exposed for tests.
std::array<std::uint8_t, 3> TexturePixel(const TextureParams& t, std::uint64_t seed,
                                         std::uint32_t slide_id, std::int64_t x, std::int64_t y);

// 2x box-filter reduction, floor-sized.
Image Downsample2x(const Image& src);

}  // namespace simsearch::dataset
