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

#include "support/support.hpp"

#include <atomic>
#include <cmath>
#include <unistd.h>

namespace simsearch::testing {

namespace fs = std::filesystem;

TempDir::TempDir(const std::string& tag) {
  static std::atomic<int> counter{0};
  path_ = fs::temp_directory_path() /
          ("simsearch-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
  fs::remove_all(path_);
  fs::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

std::vector<dataset::ClassDescriptor> NineClasses() {
  using dataset::ClassDescriptor;
  using dataset::LabelKind;
  struct Row {
    const char* name;
    int r, g, b;
    double period, angle, noise;
  };
  const Row rows[] = {
      {"artery", 196, 64, 84, 24, 0, 10},         {"nerve", 226, 170, 190, 40, 30, 8},
      {"smooth_muscle", 210, 90, 140, 16, 60, 12}, {"fat", 245, 240, 235, 96, 90, 4},
      {"stroma", 200, 120, 170, 32, 120, 14},      {"lymphocytes", 70, 50, 140, 8, 45, 20},
      {"vein", 150, 30, 60, 56, 150, 6},           {"capillary", 180, 140, 100, 20, 75, 10},
      {"gland", 120, 90, 200, 48, 15, 9},
  };
  std::vector<ClassDescriptor> out;
  for (const auto& r : rows) {
    ClassDescriptor c;
    c.name = r.name;
    c.kind = LabelKind::kHistologicFeature;
    c.texture.color = {r.r, r.g, r.b};
    c.texture.stripe_period_px = r.period;
    c.texture.stripe_angle_deg = r.angle;
    c.texture.noise_amplitude = r.noise;
    out.push_back(c);
  }
  return out;
}

dataset::SynthSpec SmallSpec(int n_slides, std::int64_t slide_px, std::uint64_t seed) {
  dataset::SynthSpec s;
  s.seed = seed;
  s.n_slides = n_slides;
  s.slide_width_px = slide_px;
  s.slide_height_px = slide_px;
  s.tile_size_px = 256;
  s.cell_px = 300;
  s.regions_per_slide = 4;
  s.levels = {Magnification::k40X, Magnification::k20X, Magnification::k10X};
  s.organs = {"prostate", "breast"};
  s.classes = NineClasses();
  return s;
}

Image RandomImage(int w, int h, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Image img(w, h);
  for (auto& b : img.mutable_data()) b = static_cast<std::uint8_t>(rng() & 0xff);
  return img;
}

std::vector<float> RandomVector(int dim, std::mt19937_64& rng, bool unit) {
  std::uniform_real_distribution<float> u(-1.0f, 1.0f);
  std::vector<float> v(static_cast<std::size_t>(dim));
  double norm = 0;
  for (auto& x : v) {
    x = u(rng);
    norm += static_cast<double>(x) * x;
  }
  if (unit && norm > 0) {
    const double inv = 1.0 / std::sqrt(norm);
    for (auto& x : v) x = static_cast<float>(x * inv);
  }
  return v;
}

index::EntryTable RandomTable(std::size_t patches, int orientations_per_patch, int dim,
                              std::uint64_t seed, bool unit) {
  std::mt19937_64 rng(seed);
  index::EntryTable t(dim);
  t.Reserve(patches * static_cast<std::size_t>(orientations_per_patch));
  for (std::size_t p = 0; p < patches; ++p) {
    for (int o = 0; o < orientations_per_patch; ++o) {
      index::EntryMeta m;
      m.patch_id = p;
      m.slide_id = static_cast<std::uint32_t>(p % 7);
      m.magnification = Magnification::k10X;
      m.orientation = static_cast<Orientation>(o);
      m.x = static_cast<std::uint32_t>((p / 7) * 1200);
      m.y = 0;
      t.Append(m, RandomVector(dim, rng, unit));
    }
  }
  return t;
}

}  // namespace simsearch::testing
