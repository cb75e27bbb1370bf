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
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "core_model/image.hpp"
#include "dataset/synth.hpp"
#include "index/entry_table.hpp"

namespace simsearch::testing {

// Unique scratch directory, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag = "t");
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

// Nine visually distinct stripe textures.
std::vector<dataset::ClassDescriptor> NineClasses();

// Small store: slides of side `slide_px`, 300-px cells, 40X/20X/10X.
dataset::SynthSpec SmallSpec(int n_slides, std::int64_t slide_px = 1200, std::uint64_t seed = 7);

Image RandomImage(int w, int h, std::uint64_t seed);

// Seeded random unit vectors, one entry per (patch, orientation), patch ids from 0.
index::EntryTable RandomTable(std::size_t patches, int orientations_per_patch, int dim,
                              std::uint64_t seed, bool unit = true);

std::vector<float> RandomVector(int dim, std::mt19937_64& rng, bool unit = true);

}  // namespace simsearch::testing
