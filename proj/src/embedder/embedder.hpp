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
#include <memory>
#include <string>
#include <vector>

#include "core_model/image.hpp"
#include "core_model/orientation.hpp"
#include "core_model/types.hpp"

namespace simsearch::embed {

struct EmbedderDescriptor {
  std::string name;
  int dim = kDefaultEmbeddingDim;
  std::string version;
  bool deterministic = true;
};

// Maps a preprocessed 224x224 image to a fixed-length vector. Implementations
// are stateless and safe to call concurrently.
class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual const EmbedderDescriptor& descriptor() const = 0;
  virtual Embedding Embed(const Image& preprocessed) const = 0;
};

// 48 color-histogram bins, 64 gradient-orientation bins (4x4 cells x 4
// orientations) and 16 mean-luminance cells, L2-normalized.
class ReferenceEmbedder final : public Embedder {
 public:
  static constexpr const char* kName = "reference";
  const EmbedderDescriptor& descriptor() const override { return descriptor_; }
  Embedding Embed(const Image& preprocessed) const override;

 private:
  EmbedderDescriptor descriptor_{kName, 128, "1", true};
};

// Baseline: only the 48 color-histogram bins (zero padded to 128).
class ColorOnlyEmbedder final : public Embedder {
 public:
  static constexpr const char* kName = "color-only";
  const EmbedderDescriptor& descriptor() const override { return descriptor_; }
  Embedding Embed(const Image& preprocessed) const override;

 private:
  EmbedderDescriptor descriptor_{kName, 128, "1", true};
};

std::unique_ptr<Embedder> MakeEmbedder(const std::string& name);
std::vector<std::string> EmbedderNames();

// Sub-vector layout of the reference embedding.
inline constexpr int kColorBins = 48;
inline constexpr int kGradientBins = 64;
inline constexpr int kLuminanceBins = 16;

// Scales to unit L2 norm. Squares are summed in sorted order, so permuting
// the input permutes the output exactly. A zero vector maps to e0.
Embedding NormalizeL2(const std::vector<double>& raw);

struct OrientedEmbeddingSet {
  std::uint64_t patch_id = 0;
  std::array<Embedding, kNumOrientations> embeddings;  // indexed by orientation code

  friend bool operator==(const OrientedEmbeddingSet&, const OrientedEmbeddingSet&) = default;
};

// Embeds all 8 orientations of a square patch:
//   entry o == embedder.Embed(PreprocessPatch(ApplyOrientation(img, o))).
OrientedEmbeddingSet EmbedAllOrientations(const Image& img, const Embedder& embedder,
                                          std::uint64_t patch_id = 0);

}  // namespace simsearch::embed
