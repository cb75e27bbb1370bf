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

#include "embedder/embedder.hpp"

#include "common/error.hpp"
#include "embedder/preprocess.hpp"

namespace simsearch::embed {

std::unique_ptr<Embedder> MakeEmbedder(const std::string& name) {
  if (name == ReferenceEmbedder::kName) return std::make_unique<ReferenceEmbedder>();
  if (name == ColorOnlyEmbedder::kName) return std::make_unique<ColorOnlyEmbedder>();
  Fail(ErrorCode::kInvalidArgument, "unknown embedder '" + name + "'");
}

std::vector<std::string> EmbedderNames() {
  return {ReferenceEmbedder::kName, ColorOnlyEmbedder::kName};
}

OrientedEmbeddingSet EmbedAllOrientations(const Image& img, const Embedder& embedder,
                                          std::uint64_t patch_id) {
  Require(img.width() == img.height(), ErrorCode::kInvalidArgument,
          "orientation expansion needs a square patch");
  // The integer resize commutes with the square symmetries, so resizing once
  // and re-orienting the 224x224 input is bit-identical to the definition.
  const Image base = PreprocessPatch(img);
  OrientedEmbeddingSet set;
  set.patch_id = patch_id;
  for (auto o : kAllOrientations) {
    Embedding e = embedder.Embed(ApplyOrientation(base, o));
    Require(static_cast<int>(e.size()) == embedder.descriptor().dim, ErrorCode::kInternal,
            "embedder returned wrong dimension");
    set.embeddings[static_cast<std::size_t>(OrientationCode(o))] = std::move(e);
  }
  return set;
}

}  // namespace simsearch::embed
