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

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "embedder/embedder.hpp"
#include "index/entry_table.hpp"

namespace simsearch::embed {

// Groups the records of an embedding-DB file into per-patch sets. Every patch
// must carry all 8 orientations exactly once, all with the same dimension.
std::vector<OrientedEmbeddingSet> ImportEmbeddings(const std::filesystem::path& path,
                                                   std::optional<int> expected_dim = std::nullopt);

// Same validation over an in-memory table.
std::vector<OrientedEmbeddingSet> GroupOrientations(const index::EntryTable& table);

// Writes sets in the embedding-DB format. Location fields come from `meta`
// when given (matched by patch_id), otherwise they are zero.
void ExportEmbeddings(const std::filesystem::path& path, const std::string& embedder_name,
                      const std::vector<OrientedEmbeddingSet>& sets,
                      const std::vector<index::EntryMeta>& meta = {});

}  // namespace simsearch::embed
