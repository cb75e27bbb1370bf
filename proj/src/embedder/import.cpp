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

#include "embedder/import.hpp"

#include <map>

#include "common/error.hpp"
#include "index/db_file.hpp"

namespace simsearch::embed {

std::vector<OrientedEmbeddingSet> GroupOrientations(const index::EntryTable& table) {
  std::map<std::uint64_t, std::pair<OrientedEmbeddingSet, std::uint8_t>> by_patch;
  for (std::size_t i = 0; i < table.size(); ++i) {
    const auto& m = table.meta(i);
    auto& [set, seen] = by_patch[m.patch_id];
    set.patch_id = m.patch_id;
    const int code = OrientationCode(m.orientation);
    const auto bit = static_cast<std::uint8_t>(1u << code);
    if (seen & bit) {
      Fail(ErrorCode::kFormat, "duplicate (patch " + std::to_string(m.patch_id) + ", " +
                                   std::string(OrientationName(m.orientation)) + ")");
    }
    seen |= bit;
    auto v = table.vector(i);
    set.embeddings[static_cast<std::size_t>(code)].assign(v.begin(), v.end());
  }
  std::vector<OrientedEmbeddingSet> out;
  out.reserve(by_patch.size());
  for (auto& [id, entry] : by_patch) {
    if (entry.second != 0xFF) {
      std::string missing;
      for (Orientation o : kAllOrientations) {
        if (!(entry.second & (1u << OrientationCode(o)))) {
          missing += (missing.empty() ? "" : ",") + std::string(OrientationName(o));
        }
      }
      Fail(ErrorCode::kFormat,
           "patch " + std::to_string(id) + " is missing orientation(s) " + missing);
    }
    out.push_back(std::move(entry.first));
  }
  return out;
}

std::vector<OrientedEmbeddingSet> ImportEmbeddings(const std::filesystem::path& path,
                                                   std::optional<int> expected_dim) {
  auto db = index::LoadDb(path, expected_dim);
  return GroupOrientations(db.table);
}

void ExportEmbeddings(const std::filesystem::path& path, const std::string& embedder_name,
                      const std::vector<OrientedEmbeddingSet>& sets,
                      const std::vector<index::EntryMeta>& meta) {
  Require(!sets.empty(), ErrorCode::kInvalidArgument, "no embeddings to export");
  const int dim = static_cast<int>(sets.front().embeddings[0].size());
  std::map<std::uint64_t, const index::EntryMeta*> where;
  for (const auto& m : meta) where.emplace(m.patch_id, &m);
  index::EntryTable table(dim);
  table.Reserve(sets.size() * kNumOrientations);
  for (const auto& set : sets) {
    index::EntryMeta m;
    if (auto it = where.find(set.patch_id); it != where.end()) m = *it->second;
    m.patch_id = set.patch_id;
    for (Orientation o : kAllOrientations) {
      m.orientation = o;
      table.Append(m, set.embeddings[static_cast<std::size_t>(OrientationCode(o))]);
    }
  }
  index::SaveDb(path, embedder_name, table);
}

}  // namespace simsearch::embed
