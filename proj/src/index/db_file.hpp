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
#include <optional>
#include <string>

#include "index/entry_table.hpp"

namespace simsearch::index {

// Embedding database file, all integers little-endian:
//   "SMLY" | version u32 | dim u32 | name_len u32 | name bytes (UTF-8) | count u64
//   count x { patch_id u64 | slide_id u32 | mag u8 | orientation u8 |
//             x u32 | y u32 | side u16 | dim x f32 }
// Records are written in (patch_id, orientation) order.
inline constexpr char kDbMagic[4] = {'S', 'M', 'L', 'Y'};
inline constexpr std::uint32_t kDbVersion = 1;
inline constexpr std::size_t kRecordMetaBytes = 24;

std::size_t DbHeaderBytes(const std::string& embedder_name);
std::size_t DbRecordBytes(int dim);

struct DbHeader {
  std::uint32_t version = kDbVersion;
  std::uint32_t dim = 0;
  std::string embedder_name;
  std::uint64_t count = 0;
};

struct LoadedDb {
  DbHeader header;
  EntryTable table;
};

std::string SerializeDb(const std::string& embedder_name, const EntryTable& table);
void SaveDb(const std::filesystem::path& path, const std::string& embedder_name,
            const EntryTable& table);

// Validates magic, version, exact file length, record fields and, when
// given, the expected dimension and embedder name.
LoadedDb ParseDb(std::string_view bytes, std::optional<int> expected_dim = std::nullopt,
                 const std::optional<std::string>& expected_embedder = std::nullopt);
LoadedDb LoadDb(const std::filesystem::path& path, std::optional<int> expected_dim = std::nullopt,
                const std::optional<std::string>& expected_embedder = std::nullopt);

}  // namespace simsearch::index
