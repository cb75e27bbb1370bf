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
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

namespace simsearch {

using json = nlohmann::json;

std::string ReadTextFile(const std::filesystem::path& path);
std::vector<std::uint8_t> ReadBinaryFile(const std::filesystem::path& path);

// Writes through a sibling temp file and renames, so readers never observe a
// half-written file.
void WriteFileAtomic(const std::filesystem::path& path, std::string_view bytes);

json ParseJson(std::string_view text, const std::string& what);
json ReadJsonFile(const std::filesystem::path& path);

// Calls `fn` once per non-blank line. Line numbers are 1-based.
void ForEachNdjsonLine(const std::filesystem::path& path,
                       const std::function<void(const json&, std::size_t)>& fn);

}  // namespace simsearch
