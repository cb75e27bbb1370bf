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

#include "index/db_file.hpp"

#include <bit>
#include <cstring>

#include "common/error.hpp"
#include "common/json_io.hpp"

namespace simsearch::index {

namespace {

class Writer {
 public:
  void Bytes(const void* p, std::size_t n) { out_.append(static_cast<const char*>(p), n); }
  template <typename T>
  void Le(T v) {
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      out_.push_back(static_cast<char>((static_cast<std::uint64_t>(v) >> (8 * i)) & 0xff));
    }
  }
  void F32(float v) { Le(std::bit_cast<std::uint32_t>(v)); }
  std::string Take() { return std::move(out_); }
  void Reserve(std::size_t n) { out_.reserve(n); }

 private:
  std::string out_;
};

class Reader {
 public:
  explicit Reader(std::string_view in) : in_(in) {}
  void Need(std::size_t n, const char* what) const {
    Require(pos_ + n <= in_.size(), ErrorCode::kFormat,
            std::string("truncated embedding database (") + what + ")");
  }
  template <typename T>
  T Le(const char* what) {
    Need(sizeof(T), what);
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in_[pos_ + i])) << (8 * i);
    }
    pos_ += sizeof(T);
    return static_cast<T>(v);
  }
  float F32(const char* what) { return std::bit_cast<float>(Le<std::uint32_t>(what)); }
  std::string_view Take(std::size_t n, const char* what) {
    Need(n, what);
    auto s = in_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  std::size_t pos() const { return pos_; }

 private:
  std::string_view in_;
  std::size_t pos_ = 0;
};

bool IsCanonical(const EntryTable& table) {
  for (std::size_t i = 1; i < table.size(); ++i) {
    const auto& a = table.meta(i - 1);
    const auto& b = table.meta(i);
    if (a.patch_id > b.patch_id || (a.patch_id == b.patch_id && a.orientation >= b.orientation)) {
      return false;
    }
  }
  return true;
}

}  // namespace

std::size_t DbHeaderBytes(const std::string& embedder_name) {
  return 4 + 4 + 4 + 4 + embedder_name.size() + 8;
}

std::size_t DbRecordBytes(int dim) { return kRecordMetaBytes + 4 * static_cast<std::size_t>(dim); }

std::string SerializeDb(const std::string& embedder_name, const EntryTable& table) {
  Require(!embedder_name.empty() && embedder_name.size() <= 4096, ErrorCode::kInvalidArgument,
          "embedder name must be 1..4096 bytes");
  if (!IsCanonical(table)) {
    EntryTable sorted = table;
    sorted.SortCanonical();
    sorted.CheckUnique();
    return SerializeDb(embedder_name, sorted);
  }
  Writer w;
  w.Reserve(DbHeaderBytes(embedder_name) + table.size() * DbRecordBytes(table.dim()));
  w.Bytes(kDbMagic, 4);
  w.Le<std::uint32_t>(kDbVersion);
  w.Le<std::uint32_t>(static_cast<std::uint32_t>(table.dim()));
  w.Le<std::uint32_t>(static_cast<std::uint32_t>(embedder_name.size()));
  w.Bytes(embedder_name.data(), embedder_name.size());
  w.Le<std::uint64_t>(table.size());
  for (std::size_t i = 0; i < table.size(); ++i) {
    const EntryMeta& m = table.meta(i);
    w.Le<std::uint64_t>(m.patch_id);
    w.Le<std::uint32_t>(m.slide_id);
    w.Le<std::uint8_t>(static_cast<std::uint8_t>(m.magnification));
    w.Le<std::uint8_t>(static_cast<std::uint8_t>(OrientationCode(m.orientation)));
    w.Le<std::uint32_t>(m.x);
    w.Le<std::uint32_t>(m.y);
    w.Le<std::uint16_t>(m.side_px);
    for (float v : table.vector(i)) w.F32(v);
  }
  return w.Take();
}

void SaveDb(const std::filesystem::path& path, const std::string& embedder_name,
            const EntryTable& table) {
  WriteFileAtomic(path, SerializeDb(embedder_name, table));
}

LoadedDb ParseDb(std::string_view bytes, std::optional<int> expected_dim,
                 const std::optional<std::string>& expected_embedder) {
  Reader r(bytes);
  const auto magic = r.Take(4, "magic");
  Require(std::memcmp(magic.data(), kDbMagic, 4) == 0, ErrorCode::kFormat,
          "not an embedding database (bad magic)");
  DbHeader h;
  h.version = r.Le<std::uint32_t>("version");
  Require(h.version == kDbVersion, ErrorCode::kFormat,
          "unsupported database version " + std::to_string(h.version));
  h.dim = r.Le<std::uint32_t>("dim");
  Require(h.dim > 0 && h.dim <= 65536, ErrorCode::kFormat,
          "invalid embedding dimension " + std::to_string(h.dim));
  const auto name_len = r.Le<std::uint32_t>("name length");
  Require(name_len > 0 && name_len <= 4096, ErrorCode::kFormat, "invalid embedder name length");
  h.embedder_name = std::string(r.Take(name_len, "embedder name"));
  h.count = r.Le<std::uint64_t>("count");
  const std::size_t record = DbRecordBytes(static_cast<int>(h.dim));
  const std::size_t remaining = bytes.size() - r.pos();
  Require(h.count <= remaining / record && remaining == h.count * record, ErrorCode::kFormat,
          "embedding database length mismatch: header declares " + std::to_string(h.count) +
              " records of " + std::to_string(record) + " bytes but " + std::to_string(remaining) +
              " bytes follow" + (remaining < h.count * record ? " (truncated)" : ""));
  if (expected_dim) {
    Require(static_cast<int>(h.dim) == *expected_dim, ErrorCode::kMismatch,
            "database dim " + std::to_string(h.dim) + " does not match expected " +
                std::to_string(*expected_dim));
  }
  if (expected_embedder) {
    Require(h.embedder_name == *expected_embedder, ErrorCode::kMismatch,
            "database embedder '" + h.embedder_name + "' does not match '" + *expected_embedder + "'");
  }

  EntryTable table(static_cast<int>(h.dim));
  table.Reserve(h.count);
  std::vector<float> v(h.dim);
  for (std::uint64_t i = 0; i < h.count; ++i) {
    EntryMeta m;
    m.patch_id = r.Le<std::uint64_t>("record");
    m.slide_id = r.Le<std::uint32_t>("record");
    const auto mag = r.Le<std::uint8_t>("record");
    Require(mag < 4, ErrorCode::kFormat, "invalid magnification code in record");
    m.magnification = static_cast<Magnification>(mag);
    const auto orient = r.Le<std::uint8_t>("record");
    Require(orient < kNumOrientations, ErrorCode::kFormat, "invalid orientation code in record");
    m.orientation = static_cast<Orientation>(orient);
    m.x = r.Le<std::uint32_t>("record");
    m.y = r.Le<std::uint32_t>("record");
    m.side_px = r.Le<std::uint16_t>("record");
    for (auto& c : v) c = r.F32("record");
    try {
      table.Append(m, v);
    } catch (const Error& e) {
      Fail(ErrorCode::kFormat, e.what());
    }
  }
  table.CheckUnique();
  return {std::move(h), std::move(table)};
}

LoadedDb LoadDb(const std::filesystem::path& path, std::optional<int> expected_dim,
                const std::optional<std::string>& expected_embedder) {
  const auto bytes = ReadBinaryFile(path);
  return ParseDb(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()),
                 expected_dim, expected_embedder);
}

}  // namespace simsearch::index
