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

#include <gtest/gtest.h>

#include <cstdio>
#include <cstring>
#include <fstream>
#include <set>

#include "common/error.hpp"
#include "common/json_io.hpp"
#include "dataset/synth.hpp"
#include "embedder/embedder.hpp"
#include "index/brute_force.hpp"
#include "index/db_file.hpp"
#include "index/hash_index.hpp"
#include "index/kd_tree.hpp"
#include "index/shard_set.hpp"
#include "support/support.hpp"

namespace simsearch::index {
namespace {

using testing::RandomTable;
using testing::RandomVector;
using testing::TempDir;

std::vector<std::uint32_t> AllRows(const EntryTable& t) {
  std::vector<std::uint32_t> rows(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) rows[i] = static_cast<std::uint32_t>(i);
  return rows;
}

// Points scattered tightly around a few random centers.
EntryTable Clustered(std::size_t n, int dim, std::size_t clusters, double spread, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::vector<float>> centers;
  for (std::size_t c = 0; c < clusters; ++c) centers.push_back(RandomVector(dim, rng));
  std::normal_distribution<float> noise(0.0f, static_cast<float>(spread));
  EntryTable t(dim);
  for (std::size_t i = 0; i < n; ++i) {
    auto v = centers[i % clusters];
    double norm = 0;
    for (auto& x : v) {
      x += noise(rng);
      norm += static_cast<double>(x) * x;
    }
    for (auto& x : v) x = static_cast<float>(x / std::sqrt(norm));
    EntryMeta m;
    m.patch_id = i;
    t.Append(m, v);
  }
  return t;
}

TEST(KdTree, SmallInputIsOneLeaf) {
  const auto t = RandomTable(5, 8, 16, 1);  // 40 entries
  const auto kd = KdTree::Build(t, AllRows(t));
  EXPECT_EQ(kd.nodes().size(), 1u);
  EXPECT_TRUE(kd.nodes()[0].is_leaf());
  EXPECT_EQ(kd.depth(), 0);
}

TEST(KdTree, UniformDataRespectsDepthLimit) {
  const auto t = RandomTable(320, 8, 128, 2);  // 2,560 entries
  const auto kd = KdTree::Build(t, AllRows(t));
  EXPECT_LE(kd.depth(), 6);
  std::size_t total = 0;
  std::multiset<std::uint32_t> seen;
  for (const auto& n : kd.nodes()) {
    if (!n.is_leaf()) continue;
    EXPECT_GE(n.end - n.begin, 1u);
    EXPECT_LE(n.depth, 6);
    total += n.end - n.begin;
    for (auto i = n.begin; i < n.end; ++i) seen.insert(kd.entries()[i]);
  }
  EXPECT_EQ(total, t.size());
  EXPECT_EQ(std::set<std::uint32_t>(seen.begin(), seen.end()).size(), t.size());
}

TEST(KdTree, IdenticalEmbeddingsStayInOneLeaf) {
  EntryTable t(8);
  const std::vector<float> v{0.5f, 0.5f, 0.5f, 0.5f, 0, 0, 0, 0};
  for (std::uint64_t i = 0; i < 500; ++i) {
    EntryMeta m;
    m.patch_id = i;
    t.Append(m, v);
  }
  const auto kd = KdTree::Build(t, AllRows(t));
  EXPECT_EQ(kd.leaf_count(), 1u);
  const auto hits = kd.Search(t, v, 3);
  ASSERT_EQ(hits.size(), 3u);
  EXPECT_EQ(hits[0].patch_id, 0u);
  EXPECT_EQ(hits[2].patch_id, 2u);
}

TEST(KdTree, EmptyInputRejected) {
  EntryTable t(8);
  EXPECT_THROW(KdTree::Build(t, {}), Error);
}

TEST(KdTree, SelfMatchFirst) {
  const auto t = RandomTable(200, 8, 32, 3);
  const auto kd = KdTree::Build(t, AllRows(t));
  for (std::uint32_t row : {0u, 77u, 1599u}) {
    const auto hits = kd.Search(t, t.vector(row), 1);
    ASSERT_EQ(hits.size(), 1u);
    EXPECT_EQ(hits[0].entry, row);
    EXPECT_EQ(hits[0].squared_distance, 0.0);
  }
}

TEST(KdTree, ExhaustiveWhenMExceedsSize) {
  const auto t = RandomTable(30, 8, 16, 4);
  const auto kd = KdTree::Build(t, AllRows(t));
  std::mt19937_64 rng(9);
  const auto q = RandomVector(16, rng);
  const auto hits = kd.Search(t, q, 10000);
  EXPECT_EQ(hits.size(), t.size());
  EXPECT_TRUE(std::is_sorted(hits.begin(), hits.end()));
  EXPECT_EQ(hits, BruteForceSearch(t, q, 10000));
}

TEST(KdTree, MatchesBruteForce) {
  const auto t = RandomTable(125, 8, 128, 5);  // 1,000 entries
  const auto kd = KdTree::Build(t, AllRows(t));
  std::mt19937_64 rng(11);
  for (int i = 0; i < 100; ++i) {
    const auto q = RandomVector(128, rng);
    ASSERT_EQ(kd.Search(t, q, 5), BruteForceSearch(t, q, 5)) << "query " << i;
  }
}

TEST(KdTree, TiesResolvedCanonically) {
  // Duplicated vectors across patches force distance ties.
  EntryTable t(4);
  std::mt19937_64 rng(6);
  std::vector<std::vector<float>> pool;
  for (int i = 0; i < 10; ++i) pool.push_back(RandomVector(4, rng));
  for (std::uint64_t p = 0; p < 300; ++p) {
    for (int o = 0; o < 2; ++o) {
      EntryMeta m;
      m.patch_id = 1000 - p;
      m.orientation = static_cast<Orientation>(o);
      t.Append(m, pool[(p * 7 + static_cast<std::uint64_t>(o)) % pool.size()]);
    }
  }
  const auto kd = KdTree::Build(t, AllRows(t), {6, 4});
  for (const auto& q : pool) EXPECT_EQ(kd.Search(t, q, 25), BruteForceSearch(t, q, 25));
}

TEST(KdTree, DimMismatch) {
  const auto t = RandomTable(10, 8, 16, 1);
  const auto kd = KdTree::Build(t, AllRows(t));
  try {
    kd.Search(t, std::vector<float>(8, 0.0f), 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMismatch);
  }
}

TEST(HashIndex, StoredVectorFoundInOwnBucket) {
  const auto t = RandomTable(200, 8, 64, 7);
  const auto h = HashIndex::Build(t, AllRows(t), {16, 0, 3});
  for (std::uint32_t row : {0u, 500u, 1599u}) {
    const auto hits = h.Search(t, t.vector(row), 1);
    ASSERT_FALSE(hits.empty());
    EXPECT_EQ(hits[0].squared_distance, 0.0);
  }
  std::size_t total = 0;
  for (const auto& [key, rows] : h.buckets()) {
    total += rows.size();
    for (auto r : rows) EXPECT_EQ(h.Key(t.vector(r)), key);
  }
  EXPECT_EQ(total, t.size());
}

TEST(HashIndex, FullRadiusEqualsBruteForce) {
  const auto t = RandomTable(100, 8, 32, 8);
  const auto h = HashIndex::Build(t, AllRows(t), {8, 1, 5});
  std::mt19937_64 rng(12);
  for (int i = 0; i < 20; ++i) {
    const auto q = RandomVector(32, rng);
    EXPECT_EQ(h.Search(t, q, 7, 8), BruteForceSearch(t, q, 7));
  }
}

double Recall(const EntryTable& t, const HashIndex& h, const std::vector<std::vector<float>>& queries,
              int probe_radius) {
  std::size_t found = 0, wanted = 0;
  for (const auto& q : queries) {
    const auto truth = BruteForceSearch(t, q, 5);
    std::set<std::uint32_t> got;
    for (const auto& n : h.Search(t, q, 5, probe_radius)) got.insert(n.entry);
    for (const auto& n : truth) found += got.count(n.entry);
    wanted += truth.size();
  }
  return static_cast<double>(found) / static_cast<double>(wanted);
}

// Reference embeddings of rendered texture patches, all 8 orientations.
EntryTable TextureEmbeddings(std::size_t per_class, std::uint32_t slide_id,
                             std::vector<std::vector<float>>* r0 = nullptr) {
  const auto classes = testing::NineClasses();
  const embed::ReferenceEmbedder e;
  EntryTable t(128);
  std::uint64_t id = 0;
  for (std::size_t i = 0; i < per_class; ++i) {
    for (const auto& c : classes) {
      Image img(300, 300);
      const std::int64_t ox = static_cast<std::int64_t>(i) * 300, oy = static_cast<std::int64_t>(id) * 7;
      for (int y = 0; y < 300; ++y) {
        for (int x = 0; x < 300; ++x) {
          const auto px = dataset::TexturePixel(c.texture, 1, slide_id, ox + x, oy + y);
          std::copy(px.begin(), px.end(), img.pixel(x, y));
        }
      }
      const auto set = embed::EmbedAllOrientations(img, e, id);
      for (Orientation o : kAllOrientations) {
        EntryMeta m;
        m.patch_id = id;
        m.orientation = o;
        t.Append(m, set.embeddings[static_cast<std::size_t>(OrientationCode(o))]);
      }
      if (r0) r0->push_back(set.embeddings[0]);
      ++id;
    }
  }
  return t;
}

TEST(HashIndex, RecallOnTextureEmbeddings) {
  constexpr double kRecallFloor = 0.9;
  const auto t = TextureEmbeddings(139, 0);  // 10,008 entries
  std::vector<std::vector<float>> queries;
  TextureEmbeddings(12, 1, &queries);  // unseen patches
  const auto h = HashIndex::Build(t, AllRows(t), {16, 1, 17});
  const double recall = Recall(t, h, queries, 1);
  RecordProperty("recall_at_5", std::to_string(recall));
  std::printf("texture recall@5 = %.4f\n", recall);
  EXPECT_GE(recall, kRecallFloor);
}

TEST(HashIndex, RecallGrowsWithProbeRadius) {
  // Loose clusters: radius 1 misses many neighbours, larger radii recover them.
  const auto t = Clustered(10000, 128, 50, 0.02, 13);
  const auto h = HashIndex::Build(t, AllRows(t), {16, 1, 17});
  std::mt19937_64 rng(14);
  std::normal_distribution<float> noise(0.0f, 0.02f);
  std::vector<std::vector<float>> queries;
  for (int i = 0; i < 100; ++i) {
    const auto v = t.vector(static_cast<std::size_t>(i) * 37 % t.size());
    std::vector<float> q(v.begin(), v.end());
    for (auto& x : q) x += noise(rng);
    queries.push_back(q);
  }
  double prev = 0;
  for (int r : {0, 1, 2, 16}) {
    const double recall = Recall(t, h, queries, r);
    std::printf("clustered recall@5 radius %d = %.4f\n", r, recall);
    EXPECT_GE(recall, prev);
    prev = recall;
  }
  EXPECT_EQ(prev, 1.0);
}

TEST(ShardSet, SmallShardsAreKd) {
  auto t = std::make_shared<const EntryTable>(RandomTable(125, 8, 16, 1));  // 1,000 entries
  IndexParams p;
  p.n_shards = 4;
  const auto s = ShardSet::Build(t, "reference", p);
  ASSERT_EQ(s.shard_count(), 4u);
  std::size_t sum = 0;
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_EQ(s.shard_kind(i), ShardKind::kKd);
    sum += s.header().shard_entries[i];
    for (auto row : s.shard_entries(i)) EXPECT_EQ(t->meta(row).patch_id % 4, i);
  }
  EXPECT_EQ(sum, t->size());
}

TEST(ShardSet, LargeShardsAreHash) {
  auto t = std::make_shared<const EntryTable>(RandomTable(500000, 1, 4, 2));
  IndexParams p;
  p.n_shards = 2;
  const auto s = ShardSet::Build(t, "reference", p);
  EXPECT_EQ(s.shard_kind(0), ShardKind::kHash);
  EXPECT_EQ(s.shard_kind(1), ShardKind::kHash);
  EXPECT_EQ(s.header().shard_entries[0] + s.header().shard_entries[1], 500000u);
}

TEST(ShardSet, ShardedKdEqualsBruteForce) {
  auto t = std::make_shared<const EntryTable>(RandomTable(300, 8, 32, 3));
  std::mt19937_64 rng(4);
  for (int shards : {1, 3, 8}) {
    for (std::size_t threads : {1u, 4u}) {
      IndexParams p;
      p.n_shards = shards;
      p.threads = threads;
      const auto s = ShardSet::Build(t, "reference", p);
      for (int i = 0; i < 10; ++i) {
        const auto q = RandomVector(32, rng);
        EXPECT_EQ(s.Search(q, 40), BruteForceSearch(*t, q, 40));
      }
    }
  }
}

TEST(ShardSet, DistancesNonDecreasing) {
  auto t = std::make_shared<const EntryTable>(RandomTable(400, 8, 16, 9));
  IndexParams p;
  p.n_shards = 3;
  p.density_threshold = 500;  // mix of kinds is fine; ordering must hold
  const auto s = ShardSet::Build(t, "reference", p);
  std::mt19937_64 rng(1);
  const auto hits = s.Search(RandomVector(16, rng), 100);
  for (std::size_t i = 1; i < hits.size(); ++i) EXPECT_LE(hits[i - 1].squared_distance, hits[i].squared_distance);
}

TEST(ShardSet, DimMismatch) {
  auto t = std::make_shared<const EntryTable>(RandomTable(10, 8, 16, 1));
  const auto s = ShardSet::Build(t, "reference");
  try {
    s.Search(std::vector<float>(15, 0.0f), 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMismatch);
  }
}

TEST(DbFile, SaveLoadQueryIdentical) {
  TempDir dir("db");
  const auto t = RandomTable(100, 8, 128, 21);
  SaveDb(dir / "a.db", "reference", t);
  const auto loaded = LoadDb(dir / "a.db", 128, std::string("reference"));
  EXPECT_EQ(loaded.table, t);
  EXPECT_EQ(loaded.header.embedder_name, "reference");
  auto a = ShardSet::Build(std::make_shared<const EntryTable>(t), "reference");
  auto b = ShardSet::Build(std::make_shared<const EntryTable>(loaded.table), "reference");
  std::mt19937_64 rng(2);
  for (int i = 0; i < 10; ++i) {
    const auto q = RandomVector(128, rng);
    const auto ra = a.Search(q, 10);
    const auto rb = b.Search(q, 10);
    ASSERT_EQ(ra.size(), rb.size());
    for (std::size_t j = 0; j < ra.size(); ++j) {
      EXPECT_EQ(std::memcmp(&ra[j].squared_distance, &rb[j].squared_distance, sizeof(double)), 0);
      EXPECT_EQ(ra[j], rb[j]);
    }
  }
  // Re-saving the loaded table reproduces the file.
  SaveDb(dir / "b.db", "reference", loaded.table);
  EXPECT_EQ(ReadBinaryFile(dir / "a.db"), ReadBinaryFile(dir / "b.db"));
}

TEST(DbFile, FileSizeArithmetic) {
  TempDir dir("db");
  const auto t = RandomTable(13, 8, 128, 22);
  SaveDb(dir / "a.db", "reference", t);
  EXPECT_EQ(std::filesystem::file_size(dir / "a.db"),
            DbHeaderBytes("reference") + t.size() * DbRecordBytes(128));
  EXPECT_EQ(DbRecordBytes(128), 24u + 512u);
}

TEST(DbFile, CorruptionRejected) {
  const auto t = RandomTable(3, 8, 16, 23);
  const std::string good = SerializeDb("reference", t);
  auto expect_format = [](const std::string& bytes) {
    try {
      ParseDb(bytes);
      ADD_FAILURE() << "accepted corrupt bytes";
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kFormat);
    }
  };
  std::string bad = good;
  bad[0] = 'X';
  expect_format(bad);
  bad = good;
  bad[4] = 9;  // version
  expect_format(bad);
  expect_format(good.substr(0, good.size() - 1));
  expect_format(good + "x");
  expect_format(good.substr(0, 10));
  EXPECT_NO_THROW(ParseDb(good));
}

TEST(DbFile, HeaderMismatches) {
  const std::string bytes = SerializeDb("reference", RandomTable(2, 8, 64, 1));
  for (auto f : {+[](std::string_view b) { ParseDb(b, 128); },
                 +[](std::string_view b) { ParseDb(b, std::nullopt, std::string("color-only")); }}) {
    try {
      f(bytes);
      ADD_FAILURE();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kMismatch);
    }
  }
}

TEST(DbFile, DeterministicBytes) {
  auto t = RandomTable(50, 8, 16, 30);
  const std::string a = SerializeDb("reference", t);
  // Input order does not matter; the file is written in canonical order.
  EntryTable reversed(16);
  for (std::size_t i = t.size(); i-- > 0;) reversed.Append(t.meta(i), t.vector(i));
  EXPECT_EQ(SerializeDb("reference", reversed), a);
}

TEST(StorageStats, Arithmetic) {
  const auto empty = ComputeStorageStats(EntryTable(128), "reference", 1000, 300);
  EXPECT_EQ(empty.embedding_payload_bytes, 0u);
  const auto one = ComputeStorageStats(RandomTable(1, 8, 128, 1), "reference", 1000000, 300);
  EXPECT_EQ(one.embedding_payload_bytes, 4096u);
  EXPECT_EQ(one.embedding_file_bytes, DbHeaderBytes("reference") + 8u * (4096u / 8u + 24u));
  EXPECT_EQ(one.raw_patch_bytes, 270000u);
  EXPECT_NEAR(one.scalar_reduction, 270000.0 / 1024.0, 1e-9);
  EXPECT_NEAR(one.overhead_ratio, static_cast<double>(one.embedding_file_bytes) / 1e6, 1e-12);
}

}  // namespace
}  // namespace simsearch::index
