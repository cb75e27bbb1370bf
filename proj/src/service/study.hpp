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
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <variant>
#include <vector>

#include "pipeline/pipeline.hpp"
#include "query/engine.hpp"

namespace simsearch::service {

enum class Arm : std::uint8_t { kEngine = 0, kRandom = 1 };
std::string_view ArmName(Arm arm);

// Rating scales: binary {0, 100}; organ {0, 100, "unclear"}; rubric 0..100
// in steps of 25.
enum class Scale : std::uint8_t { kBinary = 0, kOrgan = 1, kRubric = 2 };
std::string_view ScaleName(Scale s);
Scale ParseScale(std::string_view name);

// A rating value: a score, or "unclear" on the organ scale.
using Score = std::variant<int, std::string>;
// Throws kInvalidArgument when `value` is not on the scale.
Score ParseScore(const json& value, Scale scale);

// Exactly round(fraction * n) random-arm queries at seeded positions.
std::vector<Arm> AssignArms(std::size_t n, double fraction, std::uint64_t seed);

struct StudyOptions {
  double random_fraction = 0.25;
  int results_per_query = 4;
  std::uint64_t seed = 0;
  std::filesystem::path journal;  // empty: in-memory only
};

// Blinded rating sessions. Read responses never carry the arm, distances,
// patch identities or anything else that could differ between arms; only
// the images differ. Every mutation is appended to the journal (fsync'd)
// before it is applied, and the journal is replayed on construction.
class StudyManager {
 public:
  StudyManager(StudyOptions options, std::shared_ptr<const query::QueryEngine> engine,
               std::shared_ptr<const pipeline::Database> db, std::vector<PatchRecord> query_pool);

  // Body: {"rater_id", "scale", "queries": [region specs]} or
  // {"rater_id", "scale", "n_queries": N} drawing from the query pool;
  // optional "seed".
  json CreateSession(const json& body);
  json Next(const std::string& session_id);
  json Rate(const json& body);
  json Close(const std::string& session_id);
  // result_index < 0 renders the query region.
  Image RenderImage(const std::string& session_id, std::size_t query_index, int result_index);

  // State snapshot for replay checks: sessions with arms and ratings.
  json Snapshot() const;

 private:
  struct Rating {
    std::size_t query_index;
    int result_index;
    Score score;
  };
  struct Session {
    std::mutex mu;
    std::string id;
    std::string rater_id;
    Scale scale = Scale::kBinary;
    std::uint64_t seed = 0;
    std::vector<query::RegionSource> queries;
    std::vector<Arm> arms;
    std::vector<Rating> ratings;
    bool closed = false;
    std::map<std::size_t, std::vector<query::QueryResult>> results;  // lazily computed
  };

  std::shared_ptr<Session> Find(const std::string& id) const;
  const std::vector<query::QueryResult>& ResultsLocked(Session& s, std::size_t q);
  void Append(const json& event);
  void Apply(const json& event, bool from_replay);
  void Replay();

  StudyOptions options_;
  std::shared_ptr<const query::QueryEngine> engine_;
  std::shared_ptr<const pipeline::Database> db_;
  std::vector<PatchRecord> pool_;
  mutable std::shared_mutex sessions_mu_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::uint64_t counter_ = 0;
  std::mutex create_mu_;  // serializes session id assignment
  std::mutex journal_mu_;
};

}  // namespace simsearch::service
