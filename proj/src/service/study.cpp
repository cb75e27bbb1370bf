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

#include "service/study.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>

#include "common/error.hpp"
#include "common/json_io.hpp"
#include "query/random_results.hpp"

namespace simsearch::service {

std::string_view ArmName(Arm arm) { return arm == Arm::kEngine ? "engine" : "random"; }

std::string_view ScaleName(Scale s) {
  switch (s) {
    case Scale::kBinary: return "binary";
    case Scale::kOrgan: return "organ";
    case Scale::kRubric: return "rubric";
  }
  return "?";
}

Scale ParseScale(std::string_view name) {
  if (name == "binary") return Scale::kBinary;
  if (name == "organ") return Scale::kOrgan;
  if (name == "rubric") return Scale::kRubric;
  Fail(ErrorCode::kInvalidArgument, "unknown rating scale '" + std::string(name) + "'");
}

namespace {

json ScaleValues(Scale s) {
  switch (s) {
    case Scale::kBinary: return {0, 100};
    case Scale::kOrgan: return {0, 100, "unclear"};
    case Scale::kRubric: return {0, 25, 50, 75, 100};
  }
  return json::array();
}

json ScoreJson(const Score& s) {
  if (const int* v = std::get_if<int>(&s)) return *v;
  return std::get<std::string>(s);
}

std::uint64_t Mix(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a + 0x9E3779B97F4A7C15ull * (b + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

json RegionJson(const query::RegionSource& r) {
  return {{"slide_id", r.slide_id}, {"x", r.x}, {"y", r.y}, {"w", r.w}, {"h", r.h},
          {"magnification", MagnificationName(r.magnification)}};
}

query::RegionSource RegionFromJson(const json& j) {
  query::QuerySpec spec = query::QuerySpecFromJson(j);
  auto origin = spec.origin();
  Require(std::holds_alternative<query::RegionSource>(spec.source), ErrorCode::kInvalidArgument,
          "study queries must be slide regions");
  return *origin;
}

}  // namespace

Score ParseScore(const json& value, Scale scale) {
  if (value.is_string()) {
    Require(scale == Scale::kOrgan && value.get<std::string>() == "unclear", ErrorCode::kInvalidArgument,
            "score '" + value.get<std::string>() + "' is not on the " + std::string(ScaleName(scale)) +
                " scale");
    return std::string("unclear");
  }
  Require(value.is_number_integer() || value.is_number_unsigned(), ErrorCode::kInvalidArgument,
          "score must be an integer" + std::string(scale == Scale::kOrgan ? " or \"unclear\"" : ""));
  const auto v = value.get<std::int64_t>();
  const bool ok = scale == Scale::kRubric ? (v >= 0 && v <= 100 && v % 25 == 0) : (v == 0 || v == 100);
  Require(ok, ErrorCode::kInvalidArgument,
          "score " + std::to_string(v) + " is not on the " + std::string(ScaleName(scale)) + " scale");
  return static_cast<int>(v);
}

std::vector<Arm> AssignArms(std::size_t n, double fraction, std::uint64_t seed) {
  Require(fraction >= 0 && fraction <= 1, ErrorCode::kInvalidArgument, "random fraction must be in [0, 1]");
  const auto n_random = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
  std::vector<Arm> arms(n, Arm::kEngine);
  for (std::size_t i = 0; i < n_random; ++i) arms[i] = Arm::kRandom;
  std::mt19937_64 rng(seed);
  for (std::size_t i = n; i > 1; --i) {
    std::uniform_int_distribution<std::size_t> pick(0, i - 1);
    std::swap(arms[i - 1], arms[pick(rng)]);
  }
  return arms;
}

StudyManager::StudyManager(StudyOptions options, std::shared_ptr<const query::QueryEngine> engine,
                           std::shared_ptr<const pipeline::Database> db, std::vector<PatchRecord> query_pool)
    : options_(std::move(options)), engine_(std::move(engine)), db_(std::move(db)), pool_(std::move(query_pool)) {
  Require(engine_ != nullptr && db_ != nullptr, ErrorCode::kInvalidArgument, "study needs an engine and a db");
  Require(options_.results_per_query >= 1, ErrorCode::kInvalidArgument, "results_per_query must be >= 1");
  Replay();
}

std::shared_ptr<StudyManager::Session> StudyManager::Find(const std::string& id) const {
  std::shared_lock lock(sessions_mu_);
  auto it = sessions_.find(id);
  Require(it != sessions_.end(), ErrorCode::kNotFound, "unknown study session '" + id + "'");
  return it->second;
}

void StudyManager::Append(const json& event) {
  if (options_.journal.empty()) return;
  std::lock_guard lock(journal_mu_);
  const std::string line = event.dump() + "\n";
  const int fd = ::open(options_.journal.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
  Require(fd >= 0, ErrorCode::kIo, "cannot open study journal " + options_.journal.string());
  std::size_t done = 0;
  while (done < line.size()) {
    const ssize_t n = ::write(fd, line.data() + done, line.size() - done);
    if (n < 0) {
      ::close(fd);
      Fail(ErrorCode::kIo, "write to study journal failed");
    }
    done += static_cast<std::size_t>(n);
  }
  const int synced = ::fsync(fd);
  ::close(fd);
  Require(synced == 0, ErrorCode::kIo, "fsync of study journal failed");
}

void StudyManager::Apply(const json& e, bool from_replay) {
  const std::string type = e.at("type").get<std::string>();
  if (type == "session") {
    auto s = std::make_shared<Session>();
    s->id = e.at("session_id").get<std::string>();
    s->rater_id = e.at("rater_id").get<std::string>();
    s->scale = ParseScale(e.at("scale").get<std::string>());
    s->seed = e.at("seed").get<std::uint64_t>();
    for (const auto& q : e.at("queries")) s->queries.push_back(RegionFromJson(q));
    for (const auto& a : e.at("arms")) s->arms.push_back(a.get<std::string>() == "random" ? Arm::kRandom : Arm::kEngine);
    std::unique_lock lock(sessions_mu_);
    sessions_[s->id] = s;
    ++counter_;
    return;
  }
  auto s = Find(e.at("session_id").get<std::string>());
  std::unique_lock lock(s->mu, std::defer_lock);
  if (from_replay) lock.lock();
  if (type == "rate") {
    s->ratings.push_back({e.at("query_index").get<std::size_t>(), e.at("result_index").get<int>(),
                          ParseScore(e.at("score"), s->scale)});
  } else if (type == "close") {
    s->closed = true;
  } else {
    Fail(ErrorCode::kFormat, "unknown journal event '" + type + "'");
  }
}

void StudyManager::Replay() {
  if (options_.journal.empty() || !std::filesystem::exists(options_.journal)) return;
  std::istringstream in(ReadTextFile(options_.journal));
  std::string line;
  std::vector<std::string> lines;
  while (std::getline(in, line)) {
    if (!line.empty()) lines.push_back(line);
  }
  for (std::size_t i = 0; i < lines.size(); ++i) {
    json e;
    try {
      e = json::parse(lines[i]);
    } catch (const json::exception&) {
      // A torn final line is what a crash mid-append leaves behind.
      if (i + 1 == lines.size()) break;
      Fail(ErrorCode::kFormat, "corrupt study journal line " + std::to_string(i + 1));
    }
    Apply(e, true);
  }
}

json StudyManager::CreateSession(const json& body) {
  Require(body.is_object(), ErrorCode::kInvalidArgument, "session body must be a JSON object");
  std::lock_guard create_lock(create_mu_);
  const std::string rater = body.value("rater_id", "");
  Require(!rater.empty(), ErrorCode::kInvalidArgument, "rater_id is required");
  const Scale scale = ParseScale(body.value("scale", "binary"));
  std::vector<query::RegionSource> queries;
  std::uint64_t seed;
  {
    std::shared_lock lock(sessions_mu_);
    seed = body.contains("seed") ? body.at("seed").get<std::uint64_t>() : Mix(options_.seed, counter_);
  }
  if (body.contains("queries")) {
    for (const auto& q : body.at("queries")) queries.push_back(RegionFromJson(q));
  } else {
    const auto n = body.value("n_queries", std::size_t{0});
    Require(n >= 1 && n <= pool_.size(), ErrorCode::kInvalidArgument,
            "n_queries must be in 1.." + std::to_string(pool_.size()));
    std::vector<std::size_t> idx(pool_.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::mt19937_64 rng(seed);
    for (std::size_t i = 0; i < n; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, idx.size() - 1);
      std::swap(idx[i], idx[pick(rng)]);
      const auto& p = pool_[idx[i]];
      queries.push_back({p.slide_id, p.x, p.y, p.side_px, p.side_px, p.magnification});
    }
  }
  Require(!queries.empty(), ErrorCode::kInvalidArgument, "a study session needs at least one query");
  for (const auto& q : queries) {
    Require(engine_->store() != nullptr && engine_->store()->contains(q.slide_id), ErrorCode::kNotFound,
            "unknown slide " + std::to_string(q.slide_id));
  }
  const auto arms = AssignArms(queries.size(), options_.random_fraction, seed);
  std::string id;
  {
    std::shared_lock lock(sessions_mu_);
    char buf[40];
    std::snprintf(buf, sizeof(buf), "s%llu-%016llx", static_cast<unsigned long long>(counter_ + 1),
                  static_cast<unsigned long long>(Mix(seed, counter_)));
    id = buf;
  }
  json event = {{"type", "session"}, {"session_id", id}, {"rater_id", rater},
                {"scale", ScaleName(scale)}, {"seed", seed}};
  event["queries"] = json::array();
  for (const auto& q : queries) event["queries"].push_back(RegionJson(q));
  event["arms"] = json::array();
  for (Arm a : arms) event["arms"].push_back(ArmName(a));
  Append(event);
  Apply(event, false);
  return {{"session_id", id}, {"n_queries", queries.size()}, {"scale", ScaleName(scale)},
          {"scale_values", ScaleValues(scale)}, {"results_per_query", options_.results_per_query}};
}

const std::vector<query::QueryResult>& StudyManager::ResultsLocked(Session& s, std::size_t q) {
  if (auto it = s.results.find(q); it != s.results.end()) return it->second;
  query::QuerySpec spec;
  spec.source = s.queries[q];
  spec.k = options_.results_per_query;
  std::vector<query::QueryResult> results;
  if (s.arms[q] == Arm::kRandom) {
    results = query::RandomResults(engine_->db(), spec, Mix(s.seed, q));
  } else {
    // Widen the candidate pool until k results survive so that the result
    // count never reveals the arm.
    for (int oversample : {5, 20, 80, 320}) {
      spec.oversample_factor = oversample;
      auto outcome = engine_->Run(spec);
      results = std::move(outcome.results);
      if (!outcome.exhausted) break;
    }
    Require(results.size() == static_cast<std::size_t>(spec.k), ErrorCode::kUnderflow,
            "not enough results for study query " + std::to_string(q));
  }
  return s.results[q] = std::move(results);
}

json StudyManager::Next(const std::string& session_id) {
  auto s = Find(session_id);
  std::lock_guard lock(s->mu);
  Require(!s->closed, ErrorCode::kState, "study session is closed");
  std::vector<int> rated(s->queries.size(), 0);
  for (const auto& r : s->ratings) ++rated[r.query_index];
  std::size_t q = 0;
  while (q < s->queries.size() && rated[q] >= options_.results_per_query) ++q;
  if (q == s->queries.size()) return {{"session_id", s->id}, {"done", true}};
  const auto& results = ResultsLocked(*s, q);
  const std::string base = "/api/v1/study/image/" + s->id + "/" + std::to_string(q) + "/";
  json items = json::array();
  for (std::size_t r = 0; r < results.size(); ++r) {
    items.push_back({{"result_index", r}, {"image", base + std::to_string(r) + ".png"}});
  }
  return {{"session_id", s->id},
          {"done", false},
          {"query_index", q},
          {"n_queries", s->queries.size()},
          {"scale", ScaleName(s->scale)},
          {"scale_values", ScaleValues(s->scale)},
          {"query_image", base + "query.png"},
          {"results", items}};
}

json StudyManager::Rate(const json& body) {
  Require(body.is_object(), ErrorCode::kInvalidArgument, "rating body must be a JSON object");
  Require(body.contains("session_id") && body.contains("query_index") && body.contains("result_index") &&
              body.contains("score"),
          ErrorCode::kInvalidArgument, "rating needs session_id, query_index, result_index and score");
  auto s = Find(body.at("session_id").get<std::string>());
  std::lock_guard lock(s->mu);
  Require(!s->closed, ErrorCode::kState, "study session is closed");
  const auto q = body.at("query_index").get<std::int64_t>();
  const auto r = body.at("result_index").get<std::int64_t>();
  Require(q >= 0 && static_cast<std::size_t>(q) < s->queries.size(), ErrorCode::kInvalidArgument,
          "query_index out of range");
  Require(r >= 0 && r < options_.results_per_query, ErrorCode::kInvalidArgument, "result_index out of range");
  const Score score = ParseScore(body.at("score"), s->scale);
  for (const auto& existing : s->ratings) {
    Require(!(existing.query_index == static_cast<std::size_t>(q) && existing.result_index == r),
            ErrorCode::kInvalidArgument, "result already rated");
  }
  const json event = {{"type", "rate"}, {"session_id", s->id}, {"query_index", q},
                      {"result_index", r}, {"score", ScoreJson(score)}};
  Append(event);
  Apply(event, false);
  return {{"ok", true}, {"ratings", s->ratings.size()}};
}

json StudyManager::Close(const std::string& session_id) {
  auto s = Find(session_id);
  std::lock_guard lock(s->mu);
  Require(!s->closed, ErrorCode::kState, "study session is already closed");
  const json event = {{"type", "close"}, {"session_id", s->id}};
  Append(event);
  Apply(event, false);

  struct Agg {
    std::size_t queries = 0, ratings = 0, unclear = 0;
    std::int64_t sum = 0;
  };
  std::map<Arm, Agg> agg;
  for (Arm a : s->arms) ++agg[a].queries;
  for (const auto& r : s->ratings) {
    auto& a = agg[s->arms[r.query_index]];
    if (const int* v = std::get_if<int>(&r.score)) {
      ++a.ratings;
      a.sum += *v;
    } else {
      ++a.unclear;
    }
  }
  json arms = json::array();
  for (Arm a : s->arms) arms.push_back(ArmName(a));
  json aggregates = json::object();
  for (Arm a : {Arm::kEngine, Arm::kRandom}) {
    const Agg& g = agg[a];
    aggregates[std::string(ArmName(a))] = {
        {"queries", g.queries},
        {"ratings", g.ratings},
        {"unclear", g.unclear},
        {"mean_score", g.ratings ? json(static_cast<double>(g.sum) / static_cast<double>(g.ratings)) : json(nullptr)}};
  }
  return {{"session_id", s->id}, {"closed", true}, {"arms", arms}, {"aggregates", aggregates}};
}

Image StudyManager::RenderImage(const std::string& session_id, std::size_t q, int r) {
  auto s = Find(session_id);
  std::lock_guard lock(s->mu);
  Require(q < s->queries.size(), ErrorCode::kNotFound, "no such study query");
  const auto* store = engine_->store();
  Require(store != nullptr, ErrorCode::kState, "no slide store mounted");
  if (r < 0) {
    const auto& region = s->queries[q];
    return store->ReadRegion(region.slide_id, region.magnification, region.x, region.y, region.w, region.h);
  }
  const auto& results = ResultsLocked(*s, q);
  Require(static_cast<std::size_t>(r) < results.size(), ErrorCode::kNotFound, "no such study result");
  const auto& hit = results[static_cast<std::size_t>(r)];
  return store->ReadRegion(hit.slide_id, hit.magnification, hit.x, hit.y, hit.side_px, hit.side_px);
}

json StudyManager::Snapshot() const {
  std::shared_lock lock(sessions_mu_);
  json out = json::array();
  for (const auto& [id, s] : sessions_) {
    std::lock_guard slock(s->mu);
    json ratings = json::array();
    for (const auto& r : s->ratings) ratings.push_back({r.query_index, r.result_index, ScoreJson(r.score)});
    json arms = json::array();
    for (Arm a : s->arms) arms.push_back(ArmName(a));
    json queries = json::array();
    for (const auto& q : s->queries) queries.push_back(RegionJson(q));
    out.push_back({{"session_id", id}, {"rater_id", s->rater_id}, {"scale", ScaleName(s->scale)},
                   {"seed", s->seed}, {"queries", queries}, {"arms", arms}, {"ratings", ratings},
                   {"closed", s->closed}});
  }
  return out;
}

}  // namespace simsearch::service
