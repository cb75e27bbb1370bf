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
#include <httplib.h>

#include <set>
#include <thread>

#include "common/config.hpp"
#include "common/error.hpp"
#include "common/json_io.hpp"
#include "common/png_io.hpp"
#include "dataset/extract.hpp"
#include "dataset/slide_store.hpp"
#include "dataset/synth.hpp"
#include "embedder/embedder.hpp"
#include "pipeline/pipeline.hpp"
#include "service/server.hpp"
#include "service/study.hpp"
#include "support/support.hpp"

namespace simsearch::service {
namespace {

namespace fs = std::filesystem;
using testing::TempDir;

TEST(HttpStatus, Mapping) {
  EXPECT_EQ(HttpStatus(ErrorCode::kInvalidArgument), 400);
  EXPECT_EQ(HttpStatus(ErrorCode::kNotFound), 404);
  EXPECT_EQ(HttpStatus(ErrorCode::kMismatch), 409);
  EXPECT_EQ(HttpStatus(ErrorCode::kState), 403);
  EXPECT_EQ(HttpStatus(ErrorCode::kUnderflow), 422);
  EXPECT_EQ(HttpStatus(ErrorCode::kIo), 500);
}

TEST(Study, ArmsExactCountAndSeeded) {
  for (std::size_t n : {1u, 4u, 8u, 10u, 40u}) {
    const auto arms = AssignArms(n, 0.25, 9);
    const auto random = static_cast<std::size_t>(std::count(arms.begin(), arms.end(), Arm::kRandom));
    EXPECT_EQ(random, static_cast<std::size_t>(std::llround(0.25 * static_cast<double>(n)))) << n;
    EXPECT_EQ(AssignArms(n, 0.25, 9), arms);
  }
  std::set<std::vector<Arm>> layouts;
  for (std::uint64_t s = 0; s < 20; ++s) layouts.insert(AssignArms(8, 0.25, s));
  EXPECT_GT(layouts.size(), 1u);
  EXPECT_THROW(AssignArms(4, 1.5, 0), Error);
}

TEST(Study, Scales) {
  EXPECT_EQ(std::get<int>(ParseScore(100, Scale::kBinary)), 100);
  EXPECT_THROW(ParseScore(50, Scale::kBinary), Error);
  EXPECT_EQ(std::get<std::string>(ParseScore("unclear", Scale::kOrgan)), "unclear");
  EXPECT_THROW(ParseScore("unclear", Scale::kBinary), Error);
  EXPECT_EQ(std::get<int>(ParseScore(75, Scale::kRubric)), 75);
  EXPECT_THROW(ParseScore(60, Scale::kRubric), Error);
  EXPECT_THROW(ParseScore(125, Scale::kRubric), Error);
  EXPECT_THROW(ParseScore(true, Scale::kRubric), Error);
}

// Four 2400 x 2400 slides, labeled 40X database, a live server on a free port.
class ServiceTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new TempDir("service");
    auto spec = testing::SmallSpec(4, 2400);
    spec.regions_per_slide = 9;
    dataset::GenerateSynthetic(spec, dir_->path() / "store");
    Config c;
    c.store = (dir_->path() / "store").string();
    c.db = (dir_->path() / "db.smly").string();
    c.magnifications = {"40X"};
    c.query_slide_fraction = 0.25;
    pipeline::BuildDatabase(c);
    store_ = new std::shared_ptr<const dataset::SlideStore>(
        std::make_shared<const dataset::SlideStore>(dataset::SlideStore::Open(c.store)));
    db_ = new std::shared_ptr<const pipeline::Database>(
        std::make_shared<const pipeline::Database>(pipeline::OpenDatabase(c.db, {})));
    pool_ = new std::vector<PatchRecord>(dataset::ReadPatchTable(pipeline::QueriesPath(c.db)));
    ServerOptions o;
    o.port = 0;
    o.worker_threads = 2;
    o.study.seed = 5;
    o.study.journal = dir_->path() / "journal.ndjson";
    server_ = Start(o);
  }
  static void TearDownTestSuite() {
    Shutdown(server_);
    delete pool_;
    delete db_;
    delete store_;
    delete dir_;
  }

  struct Running {
    std::unique_ptr<Server> server;
    std::thread thread;
  };
  static Running* Start(const ServerOptions& o) {
    auto* r = new Running;
    r->server = std::make_unique<Server>(o, *db_, *store_, embed::MakeEmbedder("reference"), *pool_);
    r->server->Bind();
    r->thread = std::thread([s = r->server.get()] { s->Run(); });
    for (int i = 0; i < 200 && !r->server->running(); ++i) {
      std::this_thread::sleep_for(std::chrono::milliseconds(5));
    }
    return r;
  }
  static void Shutdown(Running* r) {
    r->server->Stop();
    r->thread.join();
    delete r;
  }

  static httplib::Client Client(const Running* r = nullptr) {
    httplib::Client cli("127.0.0.1", (r ? r : server_)->server->port());
    cli.set_read_timeout(60, 0);
    return cli;
  }
  static httplib::Result PostJson(httplib::Client& cli, const std::string& path, const json& body) {
    return cli.Post(path, body.dump(), "application/json");
  }
  static json Region(const PatchRecord& p) {
    return {{"slide_id", p.slide_id}, {"x", p.x}, {"y", p.y}, {"w", 300}, {"h", 300}, {"magnification", "40X"}};
  }

  static TempDir* dir_;
  static std::shared_ptr<const dataset::SlideStore>* store_;
  static std::shared_ptr<const pipeline::Database>* db_;
  static std::vector<PatchRecord>* pool_;
  static Running* server_;
};
TempDir* ServiceTest::dir_ = nullptr;
std::shared_ptr<const dataset::SlideStore>* ServiceTest::store_ = nullptr;
std::shared_ptr<const pipeline::Database>* ServiceTest::db_ = nullptr;
std::vector<PatchRecord>* ServiceTest::pool_ = nullptr;
ServiceTest::Running* ServiceTest::server_ = nullptr;

TEST_F(ServiceTest, Health) {
  auto cli = Client();
  auto res = cli.Get("/api/v1/health");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  const json j = json::parse(res->body);
  EXPECT_EQ(j["status"], "ok");
  EXPECT_EQ(j["embedder"], "reference");
  EXPECT_EQ(j["dim"], 128);
  EXPECT_EQ(j["entries"].get<std::size_t>(), (*db_)->shards->table().size());
}

TEST_F(ServiceTest, SlidesAndTiles) {
  auto cli = Client();
  auto res = cli.Get("/api/v1/slides");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  EXPECT_EQ(json::parse(res->body)["slides"].size(), 4u);

  auto tile = cli.Get("/api/v1/tile/2/0/1/3");
  ASSERT_TRUE(tile);
  EXPECT_EQ(tile->status, 200);
  EXPECT_EQ(tile->get_header_value("Content-Type"), "image/png");
  const auto want = ReadBinaryFile((*store_)->TilePath(2, 0, 1, 3));
  EXPECT_EQ(tile->body, std::string(want.begin(), want.end()));

  EXPECT_EQ(cli.Get("/api/v1/tile/9/0/0/0")->status, 404);
  EXPECT_EQ(cli.Get("/api/v1/tile/0/7/0/0")->status, 404);
  EXPECT_EQ(cli.Get("/api/v1/tile/0/0/99/0")->status, 404);
}

TEST_F(ServiceTest, PatchThumbnail) {
  auto cli = Client();
  const auto& m = (*db_)->shards->table().meta(0);
  auto res = cli.Get("/api/v1/patch/" + std::to_string(m.patch_id) + ".png");
  ASSERT_TRUE(res);
  ASSERT_EQ(res->status, 200);
  const Image img = DecodePng(std::vector<std::uint8_t>(res->body.begin(), res->body.end()));
  EXPECT_EQ(img.width(), 300);
  EXPECT_EQ(img.height(), 300);
  EXPECT_EQ(img, (*store_)->ReadRegion(m.slide_id, m.magnification, m.x, m.y, 300, 300));
  EXPECT_EQ(cli.Get("/api/v1/patch/999999999.png")->status, 404);
}

TEST_F(ServiceTest, QueryReturnsLabeledResults) {
  auto cli = Client();
  auto res = PostJson(cli, "/api/v1/query", Region(pool_->front()));
  ASSERT_TRUE(res);
  ASSERT_EQ(res->status, 200) << res->body;
  const json j = json::parse(res->body);
  ASSERT_FALSE(j["results"].empty());
  EXPECT_LE(j["results"].size(), 5u);
  int rank = 0;
  for (const auto& r : j["results"]) {
    EXPECT_EQ(r["rank"].get<int>(), ++rank);
    EXPECT_TRUE(r.contains("labels"));
    EXPECT_TRUE(r.contains("distance"));
    EXPECT_EQ(r["thumbnail_url"], "/api/v1/patch/" + std::to_string(r["patch_id"].get<std::uint64_t>()) + ".png");
  }
}

TEST_F(ServiceTest, QueryErrorsMapToStatus) {
  auto cli = Client();
  json small = Region(pool_->front());
  small["w"] = 150;
  auto res = PostJson(cli, "/api/v1/query", small);
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 400);
  EXPECT_NE(json::parse(res->body)["error"].get<std::string>().find("between 200 and 400"), std::string::npos);

  json unknown = Region(pool_->front());
  unknown["slide_id"] = 99;
  EXPECT_EQ(PostJson(cli, "/api/v1/query", unknown)->status, 404);

  json other = Region(pool_->front());
  other["embedder"] = "color-only";
  EXPECT_EQ(PostJson(cli, "/api/v1/query", other)->status, 409);

  json k0 = Region(pool_->front());
  k0["k"] = 0;
  EXPECT_EQ(PostJson(cli, "/api/v1/query", k0)->status, 400);
  EXPECT_EQ(cli.Post("/api/v1/query", "{not json", "application/json")->status, 400);
  EXPECT_EQ(PostJson(cli, "/api/v1/query", json{{"embedding", {1.0, 0.0}}})->status, 409);
}

// Everything in a study read except the image URLs' query index must be
// independent of the arm.
json Blind(json next) {
  next.erase("query_index");
  next["query_image"] = "";
  for (auto& r : next["results"]) r["image"] = "";
  return next;
}

TEST_F(ServiceTest, StudySessionFlow) {
  auto cli = Client();
  auto created = PostJson(cli, "/api/v1/study/session",
                          {{"rater_id", "r1"}, {"scale", "binary"}, {"n_queries", 8}, {"seed", 17}});
  ASSERT_TRUE(created);
  ASSERT_EQ(created->status, 200) << created->body;
  const json session = json::parse(created->body);
  const std::string id = session["session_id"];
  EXPECT_EQ(session["results_per_query"], 4);

  std::vector<json> reads;
  for (int q = 0; q < 8; ++q) {
    auto next = cli.Get("/api/v1/study/next?session=" + id);
    ASSERT_TRUE(next);
    ASSERT_EQ(next->status, 200) << next->body;
    const json j = json::parse(next->body);
    ASSERT_FALSE(j["done"].get<bool>());
    EXPECT_EQ(j["query_index"], q);
    ASSERT_EQ(j["results"].size(), 4u);
    const std::string text = j.dump();
    for (const char* leak : {"random", "engine", "distance", "patch_id", "slide_id", "arm"}) {
      EXPECT_EQ(text.find(leak), std::string::npos) << leak;
    }
    auto img = cli.Get(j["results"][0]["image"].get<std::string>());
    ASSERT_TRUE(img);
    ASSERT_EQ(img->status, 200);
    const Image pixels = DecodePng(std::vector<std::uint8_t>(img->body.begin(), img->body.end()));
    EXPECT_EQ(pixels.width(), 300);
    reads.push_back(j);
    for (int r = 0; r < 4; ++r) {
      auto rated = PostJson(cli, "/api/v1/study/rate",
                            {{"session_id", id}, {"query_index", q}, {"result_index", r}, {"score", (q + r) % 2 ? 100 : 0}});
      ASSERT_EQ(rated->status, 200) << rated->body;
    }
  }
  for (const auto& j : reads) EXPECT_EQ(Blind(j), Blind(reads[0]));
  auto done = cli.Get("/api/v1/study/next?session=" + id);
  EXPECT_TRUE(json::parse(done->body)["done"].get<bool>());

  EXPECT_EQ(PostJson(cli, "/api/v1/study/rate",
                     {{"session_id", id}, {"query_index", 0}, {"result_index", 0}, {"score", 100}})->status,
            400);  // already rated

  auto closed = PostJson(cli, "/api/v1/study/close", {{"session_id", id}});
  ASSERT_EQ(closed->status, 200);
  const json summary = json::parse(closed->body);
  const auto& arms = summary["arms"];
  EXPECT_EQ(std::count(arms.begin(), arms.end(), json("random")), 2);
  EXPECT_EQ(summary["aggregates"]["engine"]["ratings"], 24);
  EXPECT_EQ(summary["aggregates"]["random"]["ratings"], 8);

  EXPECT_EQ(PostJson(cli, "/api/v1/study/rate",
                     {{"session_id", id}, {"query_index", 1}, {"result_index", 0}, {"score", 100}})->status,
            403);
  EXPECT_EQ(cli.Get("/api/v1/study/next?session=" + id)->status, 403);
  EXPECT_EQ(PostJson(cli, "/api/v1/study/close", {{"session_id", id}})->status, 403);
}

TEST_F(ServiceTest, StudyScaleValidation) {
  auto cli = Client();
  auto created = PostJson(cli, "/api/v1/study/session",
                          {{"rater_id", "r2"}, {"scale", "organ"}, {"queries", {Region(pool_->at(1))}}});
  ASSERT_EQ(created->status, 200) << created->body;
  const std::string id = json::parse(created->body)["session_id"];
  EXPECT_EQ(json::parse(created->body)["scale_values"], json({0, 100, "unclear"}));
  auto rate = [&](int r, const json& score) {
    return PostJson(cli, "/api/v1/study/rate",
                    {{"session_id", id}, {"query_index", 0}, {"result_index", r}, {"score", score}})->status;
  };
  EXPECT_EQ(rate(0, "unclear"), 200);
  EXPECT_EQ(rate(1, 50), 400);
  EXPECT_EQ(rate(1, "maybe"), 400);
  EXPECT_EQ(rate(4, 100), 400);
  EXPECT_EQ(rate(1, 0), 200);

  EXPECT_EQ(PostJson(cli, "/api/v1/study/session", {{"scale", "binary"}, {"n_queries", 1}})->status, 400);
  EXPECT_EQ(PostJson(cli, "/api/v1/study/session", {{"rater_id", "x"}, {"scale", "stars"}, {"n_queries", 1}})->status,
            400);
  EXPECT_EQ(cli.Get("/api/v1/study/next?session=nope")->status, 404);
  EXPECT_EQ(cli.Get("/api/v1/study/next")->status, 400);
}

TEST_F(ServiceTest, JournalReplayRestoresState) {
  auto cli = Client();
  auto created = PostJson(cli, "/api/v1/study/session",
                          {{"rater_id", "r3"}, {"scale", "rubric"}, {"n_queries", 4}});
  const std::string id = json::parse(created->body)["session_id"];
  cli.Get("/api/v1/study/next?session=" + id);
  ASSERT_EQ(PostJson(cli, "/api/v1/study/rate",
                     {{"session_id", id}, {"query_index", 0}, {"result_index", 2}, {"score", 75}})->status,
            200);
  const json live = server_->server->study().Snapshot();

  StudyOptions o;
  o.seed = 5;
  o.journal = dir_->path() / "journal.ndjson";
  auto engine = std::make_shared<const query::QueryEngine>((*db_)->shards, embed::MakeEmbedder("reference"), *store_);
  StudyManager replayed(o, engine, *db_, *pool_);
  EXPECT_EQ(replayed.Snapshot(), live);

  // A torn last line is ignored.
  const fs::path torn = dir_->path() / "torn.ndjson";
  fs::copy_file(o.journal, torn);
  {
    std::ofstream f(torn, std::ios::app);
    f << "{\"type\":\"rate\",\"sess";
  }
  o.journal = torn;
  StudyManager tolerant(o, engine, *db_, *pool_);
  EXPECT_EQ(tolerant.Snapshot(), live);
}

TEST_F(ServiceTest, BearerTokenRequired) {
  ServerOptions o;
  o.port = 0;
  o.auth_token = "s3cret";
  Running* guarded = Start(o);
  {
    auto cli = Client(guarded);
    EXPECT_EQ(cli.Get("/api/v1/health")->status, 200);
    EXPECT_EQ(cli.Get("/api/v1/slides")->status, 401);
    cli.set_bearer_token_auth("wrong");
    EXPECT_EQ(cli.Get("/api/v1/slides")->status, 401);
    cli.set_bearer_token_auth("s3cret");
    EXPECT_EQ(cli.Get("/api/v1/slides")->status, 200);
  }
  Shutdown(guarded);
}

TEST_F(ServiceTest, ConcurrentQueries) {
  std::vector<std::thread> ts;
  std::vector<std::string> bodies(4);
  for (std::size_t i = 0; i < bodies.size(); ++i) {
    ts.emplace_back([&, i] {
      auto cli = Client();
      auto res = PostJson(cli, "/api/v1/query", Region(pool_->at(2)));
      if (res && res->status == 200) bodies[i] = res->body;
    });
  }
  for (auto& t : ts) t.join();
  ASSERT_FALSE(bodies[0].empty());
  for (const auto& b : bodies) EXPECT_EQ(b, bodies[0]);
}

}  // namespace
}  // namespace simsearch::service
