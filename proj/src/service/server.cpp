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

#include "service/server.hpp"

#include <httplib.h>

#include <chrono>
#include <fstream>
#include <mutex>

#include "common/error.hpp"
#include "common/json_io.hpp"
#include "common/png_io.hpp"

namespace simsearch::service {

int HttpStatus(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return 400;
    case ErrorCode::kNotFound: return 404;
    case ErrorCode::kMismatch: return 409;
    case ErrorCode::kState: return 403;
    case ErrorCode::kUnderflow: return 422;
    default: return 500;
  }
}

namespace {

void SendJson(httplib::Response& res, const json& body, int status = 200) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void SendError(httplib::Response& res, int status, const std::string& message) {
  SendJson(res, {{"error", message}, {"status", status}}, status);
}

void SendPng(httplib::Response& res, const Image& img) {
  const auto bytes = EncodePng(img);
  res.status = 200;
  res.set_content(std::string(bytes.begin(), bytes.end()), "image/png");
}

json ParseBody(const httplib::Request& req) {
  try {
    return json::parse(req.body);
  } catch (const json::exception&) {
    Fail(ErrorCode::kInvalidArgument, "request body is not valid JSON");
  }
}

using Handler = std::function<void(const httplib::Request&, httplib::Response&)>;

// Maps exceptions to JSON error responses.
Handler Guard(Handler inner) {
  return [inner = std::move(inner)](const httplib::Request& req, httplib::Response& res) {
    try {
      inner(req, res);
    } catch (const Error& e) {
      SendError(res, HttpStatus(e.code()), e.what());
    } catch (const json::exception& e) {
      SendError(res, 400, std::string("invalid request: ") + e.what());
    } catch (const std::exception& e) {
      SendError(res, 500, e.what());
    }
  };
}

std::uint64_t ToU64(const std::string& s) {
  try {
    std::size_t used = 0;
    const auto v = std::stoull(s, &used);
    if (used == s.size()) return v;
  } catch (const std::logic_error&) {
  }
  Fail(ErrorCode::kNotFound, "invalid id '" + s + "'");
}

}  // namespace

Server::Server(ServerOptions options, std::shared_ptr<const pipeline::Database> db,
               std::shared_ptr<const dataset::SlideStore> store, std::shared_ptr<const embed::Embedder> embedder,
               std::vector<PatchRecord> study_pool)
    : options_(std::move(options)), db_(std::move(db)), store_(std::move(store)) {
  Require(db_ != nullptr && store_ != nullptr && embedder != nullptr, ErrorCode::kInvalidArgument,
          "server needs a database, a slide store and an embedder");
  engine_ = std::make_shared<const query::QueryEngine>(db_->shards, std::move(embedder), store_);
  study_ = std::make_unique<StudyManager>(options_.study, engine_, db_, std::move(study_pool));
  http_ = std::make_unique<httplib::Server>();
  const std::size_t workers = std::max<std::size_t>(1, options_.worker_threads);
  http_->new_task_queue = [workers] { return new httplib::ThreadPool(workers); };
  Routes();
}

Server::~Server() { Stop(); }

void Server::Routes() {
  auto& http = *http_;
  if (!options_.auth_token.empty()) {
    const std::string expected = "Bearer " + options_.auth_token;
    http.set_pre_routing_handler([expected](const httplib::Request& req, httplib::Response& res) {
      if (req.path == "/api/v1/health") return httplib::Server::HandlerResponse::Unhandled;
      if (req.get_header_value("Authorization") == expected) return httplib::Server::HandlerResponse::Unhandled;
      SendError(res, 401, "missing or invalid bearer token");
      return httplib::Server::HandlerResponse::Handled;
    });
  }
  if (options_.request_log != nullptr) {
    auto mu = std::make_shared<std::mutex>();
    std::ostream* log = options_.request_log;
    http.set_logger([mu, log](const httplib::Request& req, const httplib::Response& res) {
      const json line = {{"method", req.method}, {"path", req.path}, {"status", res.status},
                         {"bytes", res.body.size()}, {"remote", req.remote_addr}};
      std::lock_guard lock(*mu);
      *log << line.dump() << std::endl;
    });
  }

  http.Get("/api/v1/health", Guard([this](const httplib::Request&, httplib::Response& res) {
             const auto& h = db_->shards->header();
             SendJson(res, {{"status", "ok"}, {"embedder", h.embedder_name}, {"dim", h.dim},
                            {"entries", h.total_entries}, {"slides", store_->slides().size()}});
           }));

  http.Get("/api/v1/slides", Guard([this](const httplib::Request&, httplib::Response& res) {
             SendJson(res, dataset::SlideStore::ManifestJson(store_->slides()));
           }));

  http.Get(R"(/api/v1/tile/(\d+)/(\d+)/(\d+)/(\d+))",
           Guard([this](const httplib::Request& req, httplib::Response& res) {
             const auto slide = static_cast<std::uint32_t>(ToU64(req.matches[1]));
             const auto level = static_cast<std::size_t>(ToU64(req.matches[2]));
             const auto tx = static_cast<std::int64_t>(ToU64(req.matches[3]));
             const auto ty = static_cast<std::int64_t>(ToU64(req.matches[4]));
             Require(store_->contains(slide), ErrorCode::kNotFound, "unknown slide");
             Require(level < store_->slide(slide).levels.size(), ErrorCode::kNotFound, "unknown level");
             const auto path = store_->TilePath(slide, level, tx, ty);
             Require(std::filesystem::exists(path), ErrorCode::kNotFound, "no such tile");
             const auto bytes = ReadBinaryFile(path);
             res.set_content(std::string(bytes.begin(), bytes.end()), "image/png");
           }));

  http.Get(R"(/api/v1/patch/(\d+)\.png)", Guard([this](const httplib::Request& req, httplib::Response& res) {
             const auto id = ToU64(req.matches[1]);
             const auto& rows = db_->shards->patch_rows();
             const auto& table = db_->shards->table();
             auto it = std::lower_bound(rows.begin(), rows.end(), id, [&](std::uint32_t row, std::uint64_t v) {
               return table.meta(row).patch_id < v;
             });
             Require(it != rows.end() && table.meta(*it).patch_id == id, ErrorCode::kNotFound,
                     "unknown patch " + std::to_string(id));
             const auto& m = table.meta(*it);
             SendPng(res, store_->ReadRegion(m.slide_id, m.magnification, m.x, m.y, m.side_px, m.side_px));
           }));

  http.Post("/api/v1/query", Guard([this](const httplib::Request& req, httplib::Response& res) {
              json body = ParseBody(req);
              Require(body.is_object(), ErrorCode::kInvalidArgument, "query spec must be a JSON object");
              if (body.contains("embedder")) {
                const auto name = body.at("embedder").get<std::string>();
                Require(name == db_->shards->header().embedder_name, ErrorCode::kMismatch,
                        "embedder '" + name + "' does not match database embedder '" +
                            db_->shards->header().embedder_name + "'");
                body.erase("embedder");
              }
              const auto spec = query::QuerySpecFromJson(body);
              if (auto origin = spec.origin(); origin && std::holds_alternative<query::RegionSource>(spec.source)) {
                Require(store_->contains(origin->slide_id), ErrorCode::kNotFound,
                        "unknown slide " + std::to_string(origin->slide_id));
              }
              SendJson(res, pipeline::OutcomeJson(engine_->Run(spec), *db_));
            }));

  http.Post("/api/v1/study/session", Guard([this](const httplib::Request& req, httplib::Response& res) {
              SendJson(res, study_->CreateSession(ParseBody(req)));
            }));
  http.Get("/api/v1/study/next", Guard([this](const httplib::Request& req, httplib::Response& res) {
             Require(req.has_param("session"), ErrorCode::kInvalidArgument, "missing 'session' parameter");
             SendJson(res, study_->Next(req.get_param_value("session")));
           }));
  http.Post("/api/v1/study/rate", Guard([this](const httplib::Request& req, httplib::Response& res) {
              SendJson(res, study_->Rate(ParseBody(req)));
            }));
  http.Post("/api/v1/study/close", Guard([this](const httplib::Request& req, httplib::Response& res) {
              const json body = ParseBody(req);
              Require(body.is_object() && body.contains("session_id"), ErrorCode::kInvalidArgument,
                      "missing session_id");
              SendJson(res, study_->Close(body.at("session_id").get<std::string>()));
            }));
  http.Get(R"(/api/v1/study/image/([A-Za-z0-9-]+)/(\d+)/(query|\d+)\.png)",
           Guard([this](const httplib::Request& req, httplib::Response& res) {
             const std::string which = req.matches[3];
             const int r = which == "query" ? -1 : static_cast<int>(ToU64(which));
             SendPng(res, study_->RenderImage(req.matches[1], static_cast<std::size_t>(ToU64(req.matches[2])), r));
           }));
}

int Server::Bind() {
  if (port_ >= 0) return port_;
  int port = options_.port;
  if (port == 0) {
    port = http_->bind_to_any_port(options_.host);
  } else if (!http_->bind_to_port(options_.host, port)) {
    port = -1;
  }
  Require(port > 0, ErrorCode::kIo,
          "cannot listen on " + options_.host + ":" + std::to_string(options_.port));
  port_ = port;
  return port;
}

void Server::Run() {
  Bind();
  http_->listen_after_bind();
}

void Server::Stop() {
  if (http_) http_->stop();
}

bool Server::running() const { return http_ && http_->is_running(); }

}  // namespace simsearch::service
