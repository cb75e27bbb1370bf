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

#include <atomic>
#include <functional>
#include <memory>
#include <ostream>
#include <string>

#include "common/error.hpp"
#include "pipeline/pipeline.hpp"
#include "service/study.hpp"

namespace httplib {
class Server;
}

namespace simsearch::service {

struct ServerOptions {
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 picks a free port
  std::string auth_token;  // empty: no authentication
  StudyOptions study;
  std::size_t worker_threads = 8;
  std::ostream* request_log = nullptr;  // one JSON object per request
};

// HTTP facade: query, slide/tile/patch reads, health and the blinded study.
class Server {
 public:
  Server(ServerOptions options, std::shared_ptr<const pipeline::Database> db,
         std::shared_ptr<const dataset::SlideStore> store, std::shared_ptr<const embed::Embedder> embedder,
         std::vector<PatchRecord> study_pool = {});
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  // Binds the listening socket; returns the bound port.
  int Bind();
  // Serves until Stop(). Binds first if needed.
  void Run();
  // Stops accepting and waits for in-flight requests. Safe from any thread.
  void Stop();
  bool running() const;
  int port() const { return port_; }

  StudyManager& study() { return *study_; }

 private:
  void Routes();

  ServerOptions options_;
  std::shared_ptr<const pipeline::Database> db_;
  std::shared_ptr<const dataset::SlideStore> store_;
  std::shared_ptr<const query::QueryEngine> engine_;
  std::unique_ptr<StudyManager> study_;
  std::unique_ptr<httplib::Server> http_;
  std::atomic<int> port_{-1};
};

// HTTP status for an error code.
int HttpStatus(ErrorCode code);

}  // namespace simsearch::service
