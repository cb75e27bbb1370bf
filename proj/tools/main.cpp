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

// simsearch command line: synth, build, query, eval, serve, export-embeddings.

#include <signal.h>
#include <pthread.h>

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>

#include "simsearch/simsearch.h"

using json = nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitInternal = 3;

int ExitCode(simsearch_status s) {
  if (s == SIMSEARCH_OK) return kExitOk;
  if (s == SIMSEARCH_INVALID_ARGUMENT) return kExitUsage;
  if (s == SIMSEARCH_INTERNAL) return kExitInternal;
  return kExitData;
}

struct Failure {
  int code;
};

void Check(simsearch_status s, const char* what) {
  if (s == SIMSEARCH_OK) return;
  std::cerr << "error: " << what << ": " << simsearch_last_error() << " (" << simsearch_status_name(s)
            << ")\n";
  throw Failure{ExitCode(s)};
}

// Takes ownership of a library string.
std::string Take(char* s) {
  std::string out = s != nullptr ? s : "";
  simsearch_string_free(s);
  return out;
}

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    std::cerr << "error: cannot read " << path << "\n";
    throw Failure{kExitData};
  }
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// Flags shared by every pipeline command. Only flags the user actually
// passed become overrides, so the config file supplies the rest.
struct Common {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  json overrides = json::object();

  void Add(CLI::App* app) {
    app->add_option("--config", config_path, "key = value config file");
    app->add_option("--seed", seed, "random seed (overrides config)");
    app->add_option("--threads", threads, "worker cap, 0 = all cores");
  }

  std::string Resolve() {
    if (seed) overrides["seed"] = *seed;
    if (threads) overrides["threads"] = *threads;
    char* out = nullptr;
    Check(simsearch_config_load(config_path.empty() ? nullptr : config_path.c_str(), overrides.dump().c_str(),
                                &out),
          "config");
    return Take(out);
  }
};

template <typename T>
void Flag(CLI::App* app, json& overrides, const std::string& flag, const std::string& key,
          const std::string& help) {
  app->add_option_function<T>(flag, [&overrides, key](const T& v) { overrides[key] = v; }, help);
}

class SignalWaiter {
 public:
  SignalWaiter() {
    sigemptyset(&set_);
    sigaddset(&set_, SIGTERM);
    sigaddset(&set_, SIGINT);
    pthread_sigmask(SIG_BLOCK, &set_, nullptr);
  }
  template <typename Fn>
  void Start(Fn on_signal) {
    thread_ = std::thread([this, on_signal] {
      int sig = 0;
      sigwait(&set_, &sig);
      on_signal();
    });
  }
  void Finish() {
    if (!thread_.joinable()) return;
    pthread_kill(thread_.native_handle(), SIGTERM);
    thread_.join();
  }

 private:
  sigset_t set_;
  std::thread thread_;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Similar-image search over tiled slide images"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(simsearch_version()));

  // synth
  auto* synth = app.add_subcommand("synth", "Generate synthetic slides and annotations");
  std::string synth_spec, synth_out;
  std::optional<std::uint64_t> synth_seed;
  unsigned synth_threads = 1;
  synth->add_option("spec", synth_spec, "synthetic dataset spec (JSON)")->required();
  synth->add_option("--out", synth_out, "output store directory")->required();
  synth->add_option("--seed", synth_seed, "overrides the seed in the dataset file");
  synth->add_option("--threads", synth_threads, "render workers");

  // build
  auto* build = app.add_subcommand("build", "Extract, embed and save a database");
  Common build_common;
  build_common.Add(build);
  Flag<std::string>(build, build_common.overrides, "--store", "store", "slide store root");
  Flag<std::string>(build, build_common.overrides, "--annotations", "annotations", "annotations.json");
  Flag<std::string>(build, build_common.overrides, "--db", "db", "output database file");
  Flag<std::string>(build, build_common.overrides, "--mag", "magnifications", "comma separated, e.g. 10X,40X");
  Flag<std::string>(build, build_common.overrides, "--embedder", "embedder", "embedder name");
  Flag<std::string>(build, build_common.overrides, "--class-axis", "class_axis", "feature | gleason | feature_x_organ");
  Flag<std::int64_t>(build, build_common.overrides, "--db-per-class", "db_per_class", "balanced database size per class");
  Flag<std::int64_t>(build, build_common.overrides, "--queries-per-class", "queries_per_class", "balanced query count per class");
  Flag<double>(build, build_common.overrides, "--query-slide-fraction", "query_slide_fraction", "slides held out for queries");
  Flag<double>(build, build_common.overrides, "--coverage", "coverage_threshold", "label coverage threshold");
  Flag<bool>(build, build_common.overrides, "--keep-unlabeled", "keep_unlabeled", "keep unlabeled patches");

  // query
  auto* query = app.add_subcommand("query", "Search the database with a slide region");
  Common query_common;
  query_common.Add(query);
  Flag<std::string>(query, query_common.overrides, "--db", "db", "database file");
  Flag<std::string>(query, query_common.overrides, "--store", "store", "slide store root");
  Flag<int>(query, query_common.overrides, "--n-shards", "n_shards", "index shards");
  json region = json::object();
  query->add_option_function<std::uint32_t>("--slide", [&](const std::uint32_t& v) { region["slide_id"] = v; }, "slide id")->required();
  query->add_option_function<std::int64_t>("--x", [&](const std::int64_t& v) { region["x"] = v; }, "base x")->required();
  query->add_option_function<std::int64_t>("--y", [&](const std::int64_t& v) { region["y"] = v; }, "base y")->required();
  query->add_option_function<int>("--width", [&](const int& v) { region["w"] = v; }, "width, level px")->required();
  query->add_option_function<int>("--height", [&](const int& v) { region["h"] = v; }, "height, level px")->required();
  query->add_option_function<std::string>("--mag", [&](const std::string& v) { region["magnification"] = v; }, "magnification")->required();
  query->add_option_function<int>("--k", [&](const int& v) { region["k"] = v; }, "number of results");
  query->add_option_function<bool>("--exclude-self", [&](const bool& v) { region["exclude_self"] = v; }, "drop hits overlapping the query");
  std::string query_format = "json";
  query->add_option("--format", query_format, "json | table")->check(CLI::IsMember({"json", "table"}));

  // eval
  auto* evalc = app.add_subcommand("eval", "Evaluate the database's query set");
  Common eval_common;
  eval_common.Add(evalc);
  Flag<std::string>(evalc, eval_common.overrides, "--db", "db", "database file");
  Flag<std::string>(evalc, eval_common.overrides, "--store", "store", "slide store root");
  Flag<std::string>(evalc, eval_common.overrides, "--reports", "reports", "report output directory");
  Flag<std::string>(evalc, eval_common.overrides, "--axis", "eval_axis", "feature | organ | gleason");
  Flag<std::string>(evalc, eval_common.overrides, "--match", "match_mode", "lenient | strict");
  Flag<int>(evalc, eval_common.overrides, "--k", "k", "top-k");
  Flag<bool>(evalc, eval_common.overrides, "--random-baseline", "random_baseline", "also score random results");
  std::vector<std::string> sweep_mags;
  std::vector<std::size_t> sweep_sizes;
  std::vector<int> sweep_ks;
  evalc->add_option("--sweep-mag", sweep_mags, "magnifications to sweep");
  evalc->add_option("--sweep-db-size", sweep_sizes, "database patches per class to sweep");
  evalc->add_option("--sweep-k", sweep_ks, "k values to sweep");

  // serve
  auto* serve = app.add_subcommand("serve", "Start the HTTP service");
  Common serve_common;
  serve_common.Add(serve);
  Flag<std::string>(serve, serve_common.overrides, "--db", "db", "database file");
  Flag<std::string>(serve, serve_common.overrides, "--store", "store", "slide store root");
  Flag<std::string>(serve, serve_common.overrides, "--host", "listen_host", "listen address");
  Flag<int>(serve, serve_common.overrides, "--port", "listen_port", "listen port, 0 = any");
  Flag<std::string>(serve, serve_common.overrides, "--journal", "journal", "study rating journal");
  Flag<std::string>(serve, serve_common.overrides, "--token", "auth_token", "bearer token");

  // export-embeddings
  auto* exportc = app.add_subcommand("export-embeddings", "Write embeddings and labels as TSV");
  Common export_common;
  export_common.Add(exportc);
  Flag<std::string>(exportc, export_common.overrides, "--db", "db", "database file");
  std::string export_out;
  exportc->add_option("--out", export_out, "output TSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (synth->parsed()) {
      json spec = json::parse(ReadFile(synth_spec), nullptr, false);
      if (spec.is_discarded() || !spec.is_object()) {
        std::cerr << "error: spec is not a JSON object\n";
        return kExitUsage;
      }
      if (synth_seed) spec["seed"] = *synth_seed;
      char* out = nullptr;
      Check(simsearch_synth(spec.dump().c_str(), synth_out.c_str(), synth_threads, &out), "synth");
      std::cout << Take(out) << "\n";
    } else if (build->parsed()) {
      const std::string config = build_common.Resolve();
      char* out = nullptr;
      Check(simsearch_build(config.c_str(), &out), "build");
      std::cout << json::parse(Take(out)).dump(2) << "\n";
    } else if (query->parsed()) {
      const std::string config = query_common.Resolve();
      simsearch_db* db = nullptr;
      Check(simsearch_db_open(config.c_str(), &db), "open database");
      char* out = nullptr;
      const simsearch_status s = simsearch_db_query(db, region.dump().c_str(), &out);
      simsearch_db_close(db);
      Check(s, "query");
      json result = json::parse(Take(out));
      result["seed"] = json::parse(config)["seed"];
      if (query_format == "json") {
        std::cout << result.dump(2) << "\n";
      } else {
        std::printf("%-5s %-10s %-6s %-5s %-8s %-8s %-7s %s\n", "rank", "patch", "slide", "mag", "x", "y",
                    "orient", "distance");
        for (const auto& r : result["results"]) {
          std::printf("%-5d %-10llu %-6u %-5s %-8lld %-8lld %-7s %.6f\n", r["rank"].get<int>(),
                      static_cast<unsigned long long>(r["patch_id"].get<std::uint64_t>()),
                      r["slide_id"].get<unsigned>(), r["magnification"].get<std::string>().c_str(),
                      static_cast<long long>(r["x"].get<std::int64_t>()),
                      static_cast<long long>(r["y"].get<std::int64_t>()),
                      r["best_orientation"].get<std::string>().c_str(), r["distance"].get<double>());
        }
        if (result["exhausted"].get<bool>()) std::printf("(fewer than k results survived filtering)\n");
      }
    } else if (evalc->parsed()) {
      const std::string config = eval_common.Resolve();
      std::string sweep;
      if (!sweep_mags.empty() || !sweep_sizes.empty() || !sweep_ks.empty()) {
        json j = {{"magnifications", sweep_mags}, {"db_sizes", sweep_sizes}};
        if (!sweep_ks.empty()) j["ks"] = sweep_ks;
        sweep = j.dump();
      }
      char* out = nullptr;
      Check(simsearch_eval(config.c_str(), sweep.empty() ? nullptr : sweep.c_str(), &out), "eval");
      std::cout << json::parse(Take(out)).dump(2) << "\n";
    } else if (serve->parsed()) {
      const std::string config = serve_common.Resolve();
      SignalWaiter signals;  // before any thread starts, so all inherit the mask
      simsearch_server* server = nullptr;
      Check(simsearch_server_create(config.c_str(), &server), "start server");
      int port = 0;
      const simsearch_status bound = simsearch_server_bind(server, &port);
      if (bound != SIMSEARCH_OK) {
        simsearch_server_destroy(server);
        Check(bound, "bind");
      }
      std::cout << json{{"listening", port}}.dump() << std::endl;
      signals.Start([server] { simsearch_server_stop(server); });
      const simsearch_status ran = simsearch_server_run(server);
      signals.Finish();
      simsearch_server_destroy(server);
      Check(ran, "serve");
      std::cout << json{{"stopped", true}}.dump() << std::endl;
    } else if (exportc->parsed()) {
      const std::string config = export_common.Resolve();
      simsearch_db* db = nullptr;
      Check(simsearch_db_open(config.c_str(), &db), "open database");
      const simsearch_status s = simsearch_export_embeddings(db, export_out.c_str());
      simsearch_db_close(db);
      Check(s, "export");
      std::cout << json{{"written", export_out}}.dump() << "\n";
    }
  } catch (const Failure& f) {
    return f.code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitOk;
}
