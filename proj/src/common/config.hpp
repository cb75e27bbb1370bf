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
#include <string>
#include <vector>

#include <json.hpp>

namespace simsearch {

using json = nlohmann::json;

// Operator configuration. Text format: one `key = value` per line, `#`
// starts a comment, lists are comma separated. Unknown keys are rejected.
struct Config {
  // paths
  std::string store;
  std::string annotations;  // empty: <store>/annotations.json
  std::string db;
  std::string reports;      // output directory for eval reports
  std::string journal;      // study rating journal

  // build
  std::string embedder = "reference";
  std::vector<std::string> magnifications{"10X"};
  int side_px = 300;
  int stride_px = 0;
  double coverage_threshold = 0.75;
  std::string class_axis = "feature";
  std::int64_t db_per_class = 0;  // 0: keep every labeled patch
  std::int64_t queries_per_class = 0;
  double query_slide_fraction = 0.2;
  bool keep_unlabeled = false;

  // index
  int leaf_target = 40;
  int max_depth = 6;
  int n_shards = 1;
  std::int64_t density_threshold = 100000;
  int hash_bits = 16;
  int probe_radius = 1;

  // query
  int k = 5;
  int oversample = 5;
  double min_separation = 1000.0;
  bool exclude_self = true;
  bool exclude_query_slide = false;

  // eval
  std::string eval_axis = "feature";
  std::string match_mode = "lenient";
  bool random_baseline = true;

  // service
  std::string listen_host = "127.0.0.1";
  int listen_port = 8080;
  double study_fraction = 0.25;
  std::string auth_token;

  std::uint64_t seed = 0;
  int threads = 1;  // 0: all hardware threads

  // Throws kInvalidArgument naming the first out-of-range value.
  void Validate() const;
};

// Keys accepted by SetConfigValue, in documentation order.
const std::vector<std::string>& ConfigKeys();

// Parses and assigns one value; throws kInvalidArgument on unknown keys or
// unparsable values.
void SetConfigValue(Config& config, const std::string& key, const std::string& value);

Config ParseConfigText(std::string_view text);
Config LoadConfig(const std::filesystem::path& path);

// Applies {"key": value, ...} on top of `config` (values may be strings,
// numbers, booleans or arrays of strings).
void ApplyConfigJson(Config& config, const json& overrides);

json ToJson(const Config& config);
std::string ToConfigText(const Config& config);

}  // namespace simsearch
