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

#include "common/config.hpp"

#include <charconv>
#include <functional>
#include <map>
#include <sstream>

#include "common/error.hpp"
#include "common/json_io.hpp"

namespace simsearch {
namespace {

std::string Trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

[[noreturn]] void BadValue(const std::string& key, const std::string& value) {
  Fail(ErrorCode::kInvalidArgument, "invalid value '" + value + "' for config key '" + key + "'");
}

template <typename T>
T ParseNumber(const std::string& key, const std::string& value) {
  T out{};
  const char* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) BadValue(key, value);
  return out;
}

double ParseReal(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size()) BadValue(key, value);
    return v;
  } catch (const std::logic_error&) {
    BadValue(key, value);
  }
}

bool ParseBool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  BadValue(key, value);
}

std::vector<std::string> ParseList(const std::string& value) {
  std::vector<std::string> out;
  std::stringstream in(value);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = Trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

using Setter = std::function<void(Config&, const std::string&, const std::string&)>;
using Getter = std::function<json(const Config&)>;

struct Field {
  std::string key;
  Setter set;
  Getter get;
};

template <typename T>
Field Make(std::string key, T Config::*member) {
  Setter set = [member](Config& c, const std::string& k, const std::string& v) {
    if constexpr (std::is_same_v<T, std::string>) {
      c.*member = v;
    } else if constexpr (std::is_same_v<T, bool>) {
      c.*member = ParseBool(k, v);
    } else if constexpr (std::is_same_v<T, double>) {
      c.*member = ParseReal(k, v);
    } else if constexpr (std::is_same_v<T, std::vector<std::string>>) {
      c.*member = ParseList(v);
    } else {
      c.*member = ParseNumber<T>(k, v);
    }
  };
  Getter get = [member](const Config& c) { return json(c.*member); };
  return {std::move(key), std::move(set), std::move(get)};
}

const std::vector<Field>& Fields() {
  static const std::vector<Field> fields = {
      Make("store", &Config::store),
      Make("annotations", &Config::annotations),
      Make("db", &Config::db),
      Make("reports", &Config::reports),
      Make("journal", &Config::journal),
      Make("embedder", &Config::embedder),
      Make("magnifications", &Config::magnifications),
      Make("side_px", &Config::side_px),
      Make("stride_px", &Config::stride_px),
      Make("coverage_threshold", &Config::coverage_threshold),
      Make("class_axis", &Config::class_axis),
      Make("db_per_class", &Config::db_per_class),
      Make("queries_per_class", &Config::queries_per_class),
      Make("query_slide_fraction", &Config::query_slide_fraction),
      Make("keep_unlabeled", &Config::keep_unlabeled),
      Make("leaf_target", &Config::leaf_target),
      Make("max_depth", &Config::max_depth),
      Make("n_shards", &Config::n_shards),
      Make("density_threshold", &Config::density_threshold),
      Make("hash_bits", &Config::hash_bits),
      Make("probe_radius", &Config::probe_radius),
      Make("k", &Config::k),
      Make("oversample", &Config::oversample),
      Make("min_separation", &Config::min_separation),
      Make("exclude_self", &Config::exclude_self),
      Make("exclude_query_slide", &Config::exclude_query_slide),
      Make("eval_axis", &Config::eval_axis),
      Make("match_mode", &Config::match_mode),
      Make("random_baseline", &Config::random_baseline),
      Make("listen_host", &Config::listen_host),
      Make("listen_port", &Config::listen_port),
      Make("study_fraction", &Config::study_fraction),
      Make("auth_token", &Config::auth_token),
      Make("seed", &Config::seed),
      Make("threads", &Config::threads),
  };
  return fields;
}

void Range(bool ok, const std::string& what) {
  Require(ok, ErrorCode::kInvalidArgument, "config value out of range: " + what);
}

}  // namespace

const std::vector<std::string>& ConfigKeys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& f : Fields()) k.push_back(f.key);
    return k;
  }();
  return keys;
}

void SetConfigValue(Config& config, const std::string& key, const std::string& value) {
  for (const auto& f : Fields()) {
    if (f.key == key) {
      f.set(config, key, value);
      return;
    }
  }
  Fail(ErrorCode::kInvalidArgument, "unknown config key '" + key + "'");
}

void Config::Validate() const {
  static const std::vector<std::string> kMags{"40X", "20X", "10X", "5X"};
  Range(!magnifications.empty(), "magnifications must not be empty");
  for (const auto& m : magnifications) {
    Range(std::find(kMags.begin(), kMags.end(), m) != kMags.end(), "magnification '" + m + "'");
  }
  Range(side_px >= 16 && side_px <= 4096, "side_px in 16..4096");
  Range(stride_px >= 0 && stride_px <= 4096, "stride_px in 0..4096");
  Range(coverage_threshold > 0 && coverage_threshold <= 1, "coverage_threshold in (0, 1]");
  Range(class_axis == "feature" || class_axis == "gleason" || class_axis == "feature_x_organ",
        "class_axis in {feature, gleason, feature_x_organ}");
  Range(db_per_class >= 0, "db_per_class >= 0");
  Range(queries_per_class >= 0, "queries_per_class >= 0");
  Range(query_slide_fraction >= 0 && query_slide_fraction < 1, "query_slide_fraction in [0, 1)");
  Range(leaf_target >= 1 && leaf_target <= 1000000, "leaf_target in 1..1000000");
  Range(max_depth >= 0 && max_depth <= 64, "max_depth in 0..64");
  Range(n_shards >= 1 && n_shards <= 1024, "n_shards in 1..1024");
  Range(density_threshold >= 0, "density_threshold >= 0");
  Range(hash_bits >= 1 && hash_bits <= 32, "hash_bits in 1..32");
  Range(probe_radius >= 0 && probe_radius <= 32, "probe_radius in 0..32");
  Range(k >= 1 && k <= 1000, "k in 1..1000");
  Range(oversample >= 1 && oversample <= 1000, "oversample in 1..1000");
  Range(min_separation >= 0 && std::isfinite(min_separation), "min_separation >= 0");
  Range(eval_axis == "feature" || eval_axis == "organ" || eval_axis == "gleason",
        "eval_axis in {feature, organ, gleason}");
  Range(match_mode == "lenient" || match_mode == "strict", "match_mode in {lenient, strict}");
  Range(listen_port >= 0 && listen_port <= 65535, "listen_port in 0..65535");
  Range(study_fraction >= 0 && study_fraction <= 1, "study_fraction in [0, 1]");
  Range(threads >= 0 && threads <= 1024, "threads in 0..1024");
}

Config ParseConfigText(std::string_view text) {
  Config config;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    const std::string trimmed = Trim(line);
    if (trimmed.empty()) continue;
    const auto eq = trimmed.find('=');
    Require(eq != std::string::npos, ErrorCode::kInvalidArgument,
            "config line " + std::to_string(line_no) + ": expected 'key = value'");
    try {
      SetConfigValue(config, Trim(trimmed.substr(0, eq)), Trim(trimmed.substr(eq + 1)));
    } catch (const Error& e) {
      Fail(e.code(), "config line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  config.Validate();
  return config;
}

Config LoadConfig(const std::filesystem::path& path) {
  return ParseConfigText(ReadTextFile(path));
}

void ApplyConfigJson(Config& config, const json& overrides) {
  Require(overrides.is_object(), ErrorCode::kInvalidArgument, "config overrides must be an object");
  for (const auto& [key, value] : overrides.items()) {
    std::string text;
    if (value.is_string()) {
      text = value.get<std::string>();
    } else if (value.is_boolean()) {
      text = value.get<bool>() ? "true" : "false";
    } else if (value.is_number_integer() || value.is_number_unsigned()) {
      text = value.dump();
    } else if (value.is_number_float()) {
      std::ostringstream s;
      s.precision(17);
      s << value.get<double>();
      text = s.str();
    } else if (value.is_array()) {
      for (const auto& item : value) {
        Require(item.is_string(), ErrorCode::kInvalidArgument,
                "config key '" + key + "' expects a list of strings");
        text += (text.empty() ? "" : ",") + item.get<std::string>();
      }
    } else {
      Fail(ErrorCode::kInvalidArgument, "unsupported value type for config key '" + key + "'");
    }
    SetConfigValue(config, key, text);
  }
  config.Validate();
}

json ToJson(const Config& config) {
  json j = json::object();
  for (const auto& f : Fields()) j[f.key] = f.get(config);
  return j;
}

std::string ToConfigText(const Config& config) {
  std::ostringstream out;
  for (const auto& f : Fields()) {
    const json v = f.get(config);
    out << f.key << " = ";
    if (v.is_string()) {
      out << v.get<std::string>();
    } else if (v.is_array()) {
      for (std::size_t i = 0; i < v.size(); ++i) out << (i ? "," : "") << v[i].get<std::string>();
    } else {
      out << v.dump();
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace simsearch
