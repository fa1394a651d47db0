// Copyright 2026 The kgf Authors
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

#include "kgf/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "kgf/errors.hpp"
#include "kgf/text.hpp"

namespace kgf {

Config Config::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::map<std::string, std::string> values;
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view v = text::trim(line);
    if (v.empty() || v[0] == '#') continue;
    std::size_t eq = v.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("malformed config line " + std::to_string(lineno) +
                        " in " + path + ": expected key = value");
    }
    std::string key(text::trim(v.substr(0, eq)));
    std::string value(text::trim(v.substr(eq + 1)));
    if (key.empty()) {
      throw ConfigError("empty key on config line " + std::to_string(lineno) +
                        " in " + path);
    }
    values[key] = value;
  }
  return Config(std::move(values));
}

std::string Config::get_string(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("missing config key: " + key);
  return it->second;
}

std::string Config::get_string(const std::string& key,
                               const std::string& fallback) const {
  auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

double Config::get_double(const std::string& key) const {
  const std::string raw = get_string(key);
  char* end = nullptr;
  double v = std::strtod(raw.c_str(), &end);
  if (end == raw.c_str() || *end != '\0') {
    throw ConfigError("config key " + key + " is not a number: " + raw);
  }
  return v;
}

double Config::get_double(const std::string& key, double fallback) const {
  return has(key) ? get_double(key) : fallback;
}

int Config::get_int(const std::string& key) const {
  const std::string raw = get_string(key);
  char* end = nullptr;
  long v = std::strtol(raw.c_str(), &end, 10);
  if (end == raw.c_str() || *end != '\0') {
    throw ConfigError("config key " + key + " is not an integer: " + raw);
  }
  return static_cast<int>(v);
}

int Config::get_int(const std::string& key, int fallback) const {
  return has(key) ? get_int(key) : fallback;
}

bool Config::get_bool(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  const std::string v = text::casefold(get_string(key));
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError("config key " + key + " is not a boolean: " + v);
}

void Config::require(const std::vector<std::string>& keys) const {
  for (const std::string& k : keys) {
    if (!has(k)) throw ConfigError("missing config key: " + k);
  }
}

const std::vector<std::string>& required_pipeline_keys() {
  static const std::vector<std::string> keys = {
      "corpus_root", "vocab_file",  "delta_h",     "tau_fuzzy",
      "gamma_ngram", "tau_typo",    "alpha_lex",   "map_floor",
      "delta_j",     "epsilon_xi",  "lambda1",     "lambda2",
      "lambda3",     "delta_t",     "gamma_red",   "n_variants",
      "max_inflight"};
  return keys;
}

}  // namespace kgf
