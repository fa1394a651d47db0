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

#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace kgf {

// Flat key/value configuration. File format: one `key = value` per line,
// `#` comments, blank lines ignored.
class Config {
 public:
  Config() = default;
  explicit Config(std::map<std::string, std::string> values)
      : values_(std::move(values)) {}

  static Config load(const std::string& path);

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  // Typed getters. The non-defaulted forms throw ConfigError naming the
  // missing key; malformed numerics throw ConfigError as well.
  std::string get_string(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key) const;
  int get_int(const std::string& key, int fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;

  void set(const std::string& key, const std::string& value) {
    values_[key] = value;
  }

  // Throws ConfigError naming the first missing key.
  void require(const std::vector<std::string>& keys) const;

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

// Every threshold the pipeline honors must appear in a pipeline config.
const std::vector<std::string>& required_pipeline_keys();

}  // namespace kgf
