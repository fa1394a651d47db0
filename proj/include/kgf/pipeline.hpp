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

#include <optional>
#include <string>
#include <vector>

#include "kgf/config.hpp"

namespace kgf::pipeline {

struct Options {
  std::string config_path;
  bool offline = false;
  std::optional<std::string> cohort;  // restrict to one cohort
  std::optional<std::string> out_dir; // overrides config out_dir
};

// Exit codes shared with the CLI.
inline constexpr int kExitOk = 0;
inline constexpr int kExitStageFailure = 1;
inline constexpr int kExitConfigError = 2;

// Stage names in execution order:
//   extract, ground, map, relate, encode, validate, report
const std::vector<std::string>& stage_names();

// Runs one stage (its inputs must already exist under out_dir). Throws
// ConfigError for configuration problems, Error subclasses otherwise.
void run_stage(const std::string& stage, const Options& options);

// Runs every stage in order with per-stage caching: a stage whose output
// files all exist is skipped. Returns an exit code; never throws.
int run_pipeline(const Options& options);

// Evaluates a SPARQL query file against an N-Triples graph file and
// returns TSV rows (rendered terms).
std::string run_query(const std::string& graph_path,
                      const std::string& query_path);

}  // namespace kgf::pipeline
