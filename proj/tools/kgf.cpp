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

#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "kgf/errors.hpp"
#include "kgf/pipeline.hpp"

int main(int argc, char** argv) {
  CLI::App app{"kgf: clinical knowledge-graph construction and validation"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::string out_dir;
  std::string cohort;
  bool offline = false;
  app.add_option("--config", config_path, "Config file (key = value lines)");
  app.add_flag("--offline", offline, "Use mock providers only");
  app.add_option("--cohort", cohort, "Restrict to one cohort (PDAC, BRCA, OTHER)");
  app.add_option("--out", out_dir, "Artifact directory (overrides config)");

  for (const std::string& stage : kgf::pipeline::stage_names()) {
    app.add_subcommand(stage, "Run the " + stage + " stage");
  }
  app.add_subcommand("pipeline", "Run every stage in order (cached)");

  auto* query_cmd = app.add_subcommand("query", "Evaluate a SPARQL query file");
  std::string graph_path;
  std::string query_path;
  query_cmd->add_option("--graph", graph_path, "N-Triples graph file")->required();
  query_cmd->add_option("--query", query_path, "SPARQL query file")->required();

  CLI11_PARSE(app, argc, argv);

  kgf::pipeline::Options options;
  options.config_path = config_path;
  options.offline = offline;
  if (!cohort.empty()) options.cohort = cohort;
  if (!out_dir.empty()) options.out_dir = out_dir;

  try {
    if (query_cmd->parsed()) {
      std::cout << kgf::pipeline::run_query(graph_path, query_path);
      return kgf::pipeline::kExitOk;
    }
    const std::string verb = app.get_subcommands().front()->get_name();
    if (config_path.empty()) {
      std::cerr << "config error: --config is required\n";
      return kgf::pipeline::kExitConfigError;
    }
    if (verb == "pipeline") {
      return kgf::pipeline::run_pipeline(options);
    }
    kgf::pipeline::run_stage(verb, options);
    return kgf::pipeline::kExitOk;
  } catch (const kgf::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kgf::pipeline::kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kgf::pipeline::kExitStageFailure;
  }
}
