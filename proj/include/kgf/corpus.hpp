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
#include <set>
#include <string>
#include <vector>

namespace kgf::corpus {

enum class Cohort { PDAC, BRCA, OTHER };

std::string to_string(Cohort c);
Cohort cohort_from_name(std::string_view name);

// One sentence with its [start, end) character span into the narrative.
struct Sentence {
  std::size_t index = 0;
  std::size_t start = 0;
  std::size_t end = 0;
  std::string text;
};

// Expert annotation line: a labeled character span. Reporting only.
struct AnnSpan {
  std::size_t start = 0;
  std::size_t end = 0;
  std::string label;
};

struct ClinicalReport {
  std::string patient_id;
  Cohort cohort = Cohort::OTHER;
  std::string narrative;
  std::vector<Sentence> sentences;
  // Keys: "narrative", "annotations", "model_output" (last two optional).
  std::map<std::string, std::string> source_paths;
  std::vector<AnnSpan> annotations;
};

struct LoadError {
  std::string path;
  std::string message;
};

struct LoadResult {
  std::vector<ClinicalReport> reports;  // sorted by patient_id
  std::vector<LoadError> errors;
};

// Clinical abbreviations whose trailing period never ends a sentence.
const std::set<std::string>& default_abbreviations();

// Splits on . ! ? followed by whitespace and a capital or a newline.
// Decimal points and abbreviation periods do not split. The returned spans
// are disjoint, ordered, and jointly cover every non-whitespace character.
std::vector<Sentence> segment_sentences(
    std::string_view narrative,
    const std::set<std::string>& abbreviations = default_abbreviations());

// Loads `<root>/<cohort>/<patient_id>.txt` (+ optional .ann / .json
// siblings). Cohort comes from the subdirectory name unless overridden in
// cohort_map (patient_id -> cohort name). Unreadable files become error
// records; loading continues.
LoadResult load_corpus(
    const std::string& root_dir,
    const std::map<std::string, std::string>& cohort_map = {});

// Parses brat-style annotation lines: `T<n>\t<label> <start> <end>\t<text>`.
// Unparseable lines are skipped.
std::vector<AnnSpan> parse_ann(std::string_view content);

}  // namespace kgf::corpus
