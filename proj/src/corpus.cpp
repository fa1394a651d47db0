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

#include "kgf/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "kgf/errors.hpp"
#include "kgf/text.hpp"

namespace fs = std::filesystem;

namespace kgf::corpus {

std::string to_string(Cohort c) {
  switch (c) {
    case Cohort::PDAC: return "PDAC";
    case Cohort::BRCA: return "BRCA";
    case Cohort::OTHER: return "OTHER";
  }
  return "OTHER";
}

Cohort cohort_from_name(std::string_view name) {
  const std::string n = text::casefold(name);
  if (n == "pdac") return Cohort::PDAC;
  if (n == "brca") return Cohort::BRCA;
  return Cohort::OTHER;
}

const std::set<std::string>& default_abbreviations() {
  static const std::set<std::string> abbrevs = {
      "dr",   "mr",    "mrs",  "ms",    "prof",  "st",    "vs",
      "etc",  "e.g",   "i.e",  "b.i.d", "t.i.d", "q.i.d", "q.d",
      "p.r.n", "p.o",  "i.v",  "approx", "fig",  "al",    "no.",
  };
  return abbrevs;
}

namespace {

bool is_terminator(char c) { return c == '.' || c == '!' || c == '?'; }

// Word immediately before position `dot` (exclusive), lowercased,
// without its trailing period.
std::string word_before(std::string_view s, std::size_t dot) {
  std::size_t e = dot;
  std::size_t b = e;
  while (b > 0 && !std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return text::casefold(s.substr(b, e - b));
}

}  // namespace

std::vector<Sentence> segment_sentences(std::string_view narrative,
                                        const std::set<std::string>& abbreviations) {
  std::vector<Sentence> out;
  const std::size_t n = narrative.size();

  auto push_sentence = [&](std::size_t start, std::size_t end) {
    // Trim whitespace off both edges so spans cover exactly the content.
    while (start < end &&
           std::isspace(static_cast<unsigned char>(narrative[start]))) {
      ++start;
    }
    while (end > start &&
           std::isspace(static_cast<unsigned char>(narrative[end - 1]))) {
      --end;
    }
    if (start >= end) return;
    Sentence s;
    s.index = out.size();
    s.start = start;
    s.end = end;
    s.text = std::string(narrative.substr(start, end - start));
    out.push_back(std::move(s));
  };

  std::size_t sent_start = 0;
  std::size_t i = 0;
  while (i < n) {
    if (!is_terminator(narrative[i])) {
      ++i;
      continue;
    }
    // Decimal point: digit on both sides.
    if (narrative[i] == '.' && i > 0 && i + 1 < n &&
        std::isdigit(static_cast<unsigned char>(narrative[i - 1])) &&
        std::isdigit(static_cast<unsigned char>(narrative[i + 1]))) {
      ++i;
      continue;
    }
    // Abbreviation guard applies to periods only.
    if (narrative[i] == '.') {
      const std::string w = word_before(narrative, i);
      std::string stripped = w;
      while (!stripped.empty() && stripped.back() == '.') stripped.pop_back();
      if (abbreviations.count(stripped) > 0 || abbreviations.count(w) > 0) {
        ++i;
        continue;
      }
    }
    // Consume the full terminator run ("?!", "...").
    std::size_t term_end = i;
    while (term_end < n && is_terminator(narrative[term_end])) ++term_end;
    // Boundary requires whitespace next, then a capital letter or a
    // newline inside the gap; end of text also closes the sentence.
    if (term_end >= n) {
      push_sentence(sent_start, term_end);
      sent_start = term_end;
      i = term_end;
      continue;
    }
    if (!std::isspace(static_cast<unsigned char>(narrative[term_end]))) {
      i = term_end;
      continue;
    }
    std::size_t next = term_end;
    bool saw_newline = false;
    while (next < n && std::isspace(static_cast<unsigned char>(narrative[next]))) {
      if (narrative[next] == '\n') saw_newline = true;
      ++next;
    }
    const bool capital_next =
        next < n && std::isupper(static_cast<unsigned char>(narrative[next]));
    if (next >= n || capital_next || saw_newline) {
      push_sentence(sent_start, term_end);
      sent_start = term_end;
    }
    i = term_end;
  }
  if (sent_start < n) push_sentence(sent_start, n);
  return out;
}

std::vector<AnnSpan> parse_ann(std::string_view content) {
  std::vector<AnnSpan> out;
  for (const std::string& line : text::split(content, '\n')) {
    std::string_view v = text::trim(line);
    if (v.empty() || v[0] != 'T') continue;
    const auto cols = text::split(v, '\t');
    if (cols.size() < 2) continue;
    std::istringstream body(cols[1]);
    std::string label;
    long start = -1;
    long end = -1;
    body >> label >> start >> end;
    if (label.empty() || start < 0 || end < start) continue;
    out.push_back(AnnSpan{static_cast<std::size_t>(start),
                          static_cast<std::size_t>(end), label});
  }
  return out;
}

namespace {

std::string read_file(const fs::path& p) {
  if (!fs::is_regular_file(p)) {
    throw IoError("not a readable file: " + p.string());
  }
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError("cannot read file: " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("read failure on: " + p.string());
  return ss.str();
}

}  // namespace

LoadResult load_corpus(const std::string& root_dir,
                       const std::map<std::string, std::string>& cohort_map) {
  LoadResult result;
  const fs::path root(root_dir);
  if (!fs::exists(root) || !fs::is_directory(root)) {
    throw IoError("corpus root does not exist: " + root_dir);
  }

  // Gather narrative files deterministically.
  std::vector<fs::path> narrative_files;
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    if (entry.path().extension() == ".txt") {
      narrative_files.push_back(entry.path());
    }
  }
  std::sort(narrative_files.begin(), narrative_files.end());

  std::set<std::string> seen_ids;
  for (const fs::path& p : narrative_files) {
    const std::string patient_id = p.stem().string();
    if (!seen_ids.insert(patient_id).second) {
      result.errors.push_back(
          {p.string(), "duplicate patient_id: " + patient_id});
      continue;
    }
    ClinicalReport report;
    report.patient_id = patient_id;
    try {
      report.narrative = read_file(p);
    } catch (const Error& e) {
      result.errors.push_back({p.string(), e.what()});
      continue;
    }
    report.source_paths["narrative"] = p.string();

    auto it = cohort_map.find(patient_id);
    if (it != cohort_map.end()) {
      report.cohort = cohort_from_name(it->second);
    } else {
      const fs::path parent = p.parent_path();
      report.cohort = parent == root
                          ? Cohort::OTHER
                          : cohort_from_name(parent.filename().string());
    }

    report.sentences = segment_sentences(report.narrative);

    const fs::path ann = fs::path(p).replace_extension(".ann");
    if (fs::exists(ann)) {
      try {
        report.annotations = parse_ann(read_file(ann));
        report.source_paths["annotations"] = ann.string();
      } catch (const Error& e) {
        result.errors.push_back({ann.string(), e.what()});
      }
    }
    const fs::path model_out = fs::path(p).replace_extension(".json");
    if (fs::exists(model_out)) {
      report.source_paths["model_output"] = model_out.string();
    }
    result.reports.push_back(std::move(report));
  }

  std::sort(result.reports.begin(), result.reports.end(),
            [](const ClinicalReport& a, const ClinicalReport& b) {
              return a.patient_id < b.patient_id;
            });
  return result;
}

}  // namespace kgf::corpus
