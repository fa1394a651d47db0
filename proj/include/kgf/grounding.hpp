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

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "kgf/corpus.hpp"
#include "kgf/extraction.hpp"

namespace kgf::grounding {

enum class MatchTechnique {
  Exact,
  Regex,
  Fuzzy,
  NGram,
  BooleanInference,
  CaseInsensitive,
  NegationPattern,
  Lemma,
  Synonym,
  SentenceNegation,
  TypoFix,
  ExplicitFix,
};

std::string to_string(MatchTechnique t);

enum class MatchStatus { Grounded, Rescued, Hallucinated };

std::string to_string(MatchStatus s);

struct MatchResult {
  std::size_t triple_index = 0;
  std::optional<int> stage;  // 1, 2 or 3; absent when hallucinated
  std::optional<MatchTechnique> technique;
  std::optional<std::pair<std::size_t, std::size_t>> matched_span;
  double score = 0.0;  // [0,100] for similarity techniques, 1/0 for boolean
  MatchStatus status = MatchStatus::Hallucinated;
};

struct GroundingReport {
  std::string patient_id;
  std::size_t triples = 0;
  std::size_t grounded = 0;
  std::size_t rescued = 0;
  std::size_t hallucinated = 0;
  double coverage = 0.0;           // grounded / triples
  double correctness_rate = 0.0;   // (grounded + rescued) / triples
  double hallucination_rate = 0.0; // hallucinated / triples
  double rescue_rate = 0.0;        // rescued / (rescued + hallucinated)
  std::map<std::string, std::size_t> per_technique_counts;
};

struct GroundingConfig {
  double tau_fuzzy = 90.0;
  double gamma_ngram = 0.6;
  double tau_typo = 80.0;
  int negation_scope_tokens = 5;
  int fuzzy_window_slack = 3;
  std::vector<std::string> negation_cues;  // casefolded; may be multiword
  // Bidirectional synonym groups, keyed by casefolded term.
  std::map<std::string, std::vector<std::string>> synonyms;
  // Ordered suffix rewrites, longest first.
  std::vector<std::pair<std::string, std::string>> lemma_suffix_rules;
  std::map<std::string, std::string> irregular_lemmas;
  std::map<std::string, std::string> explicit_fixes;

  static GroundingConfig defaults();
};

// Plain-text table loaders (one mapping per line, `term|alt1|alt2`,
// `suffix>replacement`, `typo|fix`, one cue per line). Loaded entries are
// merged over cfg's existing tables.
void load_negation_cues(GroundingConfig& cfg, const std::string& path);
void load_synonyms(GroundingConfig& cfg, const std::string& path);
void load_lemma_rules(GroundingConfig& cfg, const std::string& path);
void load_irregular_lemmas(GroundingConfig& cfg, const std::string& path);
void load_explicit_fixes(GroundingConfig& cfg, const std::string& path);

// 100 * (1 - indel_distance / (|a| + |b|)) where indel_distance is the
// minimal insert/delete edit distance (substitution costs 2).
// fuzzy_ratio("", "") == 100 by convention.
double fuzzy_ratio(std::string_view a, std::string_view b);
std::size_t indel_distance(std::string_view a, std::string_view b);

// Applies suffix rules / irregular table to one casefolded token.
std::string lemmatize_token(const std::string& token, const GroundingConfig& cfg);

std::optional<MatchResult> stage1_match(const extraction::EavTriple& triple,
                                        const corpus::ClinicalReport& report,
                                        const GroundingConfig& cfg);
std::optional<MatchResult> stage2_match(const extraction::EavTriple& triple,
                                        const corpus::ClinicalReport& report,
                                        const GroundingConfig& cfg);
std::optional<MatchResult> stage3_match(const extraction::EavTriple& triple,
                                        const corpus::ClinicalReport& report,
                                        const GroundingConfig& cfg);

struct GroundingOutcome {
  std::vector<MatchResult> results;  // one per input triple, same order
  GroundingReport report;
};

// Runs stages 1..max_stage in order; first success wins.
GroundingOutcome ground_triples(const std::vector<extraction::EavTriple>& triples,
                                const corpus::ClinicalReport& report,
                                const GroundingConfig& cfg, int max_stage = 3);

// Stage artifact persistence.
std::string to_json(const GroundingOutcome& outcome);
GroundingReport report_from_json(const std::string& json_text);
// Per-triple statuses, aligned with the extraction artifact's order.
std::vector<MatchStatus> statuses_from_json(const std::string& json_text);

}  // namespace kgf::grounding
