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

#include <array>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "kgf/agents.hpp"
#include "kgf/corpus.hpp"
#include "kgf/extraction.hpp"

namespace kgf::relations {

enum class RelationKind { EE, EA, AA };

std::string to_string(RelationKind k);

struct Scores {
  std::optional<double> J;   // judge plausibility
  std::optional<double> xi;  // contradiction rate
  std::optional<double> C;   // self-consistency
  std::optional<double> R;   // evidence alignment
  std::optional<double> T;   // composite trust
};

struct RelationTriple {
  std::string head;
  std::string predicate;
  std::string tail;
  RelationKind kind = RelationKind::EA;
  std::string source_patient;
  std::string generator_id;
  Scores scores;
  bool head_anchored = true;
  bool tail_anchored = true;
};

enum class Verdict { Consistent, Contradictory, Unclear };

Verdict verdict_from_string(std::string_view s);

struct PerturbationSet {
  RelationTriple original;
  std::vector<std::pair<RelationTriple, Verdict>> variants;
};

struct TrustScore {
  double R = 0.0;
  double C = 0.0;
  double J = 0.0;
  double T = 0.0;
  std::array<double, 3> weights{0.4, 0.3, 0.3};
};

// Predicate synonym groups shared by canonical equality and redundancy
// (confirms/verifies, indicates/suggests map to one canonical form).
std::string canonical_predicate(const std::string& predicate);
std::string canonical_key(const RelationTriple& t);
// Casefolded "head predicate tail" with the canonical predicate.
std::string verbalize_canonical(const RelationTriple& t);
std::string verbalize(const RelationTriple& t);

// Endpoint class given the known entity/attribute sets (casefolded
// lookups). Unknown endpoints default to the attribute class.
RelationKind classify_kind(const std::string& head, const std::string& tail,
                           const std::set<std::string>& known_entities,
                           const std::set<std::string>& known_attributes);

// Parses `head | predicate | tail` lines; normalizes endpoints against the
// EAV-known entities/attributes (case-insensitive exact, then fuzzy at
// tau_fuzzy); unmatched endpoints keep their raw string and are tagged
// unanchored. A non-empty response with no parseable lines is an error.
std::vector<RelationTriple> parse_relation_response(
    const std::string& response_text, const std::string& patient_id,
    const std::string& generator_id,
    const std::vector<extraction::EavTriple>& eavs, double tau_fuzzy = 90.0);

std::vector<RelationTriple> generate_candidates(
    const corpus::ClinicalReport& report,
    const std::vector<extraction::EavTriple>& eavs,
    agents::CompletionProvider& generator, double tau_fuzzy = 90.0,
    const std::string& template_id = "relate",
    agents::AgentRole role = agents::AgentRole::Extractor);

// Renders the judge prompt and parses a single numeric score, clamped to
// [0,1]. A non-numeric response throws ContentError.
double judge(const RelationTriple& triple, const std::string& context,
             agents::CompletionProvider& judge_provider);
// Parse-only entry point for the judge response body.
double parse_judge_score(const std::string& response_text);

// Renders n adversary prompts and collects (variant, verdict) pairs.
PerturbationSet perturb(const RelationTriple& triple, const std::string& context,
                        agents::CompletionProvider& adversary, int n_variants);

// |Contradictory| / |variants|; Unclear counts as non-contradictory.
double contradiction_rate(const PerturbationSet& pset);

// Keeps triples with J > delta_j and xi <= epsilon; unscored excluded.
std::vector<RelationTriple> filter_trusted(
    const std::vector<RelationTriple>& triples, double delta_j, double epsilon);

// Membership fraction across variant sets under canonical equality.
double self_consistency(const RelationTriple& triple,
                        const std::vector<std::vector<RelationTriple>>& sets);

// Max over sentences of stopword-free token-overlap F1 between the
// triple's verbalization and the sentence.
double evidence_alignment(const RelationTriple& triple,
                          const corpus::ClinicalReport& report);

// Agent-scored override: asks the provider for a per-sentence entailment
// score in [0,1] and takes the max. Selected by the entailment_via_agent
// config switch; the token-overlap form stays the offline default.
double evidence_alignment_entail(const RelationTriple& triple,
                                 const corpus::ClinicalReport& report,
                                 agents::CompletionProvider& scorer);

// T = l1*R + l2*C + l3*J; weights must be non-negative and sum to 1±1e-9.
TrustScore composite_trust(double R, double C, double J,
                           const std::array<double, 3>& lambda);
// Missing components renormalize the remaining weights; all-missing errors.
double composite_trust_partial(std::optional<double> R, std::optional<double> C,
                               std::optional<double> J,
                               const std::array<double, 3>& lambda);

struct ConsensusResult {
  std::vector<RelationTriple> accepted;  // in >= 2 model sets
  std::vector<RelationTriple> flagged;   // single-model
};

// Mappability callback decides which near-duplicate representative wins
// ("ontology-compliant alternatives first").
ConsensusResult consensus_accept(
    const std::map<std::string, std::vector<RelationTriple>>& per_model_sets,
    const std::function<bool(const std::string&)>& ontology_mappable);

struct RedundancyCluster {
  std::vector<std::size_t> member_indices;  // into the input list
  std::size_t representative = 0;           // highest T, ties lexicographic
};

// Single-linkage clusters over pairs with cosine(embedding of canonical
// verbalization) > gamma_red. Clusters partition the input.
std::vector<RedundancyCluster> redundancy_pairs(
    const std::vector<RelationTriple>& triples,
    agents::EmbeddingProvider& embedder, double gamma_red);

struct GapCandidate {
  std::vector<std::string> terms;  // similar endpoint terms lacking any edge
};

// Reporting-only: endpoint-term clusters (same embedding + threshold) whose
// members share no relation edge.
std::vector<GapCandidate> suggest_gaps(const std::vector<RelationTriple>& triples,
                                       agents::EmbeddingProvider& embedder,
                                       double gamma_red);

// Quarantine reason codes: LOW_J, HIGH_XI, SINGLE_MODEL, REDUNDANT.
struct QuarantineRecord {
  RelationTriple triple;
  std::string reason;
};

std::string relations_to_json(const std::vector<RelationTriple>& triples);
std::vector<RelationTriple> relations_from_json(const std::string& json_text);
std::string quarantine_to_json(const std::vector<QuarantineRecord>& records);

}  // namespace kgf::relations
