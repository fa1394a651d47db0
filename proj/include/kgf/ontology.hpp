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

#include "kgf/agents.hpp"
#include "kgf/extraction.hpp"

namespace kgf::ontology {

enum class Vocabulary { SNOMED, LOINC, RXNORM, ICD, GO };

std::string to_string(Vocabulary v);
std::optional<Vocabulary> vocabulary_from_string(std::string_view s);
// Tie-break priority: SNOMED > LOINC > RXNORM > ICD > GO.
int vocabulary_priority(Vocabulary v);

struct UriPolicy {
  std::map<Vocabulary, std::string> bases;
  std::string artifact_base = "http://example.org/kg#";

  static UriPolicy defaults();
};

// base(vocabulary) + code; injective per vocabulary. SNOMED mints exactly
// http://snomed.info/id/<code>.
std::string mint_uri(Vocabulary vocabulary, const std::string& code,
                     const UriPolicy& policy = UriPolicy::defaults());

struct OntologyTerm {
  Vocabulary vocabulary = Vocabulary::SNOMED;
  std::string code;
  std::string label;
  std::vector<std::string> synonyms;
  std::string uri;
};

struct VocabLoadResult {
  std::vector<OntologyTerm> terms;
  std::vector<std::string> warnings;
};

// Tab-separated rows: vocabulary, code, label, pipe-separated synonyms
// (synonyms column optional). Duplicate (vocabulary, code) -> last wins
// with a warning; malformed rows are skipped with a diagnostic.
VocabLoadResult load_vocab(const std::string& path,
                           const UriPolicy& policy = UriPolicy::defaults());

struct ConceptMapping {
  std::string raw_term;
  OntologyTerm term;
  double sim_lex = 0.0;
  double sim_sem = 0.0;
  double score = 0.0;  // alpha*sim_lex + (1-alpha)*sim_sem
};

// max over the term's label and synonyms of fuzzy_ratio(casefold)/100.
double lexical_similarity(const std::string& raw, const OntologyTerm& term);

// argmax of alpha*sim_lex + (1-alpha)*sim_sem; absent when the best score
// falls below `floor`. Ties break by vocabulary priority then code.
std::optional<ConceptMapping> map_concept(
    const std::string& raw, const std::vector<OntologyTerm>& vocabs,
    double alpha, agents::EmbeddingProvider& embedder, double floor = 0.55);

enum class SchemaDeclKind { ClassDecl, ObjectProperty, SubClassOf, DomainRange };

struct SchemaDecl {
  SchemaDeclKind kind = SchemaDeclKind::ClassDecl;
  std::string subject;  // class or property IRI
  std::string object;   // SubClassOf superclass
  std::string domain;   // DomainRange only
  std::string range;    // DomainRange only
};

// OWL restriction Class ⊓ ∃property.Filler ⊑ Super, as IRIs.
struct RestrictionAxiom {
  std::string on_class;
  std::string property;
  std::string filler;
  std::string superclass;
};

struct TBox {
  std::vector<SchemaDecl> decls;
  std::vector<RestrictionAxiom> restrictions;
  // A ≡ B pairs; treated as bidirectional subclass at closure time. Kept
  // apart from SubClassOf so declared cycles stay detectable.
  std::vector<std::pair<std::string, std::string>> equivalences;
};

// Axiom file: one per line. Forms:
//   Prefix <name>: <iri-base>
//   Class <iri>
//   ObjectProperty <iri>
//   SubClassOf <iri> <iri>
//   DomainRange <property> <domain> <range>
//   EquivalentTo <iri> <iri>
//   Restriction <class> <property> <filler> <superclass>
// IRIs are written <full> or prefix:local.
TBox load_tbox(const std::string& path);

// Endpoint of an observed relation instance, for domain/range inference.
struct PredicateObservation {
  std::string predicate_iri;
  std::string head_class_iri;
  std::string tail_class_iri;
};

// ClassDecl for every mapped SNOMED/GO/ICD term; ObjectProperty +
// DomainRange per observed predicate (modal head/tail class pair); merges
// the hand-authored TBox. Throws DomainError listing any SubClassOf cycle.
std::vector<SchemaDecl> build_schema(
    const std::vector<ConceptMapping>& mappings,
    const std::vector<PredicateObservation>& observations, const TBox& tbox);

double unmapped_rate(std::size_t attempted, std::size_t unmapped);

// Mapping-stage artifact persistence ({raw, vocab, code, score} records).
std::string mappings_to_json(const std::vector<ConceptMapping>& mappings,
                             std::size_t attempted, std::size_t unmapped);

}  // namespace kgf::ontology
