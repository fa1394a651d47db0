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

#include "kgf/ontology.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"
#include "kgf/errors.hpp"
#include "kgf/grounding.hpp"
#include "kgf/text.hpp"

namespace kgf::ontology {

std::string to_string(Vocabulary v) {
  switch (v) {
    case Vocabulary::SNOMED: return "SNOMED";
    case Vocabulary::LOINC: return "LOINC";
    case Vocabulary::RXNORM: return "RXNORM";
    case Vocabulary::ICD: return "ICD";
    case Vocabulary::GO: return "GO";
  }
  return "SNOMED";
}

std::optional<Vocabulary> vocabulary_from_string(std::string_view s) {
  const std::string n = text::casefold(text::trim(s));
  if (n == "snomed" || n == "snomed ct" || n == "snomedct") return Vocabulary::SNOMED;
  if (n == "loinc") return Vocabulary::LOINC;
  if (n == "rxnorm") return Vocabulary::RXNORM;
  if (n == "icd" || n == "icd-10" || n == "icd10") return Vocabulary::ICD;
  if (n == "go") return Vocabulary::GO;
  return std::nullopt;
}

int vocabulary_priority(Vocabulary v) {
  switch (v) {
    case Vocabulary::SNOMED: return 0;
    case Vocabulary::LOINC: return 1;
    case Vocabulary::RXNORM: return 2;
    case Vocabulary::ICD: return 3;
    case Vocabulary::GO: return 4;
  }
  return 5;
}

UriPolicy UriPolicy::defaults() {
  UriPolicy policy;
  policy.bases = {
      {Vocabulary::SNOMED, "http://snomed.info/id/"},
      {Vocabulary::LOINC, "https://loinc.org/"},
      {Vocabulary::RXNORM, "http://purl.bioontology.org/ontology/RXNORM/"},
      {Vocabulary::ICD, "http://hl7.org/fhir/sid/icd-10/"},
      {Vocabulary::GO, "http://purl.obolibrary.org/obo/GO_"},
  };
  return policy;
}

std::string mint_uri(Vocabulary vocabulary, const std::string& code,
                     const UriPolicy& policy) {
  auto it = policy.bases.find(vocabulary);
  if (it == policy.bases.end()) {
    throw ConfigError("no URI base configured for vocabulary " +
                      to_string(vocabulary));
  }
  return it->second + code;
}

VocabLoadResult load_vocab(const std::string& path, const UriPolicy& policy) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open vocabulary file: " + path);

  VocabLoadResult result;
  std::map<std::pair<Vocabulary, std::string>, std::size_t> index;
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view v = text::trim(line);
    if (v.empty() || v[0] == '#') continue;
    const auto cols = text::split(v, '\t');
    if (cols.size() < 3) {
      result.warnings.push_back("row " + std::to_string(lineno) +
                                " skipped: expected >=3 tab-separated columns");
      continue;
    }
    const auto vocab = vocabulary_from_string(cols[0]);
    if (!vocab) {
      result.warnings.push_back("row " + std::to_string(lineno) +
                                " skipped: unknown vocabulary " + cols[0]);
      continue;
    }
    const std::string code(text::trim(cols[1]));
    const std::string label(text::trim(cols[2]));
    if (code.empty() || label.empty()) {
      result.warnings.push_back("row " + std::to_string(lineno) +
                                " skipped: empty code or label");
      continue;
    }
    OntologyTerm term;
    term.vocabulary = *vocab;
    term.code = code;
    term.label = label;
    if (cols.size() >= 4) {
      for (const std::string& s : text::split(cols[3], '|')) {
        std::string_view syn = text::trim(s);
        if (!syn.empty()) term.synonyms.emplace_back(syn);
      }
    }
    term.uri = mint_uri(*vocab, code, policy);

    const auto key = std::make_pair(*vocab, code);
    auto it = index.find(key);
    if (it != index.end()) {
      result.warnings.push_back("duplicate (" + to_string(*vocab) + ", " + code +
                                ") at row " + std::to_string(lineno) +
                                ": last wins");
      result.terms[it->second] = std::move(term);
    } else {
      index[key] = result.terms.size();
      result.terms.push_back(std::move(term));
    }
  }
  return result;
}

double lexical_similarity(const std::string& raw, const OntologyTerm& term) {
  const std::string raw_cf = text::casefold(raw);
  double best = grounding::fuzzy_ratio(raw_cf, text::casefold(term.label));
  for (const std::string& syn : term.synonyms) {
    best = std::max(best, grounding::fuzzy_ratio(raw_cf, text::casefold(syn)));
  }
  return best / 100.0;
}

std::optional<ConceptMapping> map_concept(const std::string& raw,
                                          const std::vector<OntologyTerm>& vocabs,
                                          double alpha,
                                          agents::EmbeddingProvider& embedder,
                                          double floor) {
  if (vocabs.empty()) throw DomainError("map_concept: empty vocabulary set");
  if (alpha < 0.0 || alpha > 1.0) {
    throw DomainError("map_concept: alpha must lie in [0,1]");
  }
  const double beta = 1.0 - alpha;

  std::optional<agents::EmbeddingVector> raw_vec;
  if (beta > 0.0) raw_vec = embedder.embed(raw);

  std::optional<ConceptMapping> best;
  for (const OntologyTerm& term : vocabs) {
    ConceptMapping candidate;
    candidate.raw_term = raw;
    candidate.term = term;
    candidate.sim_lex = lexical_similarity(raw, term);
    candidate.sim_sem =
        beta > 0.0
            ? std::clamp(agents::cosine(*raw_vec, embedder.embed(term.label)),
                         0.0, 1.0)
            : 0.0;
    candidate.score = alpha * candidate.sim_lex + beta * candidate.sim_sem;

    if (!best) {
      best = candidate;
      continue;
    }
    if (candidate.score > best->score) {
      best = candidate;
    } else if (candidate.score == best->score) {
      const int pc = vocabulary_priority(candidate.term.vocabulary);
      const int pb = vocabulary_priority(best->term.vocabulary);
      if (pc < pb || (pc == pb && candidate.term.code < best->term.code)) {
        best = candidate;
      }
    }
  }
  if (!best || best->score < floor) return std::nullopt;
  return best;
}

namespace {

struct PrefixTable {
  std::map<std::string, std::string> prefixes;

  std::string resolve(std::string_view token, long lineno) const {
    if (token.size() >= 2 && token.front() == '<' && token.back() == '>') {
      return std::string(token.substr(1, token.size() - 2));
    }
    const std::size_t colon = token.find(':');
    if (colon != std::string_view::npos) {
      auto it = prefixes.find(std::string(token.substr(0, colon)));
      if (it != prefixes.end()) {
        return it->second + std::string(token.substr(colon + 1));
      }
    }
    throw ParseError("unresolvable IRI token: " + std::string(token), lineno);
  }
};

}  // namespace

TBox load_tbox(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open TBox file: " + path);

  TBox tbox;
  PrefixTable prefixes;
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view v = text::trim(line);
    if (v.empty() || v[0] == '#') continue;
    std::istringstream ss{std::string(v)};
    std::string keyword;
    ss >> keyword;
    std::vector<std::string> args;
    std::string arg;
    while (ss >> arg) args.push_back(arg);

    if (keyword == "Prefix" && args.size() == 2) {
      std::string name = args[0];
      if (!name.empty() && name.back() == ':') name.pop_back();
      prefixes.prefixes[name] = prefixes.resolve(args[1], lineno);
    } else if (keyword == "Class" && args.size() == 1) {
      tbox.decls.push_back({SchemaDeclKind::ClassDecl,
                            prefixes.resolve(args[0], lineno), "", "", ""});
    } else if (keyword == "ObjectProperty" && args.size() == 1) {
      tbox.decls.push_back({SchemaDeclKind::ObjectProperty,
                            prefixes.resolve(args[0], lineno), "", "", ""});
    } else if (keyword == "SubClassOf" && args.size() == 2) {
      tbox.decls.push_back({SchemaDeclKind::SubClassOf,
                            prefixes.resolve(args[0], lineno),
                            prefixes.resolve(args[1], lineno), "", ""});
    } else if (keyword == "EquivalentTo" && args.size() == 2) {
      tbox.equivalences.emplace_back(prefixes.resolve(args[0], lineno),
                                     prefixes.resolve(args[1], lineno));
    } else if (keyword == "DomainRange" && args.size() == 3) {
      tbox.decls.push_back({SchemaDeclKind::DomainRange,
                            prefixes.resolve(args[0], lineno), "",
                            prefixes.resolve(args[1], lineno),
                            prefixes.resolve(args[2], lineno)});
    } else if (keyword == "Restriction" && args.size() == 4) {
      tbox.restrictions.push_back({prefixes.resolve(args[0], lineno),
                                   prefixes.resolve(args[1], lineno),
                                   prefixes.resolve(args[2], lineno),
                                   prefixes.resolve(args[3], lineno)});
    } else {
      throw ParseError("unrecognized TBox axiom: " + std::string(v), lineno);
    }
  }
  return tbox;
}

namespace {

// Depth-first cycle check over SubClassOf edges; any cycle is an error.
void check_subclass_cycles(const std::vector<SchemaDecl>& decls) {
  std::map<std::string, std::set<std::string>> edges;
  for (const SchemaDecl& d : decls) {
    if (d.kind == SchemaDeclKind::SubClassOf) {
      edges[d.subject].insert(d.object);
    }
  }
  std::map<std::string, int> color;  // 0 white, 1 gray, 2 black
  std::vector<std::string> stack;

  std::function<void(const std::string&)> visit = [&](const std::string& node) {
    color[node] = 1;
    stack.push_back(node);
    for (const std::string& next : edges[node]) {
      if (color[next] == 1) {
        auto it = std::find(stack.begin(), stack.end(), next);
        std::vector<std::string> cycle(it, stack.end());
        cycle.push_back(next);
        throw DomainError("SubClassOf cycle: " + text::join(cycle, " -> "));
      }
      if (color[next] == 0) visit(next);
    }
    stack.pop_back();
    color[node] = 2;
  };
  for (const auto& [node, _] : edges) {
    if (color[node] == 0) visit(node);
  }
}

}  // namespace

std::vector<SchemaDecl> build_schema(
    const std::vector<ConceptMapping>& mappings,
    const std::vector<PredicateObservation>& observations, const TBox& tbox) {
  std::vector<SchemaDecl> schema;
  std::set<std::string> declared_classes;

  for (const ConceptMapping& m : mappings) {
    const Vocabulary v = m.term.vocabulary;
    if (v != Vocabulary::SNOMED && v != Vocabulary::GO && v != Vocabulary::ICD) {
      continue;
    }
    if (declared_classes.insert(m.term.uri).second) {
      schema.push_back({SchemaDeclKind::ClassDecl, m.term.uri, "", "", ""});
    }
  }

  // Modal head/tail class pair per predicate.
  std::map<std::string, std::map<std::pair<std::string, std::string>, std::size_t>>
      pair_counts;
  for (const PredicateObservation& obs : observations) {
    ++pair_counts[obs.predicate_iri][{obs.head_class_iri, obs.tail_class_iri}];
  }
  for (const auto& [predicate, counts] : pair_counts) {
    schema.push_back({SchemaDeclKind::ObjectProperty, predicate, "", "", ""});
    std::pair<std::string, std::string> modal;
    std::size_t best = 0;
    for (const auto& [pair, count] : counts) {
      if (count > best || (count == best && pair < modal)) {
        best = count;
        modal = pair;
      }
    }
    schema.push_back(
        {SchemaDeclKind::DomainRange, predicate, "", modal.first, modal.second});
  }

  for (const SchemaDecl& d : tbox.decls) schema.push_back(d);
  check_subclass_cycles(schema);
  return schema;
}

double unmapped_rate(std::size_t attempted, std::size_t unmapped) {
  if (unmapped > attempted) {
    throw DomainError("unmapped_rate: unmapped exceeds attempted");
  }
  if (attempted == 0) return 0.0;
  return static_cast<double>(unmapped) / static_cast<double>(attempted);
}

std::string mappings_to_json(const std::vector<ConceptMapping>& mappings,
                             std::size_t attempted, std::size_t unmapped) {
  nlohmann::json doc;
  doc["attempted"] = attempted;
  doc["unmapped"] = unmapped;
  doc["unmapped_rate"] = unmapped_rate(attempted, unmapped);
  nlohmann::json arr = nlohmann::json::array();
  for (const ConceptMapping& m : mappings) {
    arr.push_back({{"raw", m.raw_term},
                   {"vocab", to_string(m.term.vocabulary)},
                   {"code", m.term.code},
                   {"label", m.term.label},
                   {"uri", m.term.uri},
                   {"sim_lex", m.sim_lex},
                   {"sim_sem", m.sim_sem},
                   {"score", m.score}});
  }
  doc["mappings"] = std::move(arr);
  return doc.dump(2) + "\n";
}

}  // namespace kgf::ontology
