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

#include "kgf/relations.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <tuple>

#include "json.hpp"
#include "kgf/errors.hpp"
#include "kgf/grounding.hpp"
#include "kgf/prompts.hpp"
#include "kgf/text.hpp"

namespace kgf::relations {

using nlohmann::json;

std::string to_string(RelationKind k) {
  switch (k) {
    case RelationKind::EE: return "EE";
    case RelationKind::EA: return "EA";
    case RelationKind::AA: return "AA";
  }
  return "EA";
}

Verdict verdict_from_string(std::string_view s) {
  const std::string v = text::casefold(text::trim(s));
  if (v == "consistent") return Verdict::Consistent;
  if (v == "contradictory") return Verdict::Contradictory;
  // Anything else stays Unclear, keeping xi conservative.
  return Verdict::Unclear;
}

namespace {

const std::map<std::string, std::string>& predicate_synonym_table() {
  // Each group maps to its lexicographically smallest member.
  static const std::map<std::string, std::string> table = {
      {"confirms", "confirms"},   {"verifies", "confirms"},
      {"indicates", "indicates"}, {"suggests", "indicates"},
      {"treats", "treats"},       {"manages", "treats"},
      {"initiated", "initiated"}, {"started", "initiated"},
  };
  return table;
}

const std::set<std::string>& stopwords() {
  static const std::set<std::string> words = {
      "a",    "an",  "the",  "is",  "are", "was",  "were", "be",   "been",
      "of",   "in",  "on",   "to",  "for", "with", "and",  "or",   "has",
      "have", "had", "by",   "at",  "as",  "it",   "this", "that", "from"};
  return words;
}

}  // namespace

std::string canonical_predicate(const std::string& predicate) {
  const std::string p = text::casefold(text::trim(predicate));
  auto it = predicate_synonym_table().find(p);
  return it == predicate_synonym_table().end() ? p : it->second;
}

std::string canonical_key(const RelationTriple& t) {
  return text::casefold(text::trim(t.head)) + "\x1f" +
         canonical_predicate(t.predicate) + "\x1f" +
         text::casefold(text::trim(t.tail));
}

std::string verbalize(const RelationTriple& t) {
  return t.head + " " + t.predicate + " " + t.tail;
}

std::string verbalize_canonical(const RelationTriple& t) {
  return text::casefold(text::trim(t.head)) + " " +
         canonical_predicate(t.predicate) + " " +
         text::casefold(text::trim(t.tail));
}

RelationKind classify_kind(const std::string& head, const std::string& tail,
                           const std::set<std::string>& known_entities,
                           const std::set<std::string>& known_attributes) {
  auto endpoint_is_entity = [&](const std::string& term) {
    const std::string cf = text::casefold(text::trim(term));
    if (known_entities.count(cf) > 0) return true;
    // Unknown endpoints default to the attribute class.
    (void)known_attributes;
    return false;
  };
  const bool head_entity = endpoint_is_entity(head);
  const bool tail_entity = endpoint_is_entity(tail);
  if (head_entity && tail_entity) return RelationKind::EE;
  if (!head_entity && !tail_entity) return RelationKind::AA;
  return RelationKind::EA;
}

namespace {

struct EndpointIndex {
  std::set<std::string> entities_cf;
  std::set<std::string> attributes_cf;
  std::vector<std::string> all_terms;  // original casing, deduped

  explicit EndpointIndex(const std::vector<extraction::EavTriple>& eavs) {
    std::set<std::string> seen;
    for (const auto& eav : eavs) {
      entities_cf.insert(text::casefold(text::trim(eav.entity)));
      attributes_cf.insert(text::casefold(text::trim(eav.attribute)));
      for (const std::string& term : {eav.entity, eav.attribute}) {
        if (seen.insert(text::casefold(text::trim(term))).second) {
          all_terms.push_back(std::string(text::trim(term)));
        }
      }
    }
    std::sort(all_terms.begin(), all_terms.end());
  }

  // Case-insensitive exact, then best fuzzy >= tau; nullopt when unmatched.
  std::optional<std::string> normalize(const std::string& raw,
                                       double tau_fuzzy) const {
    const std::string cf = text::casefold(text::trim(raw));
    for (const std::string& term : all_terms) {
      if (text::casefold(term) == cf) return term;
    }
    double best = -1.0;
    std::optional<std::string> best_term;
    for (const std::string& term : all_terms) {
      const double r = grounding::fuzzy_ratio(cf, text::casefold(term));
      if (r > best) {
        best = r;
        best_term = term;
      }
    }
    if (best >= tau_fuzzy) return best_term;
    return std::nullopt;
  }
};

}  // namespace

std::vector<RelationTriple> parse_relation_response(
    const std::string& response_text, const std::string& patient_id,
    const std::string& generator_id,
    const std::vector<extraction::EavTriple>& eavs, double tau_fuzzy) {
  const EndpointIndex index(eavs);
  std::vector<RelationTriple> out;
  bool saw_candidate = false;
  for (const std::string& raw : text::split(response_text, '\n')) {
    std::string_view line = text::trim(raw);
    if (line.empty() || line[0] == '#') continue;
    saw_candidate = true;
    const auto parts = text::split(line, '|');
    if (parts.size() != 3) continue;
    RelationTriple t;
    t.head = std::string(text::trim(parts[0]));
    t.predicate = std::string(text::trim(parts[1]));
    t.tail = std::string(text::trim(parts[2]));
    if (t.head.empty() || t.predicate.empty() || t.tail.empty()) continue;
    if (text::casefold(t.head) == text::casefold(t.tail)) continue;
    t.source_patient = patient_id;
    t.generator_id = generator_id;

    if (auto head = index.normalize(t.head, tau_fuzzy)) {
      t.head = *head;
    } else {
      t.head_anchored = false;
    }
    if (auto tail = index.normalize(t.tail, tau_fuzzy)) {
      t.tail = *tail;
    } else {
      t.tail_anchored = false;
    }
    t.kind = classify_kind(t.head, t.tail, index.entities_cf, index.attributes_cf);
    out.push_back(std::move(t));
  }
  if (saw_candidate && out.empty()) {
    throw ContentError("wholly unparseable relation response: " + response_text);
  }
  return out;
}

std::vector<RelationTriple> generate_candidates(
    const corpus::ClinicalReport& report,
    const std::vector<extraction::EavTriple>& eavs,
    agents::CompletionProvider& generator, double tau_fuzzy,
    const std::string& template_id, agents::AgentRole role) {
  std::set<std::string> entities;
  std::set<std::string> attributes;
  for (const auto& eav : eavs) {
    entities.insert(eav.entity);
    attributes.insert(eav.attribute);
  }
  auto joined = [](const std::set<std::string>& s) {
    std::vector<std::string> v(s.begin(), s.end());
    return text::join(v, ", ");
  };

  agents::AgentRequest request;
  request.role = role;
  request.prompt = prompts::render_prompt(
      template_id, {{"doc", report.narrative},
                    {"entities", joined(entities)},
                    {"attributes", joined(attributes)}});
  const agents::AgentResponse response = generator.complete(request);
  return parse_relation_response(response.text, report.patient_id,
                                 generator.id(), eavs, tau_fuzzy);
}

double parse_judge_score(const std::string& response_text) {
  const std::string body(text::trim(response_text));
  if (body.empty()) throw ContentError("empty judge response");
  char* end = nullptr;
  const double value = std::strtod(body.c_str(), &end);
  if (end == body.c_str() || text::trim(std::string_view(end)).size() > 0) {
    throw ContentError("non-numeric judge response: " + body);
  }
  return std::clamp(value, 0.0, 1.0);
}

double judge(const RelationTriple& triple, const std::string& context,
             agents::CompletionProvider& judge_provider) {
  if (text::trim(context).empty()) {
    throw DomainError("judge: empty context");
  }
  agents::AgentRequest request;
  request.role = agents::AgentRole::Judge;
  request.prompt = prompts::render_prompt("judge", {{"head", triple.head},
                                                    {"predicate", triple.predicate},
                                                    {"tail", triple.tail},
                                                    {"context", context}});
  return parse_judge_score(judge_provider.complete(request).text);
}

PerturbationSet perturb(const RelationTriple& triple, const std::string& context,
                        agents::CompletionProvider& adversary, int n_variants) {
  if (n_variants < 1) throw DomainError("perturb: need at least one variant");
  PerturbationSet pset;
  pset.original = triple;
  for (int i = 1; i <= n_variants; ++i) {
    agents::AgentRequest request;
    request.role = agents::AgentRole::Adversary;
    request.temperature = 0.7;
    request.prompt = prompts::render_prompt(
        "adversary", {{"head", triple.head},
                      {"predicate", triple.predicate},
                      {"tail", triple.tail},
                      {"context", context},
                      {"index", std::to_string(i)}});
    const agents::AgentResponse response = adversary.complete(request);

    RelationTriple variant = triple;
    Verdict verdict = Verdict::Unclear;
    for (const std::string& line : text::split(response.text, '\n')) {
      std::string_view v = text::trim(line);
      if (text::starts_with(v, "variant:")) {
        const auto parts = text::split(v.substr(8), '|');
        if (parts.size() == 3) {
          variant.head = std::string(text::trim(parts[0]));
          variant.predicate = std::string(text::trim(parts[1]));
          variant.tail = std::string(text::trim(parts[2]));
        }
      } else if (text::starts_with(v, "verdict:")) {
        verdict = verdict_from_string(v.substr(8));
      }
    }
    pset.variants.emplace_back(std::move(variant), verdict);
  }
  return pset;
}

double contradiction_rate(const PerturbationSet& pset) {
  if (pset.variants.empty()) {
    throw DomainError("contradiction_rate: no variants");
  }
  std::size_t contradictory = 0;
  for (const auto& [_, verdict] : pset.variants) {
    if (verdict == Verdict::Contradictory) ++contradictory;
  }
  return static_cast<double>(contradictory) /
         static_cast<double>(pset.variants.size());
}

std::vector<RelationTriple> filter_trusted(
    const std::vector<RelationTriple>& triples, double delta_j, double epsilon) {
  if (delta_j < 0.0 || delta_j > 1.0 || epsilon < 0.0 || epsilon > 1.0) {
    throw DomainError("filter_trusted: thresholds must lie in [0,1]");
  }
  std::vector<RelationTriple> out;
  for (const RelationTriple& t : triples) {
    if (!t.scores.J || !t.scores.xi) continue;  // unscored excluded
    if (*t.scores.J > delta_j && *t.scores.xi <= epsilon) out.push_back(t);
  }
  return out;
}

double self_consistency(const RelationTriple& triple,
                        const std::vector<std::vector<RelationTriple>>& sets) {
  if (sets.empty()) throw DomainError("self_consistency: no variant sets");
  const std::string key = canonical_key(triple);
  std::size_t hits = 0;
  for (const auto& set : sets) {
    for (const RelationTriple& t : set) {
      if (canonical_key(t) == key) {
        ++hits;
        break;
      }
    }
  }
  return static_cast<double>(hits) / static_cast<double>(sets.size());
}

namespace {

std::set<std::string> content_tokens(std::string_view s) {
  std::set<std::string> out;
  for (const std::string& t : text::tokenize_casefold(s)) {
    if (stopwords().count(t) == 0) out.insert(t);
  }
  return out;
}

}  // namespace

double evidence_alignment(const RelationTriple& triple,
                          const corpus::ClinicalReport& report) {
  const std::set<std::string> vt = content_tokens(verbalize(triple));
  if (vt.empty()) return 0.0;
  double best = 0.0;
  for (const corpus::Sentence& sentence : report.sentences) {
    const std::set<std::string> st = content_tokens(sentence.text);
    if (st.empty()) continue;
    std::size_t inter = 0;
    for (const std::string& t : vt) inter += st.count(t);
    const double f1 = 2.0 * static_cast<double>(inter) /
                      static_cast<double>(vt.size() + st.size());
    best = std::max(best, f1);
  }
  return best;
}

double evidence_alignment_entail(const RelationTriple& triple,
                                 const corpus::ClinicalReport& report,
                                 agents::CompletionProvider& scorer) {
  double best = 0.0;
  for (const corpus::Sentence& sentence : report.sentences) {
    agents::AgentRequest request;
    request.role = agents::AgentRole::Judge;
    request.prompt = prompts::render_prompt(
        "entail", {{"head", triple.head},
                   {"predicate", triple.predicate},
                   {"tail", triple.tail},
                   {"sentence", sentence.text}});
    best = std::max(best, parse_judge_score(scorer.complete(request).text));
  }
  return best;
}

namespace {

void check_weights(const std::array<double, 3>& lambda) {
  for (double w : lambda) {
    if (w < 0.0) throw DomainError("composite_trust: negative weight");
  }
  const double sum = lambda[0] + lambda[1] + lambda[2];
  if (std::abs(sum - 1.0) > 1e-9) {
    throw DomainError("composite_trust: weights must sum to 1");
  }
}

}  // namespace

TrustScore composite_trust(double R, double C, double J,
                           const std::array<double, 3>& lambda) {
  check_weights(lambda);
  TrustScore score;
  score.R = R;
  score.C = C;
  score.J = J;
  score.weights = lambda;
  score.T = lambda[0] * R + lambda[1] * C + lambda[2] * J;
  return score;
}

double composite_trust_partial(std::optional<double> R, std::optional<double> C,
                               std::optional<double> J,
                               const std::array<double, 3>& lambda) {
  check_weights(lambda);
  const std::array<std::optional<double>, 3> components = {R, C, J};
  double weight_sum = 0.0;
  for (std::size_t i = 0; i < 3; ++i) {
    if (components[i]) weight_sum += lambda[i];
  }
  if (weight_sum <= 0.0) {
    throw DomainError("composite_trust: no scored components");
  }
  double t = 0.0;
  for (std::size_t i = 0; i < 3; ++i) {
    if (components[i]) t += (lambda[i] / weight_sum) * *components[i];
  }
  return t;
}

ConsensusResult consensus_accept(
    const std::map<std::string, std::vector<RelationTriple>>& per_model_sets,
    const std::function<bool(const std::string&)>& ontology_mappable) {
  if (per_model_sets.size() < 2) {
    throw DomainError("consensus_accept: need at least two model sets");
  }
  struct Group {
    std::set<std::string> models;
    std::vector<RelationTriple> variants;
  };
  std::map<std::string, Group> groups;
  for (const auto& [model, triples] : per_model_sets) {
    for (const RelationTriple& t : triples) {
      Group& g = groups[canonical_key(t)];
      g.models.insert(model);
      g.variants.push_back(t);
    }
  }

  auto representative = [&](const Group& g) {
    const RelationTriple* best = nullptr;
    int best_mappable = -1;
    for (const RelationTriple& t : g.variants) {
      int mappable = 0;
      if (ontology_mappable) {
        mappable = (ontology_mappable(t.head) ? 1 : 0) +
                   (ontology_mappable(t.tail) ? 1 : 0);
      }
      const auto tuple_of = [](const RelationTriple& x) {
        return std::tie(x.head, x.predicate, x.tail);
      };
      if (!best || mappable > best_mappable ||
          (mappable == best_mappable && tuple_of(t) < tuple_of(*best))) {
        best = &t;
        best_mappable = mappable;
      }
    }
    return *best;
  };

  ConsensusResult result;
  for (const auto& [key, group] : groups) {
    if (group.models.size() >= 2) {
      result.accepted.push_back(representative(group));
    } else {
      result.flagged.push_back(representative(group));
    }
  }
  return result;
}

std::vector<RedundancyCluster> redundancy_pairs(
    const std::vector<RelationTriple>& triples,
    agents::EmbeddingProvider& embedder, double gamma_red) {
  if (gamma_red <= 0.0 || gamma_red > 1.0) {
    throw DomainError("redundancy_pairs: gamma_red must lie in (0,1]");
  }
  const std::size_t n = triples.size();
  std::vector<agents::EmbeddingVector> vecs;
  vecs.reserve(n);
  for (const RelationTriple& t : triples) {
    vecs.push_back(embedder.embed(verbalize_canonical(t)));
  }

  // Union-find single linkage.
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  std::function<std::size_t(std::size_t)> find = [&](std::size_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (agents::cosine(vecs[i], vecs[j]) > gamma_red) {
        parent[find(j)] = find(i);
      }
    }
  }

  std::map<std::size_t, RedundancyCluster> clusters;  // keyed by min index
  for (std::size_t i = 0; i < n; ++i) {
    clusters[find(i)].member_indices.push_back(i);
  }
  std::vector<RedundancyCluster> out;
  for (auto& [_, cluster] : clusters) {
    std::sort(cluster.member_indices.begin(), cluster.member_indices.end());
    // Representative: highest T, ties by lexicographic (head, pred, tail).
    std::size_t best = cluster.member_indices[0];
    for (std::size_t idx : cluster.member_indices) {
      const double t_best = triples[best].scores.T.value_or(-1.0);
      const double t_cur = triples[idx].scores.T.value_or(-1.0);
      const auto tuple_of = [](const RelationTriple& x) {
        return std::tie(x.head, x.predicate, x.tail);
      };
      if (t_cur > t_best ||
          (t_cur == t_best && tuple_of(triples[idx]) < tuple_of(triples[best]))) {
        best = idx;
      }
    }
    cluster.representative = best;
    out.push_back(cluster);
  }
  std::sort(out.begin(), out.end(),
            [](const RedundancyCluster& a, const RedundancyCluster& b) {
              return a.member_indices.front() < b.member_indices.front();
            });
  return out;
}

std::vector<GapCandidate> suggest_gaps(const std::vector<RelationTriple>& triples,
                                       agents::EmbeddingProvider& embedder,
                                       double gamma_red) {
  // Cluster endpoint terms; clusters with >= 2 members and no connecting
  // edge become gap candidates.
  std::vector<std::string> terms;
  std::set<std::string> seen;
  for (const RelationTriple& t : triples) {
    for (const std::string& term : {t.head, t.tail}) {
      if (seen.insert(text::casefold(term)).second) terms.push_back(term);
    }
  }
  const std::size_t n = terms.size();
  if (n < 2) return {};
  std::vector<agents::EmbeddingVector> vecs;
  for (const std::string& term : terms) vecs.push_back(embedder.embed(term));

  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  std::function<std::size_t(std::size_t)> find = [&](std::size_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (agents::cosine(vecs[i], vecs[j]) > gamma_red) parent[find(j)] = find(i);
    }
  }
  std::map<std::size_t, std::vector<std::size_t>> clusters;
  for (std::size_t i = 0; i < n; ++i) clusters[find(i)].push_back(i);

  auto edge_between = [&](const std::string& a, const std::string& b) {
    const std::string acf = text::casefold(a);
    const std::string bcf = text::casefold(b);
    for (const RelationTriple& t : triples) {
      const std::string h = text::casefold(t.head);
      const std::string l = text::casefold(t.tail);
      if ((h == acf && l == bcf) || (h == bcf && l == acf)) return true;
    }
    return false;
  };

  std::vector<GapCandidate> out;
  for (const auto& [_, members] : clusters) {
    if (members.size() < 2) continue;
    bool connected = false;
    for (std::size_t i = 0; i < members.size() && !connected; ++i) {
      for (std::size_t j = i + 1; j < members.size() && !connected; ++j) {
        connected = edge_between(terms[members[i]], terms[members[j]]);
      }
    }
    if (!connected) {
      GapCandidate gap;
      for (std::size_t idx : members) gap.terms.push_back(terms[idx]);
      std::sort(gap.terms.begin(), gap.terms.end());
      out.push_back(std::move(gap));
    }
  }
  return out;
}

namespace {

json triple_to_json(const RelationTriple& t) {
  json rec;
  rec["head"] = t.head;
  rec["predicate"] = t.predicate;
  rec["tail"] = t.tail;
  rec["kind"] = to_string(t.kind);
  rec["patient_id"] = t.source_patient;
  rec["generator_id"] = t.generator_id;
  rec["head_anchored"] = t.head_anchored;
  rec["tail_anchored"] = t.tail_anchored;
  json scores = json::object();
  if (t.scores.J) scores["J"] = *t.scores.J;
  if (t.scores.xi) scores["xi"] = *t.scores.xi;
  if (t.scores.C) scores["C"] = *t.scores.C;
  if (t.scores.R) scores["R"] = *t.scores.R;
  if (t.scores.T) scores["T"] = *t.scores.T;
  rec["scores"] = std::move(scores);
  return rec;
}

RelationTriple triple_from_json(const json& rec) {
  RelationTriple t;
  t.head = rec.at("head").get<std::string>();
  t.predicate = rec.at("predicate").get<std::string>();
  t.tail = rec.at("tail").get<std::string>();
  const std::string kind = rec.value("kind", "EA");
  t.kind = kind == "EE"   ? RelationKind::EE
           : kind == "AA" ? RelationKind::AA
                          : RelationKind::EA;
  t.source_patient = rec.value("patient_id", "");
  t.generator_id = rec.value("generator_id", "");
  t.head_anchored = rec.value("head_anchored", true);
  t.tail_anchored = rec.value("tail_anchored", true);
  if (rec.contains("scores")) {
    const json& s = rec["scores"];
    if (s.contains("J")) t.scores.J = s["J"].get<double>();
    if (s.contains("xi")) t.scores.xi = s["xi"].get<double>();
    if (s.contains("C")) t.scores.C = s["C"].get<double>();
    if (s.contains("R")) t.scores.R = s["R"].get<double>();
    if (s.contains("T")) t.scores.T = s["T"].get<double>();
  }
  return t;
}

}  // namespace

std::string relations_to_json(const std::vector<RelationTriple>& triples) {
  json arr = json::array();
  for (const RelationTriple& t : triples) arr.push_back(triple_to_json(t));
  return arr.dump(2) + "\n";
}

std::vector<RelationTriple> relations_from_json(const std::string& json_text) {
  json arr;
  try {
    arr = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("bad relations artifact: ") + e.what());
  }
  std::vector<RelationTriple> out;
  for (const auto& rec : arr) out.push_back(triple_from_json(rec));
  return out;
}

std::string quarantine_to_json(const std::vector<QuarantineRecord>& records) {
  json arr = json::array();
  for (const QuarantineRecord& r : records) {
    json rec = triple_to_json(r.triple);
    rec["reason"] = r.reason;
    arr.push_back(std::move(rec));
  }
  return arr.dump(2) + "\n";
}

}  // namespace kgf::relations
