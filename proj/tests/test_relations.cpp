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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <random>

#include "doctest.h"
#include "kgf/agents.hpp"
#include "kgf/errors.hpp"
#include "kgf/relations.hpp"

using namespace kgf;
using namespace kgf::relations;

namespace {

extraction::EavTriple eav(const std::string& entity, const std::string& attr,
                          const std::string& value) {
  extraction::EavTriple t;
  t.entity = entity;
  t.attribute = attr;
  t.value = value;
  return t;
}

RelationTriple rel(const std::string& h, const std::string& p,
                   const std::string& t) {
  RelationTriple r;
  r.head = h;
  r.predicate = p;
  r.tail = t;
  return r;
}

std::vector<extraction::EavTriple> sample_eavs() {
  return {eav("Biopsy", "confirms", "TumorType"),
          eav("TumorType", "grade", "II"),
          eav("CT Scan", "visualizes", "mass"),
          eav("HER2 Status", "level", "overexpressed")};
}

corpus::ClinicalReport make_report(const std::string& narrative) {
  corpus::ClinicalReport r;
  r.patient_id = "pt";
  r.narrative = narrative;
  r.sentences = corpus::segment_sentences(narrative);
  return r;
}

class ScriptedJudge : public agents::CompletionProvider {
 public:
  explicit ScriptedJudge(std::string reply) : reply_(std::move(reply)) {}
  agents::AgentResponse complete(const agents::AgentRequest&) override {
    return {reply_, std::nullopt, id()};
  }
  std::string id() const override { return "scripted"; }

 private:
  std::string reply_;
};

}  // namespace

TEST_CASE("parses the three relation kinds from agent output") {
  const auto triples = parse_relation_response(
      "Biopsy | confirms | TumorType\n"
      "CT Scan | visualizes | Pancreatic Mass\n"
      "HER2 Status | determines | Trastuzumab Eligibility\n",
      "pt", "mock", sample_eavs());
  REQUIRE(triples.size() == 3);
  CHECK(triples[0].kind == RelationKind::EE);  // both known entities
  CHECK(triples[1].kind == RelationKind::EA);  // entity + unknown tail
  CHECK(triples[1].head == "CT Scan");
  CHECK_FALSE(triples[1].tail_anchored);
  CHECK(triples[2].kind == RelationKind::EA);  // HER2 Status is an entity here
}

TEST_CASE("classify_kind matches the typing rules") {
  const std::set<std::string> entities = {"biopsy", "ct scan"};
  const std::set<std::string> attributes = {"her2 status",
                                            "trastuzumab eligibility"};
  CHECK(classify_kind("Biopsy", "TumorType", {"biopsy", "tumortype"}, {}) ==
        RelationKind::EE);
  CHECK(classify_kind("HER2 Status", "Trastuzumab Eligibility", entities,
                      attributes) == RelationKind::AA);
  CHECK(classify_kind("CT Scan", "Pancreatic Mass", entities, attributes) ==
        RelationKind::EA);
  // Unknown endpoints default to the attribute class.
  CHECK(classify_kind("mystery", "another mystery", entities, attributes) ==
        RelationKind::AA);
}

TEST_CASE("endpoint normalization is case-insensitive then fuzzy") {
  const auto triples = parse_relation_response(
      "biopsy | confirms | TUMORTYPE\n"
      "Bipsy | confirms | TumorType\n",
      "pt", "mock", sample_eavs());
  REQUIRE(triples.size() == 2);
  CHECK(triples[0].head == "Biopsy");  // canonical casing restored
  CHECK(triples[0].tail == "TumorType");
  CHECK(triples[1].head == "Biopsy");  // fuzzy above the threshold
  CHECK(triples[1].head_anchored);
}

TEST_CASE("wholly unparseable relation output is an error") {
  CHECK_THROWS_AS(
      parse_relation_response("no pipes here\n", "pt", "mock", sample_eavs()),
      ContentError);
  CHECK(parse_relation_response("", "pt", "mock", sample_eavs()).empty());
}

TEST_CASE("judge parses, clamps, and rejects") {
  const auto triple = rel("HER2 Status", "determines", "Trastuzumab Eligibility");
  ScriptedJudge good("0.92");
  CHECK(judge(triple, "context text", good) == 0.92);

  ScriptedJudge overflow("1.7");
  CHECK(judge(triple, "context text", overflow) == 1.0);

  ScriptedJudge wordy("maybe");
  CHECK_THROWS_AS(judge(triple, "context text", wordy), ContentError);

  ScriptedJudge fine("0.5");
  CHECK_THROWS_AS(judge(triple, "   ", fine), DomainError);
}

TEST_CASE("parse_judge_score accepts only a bare number") {
  CHECK(parse_judge_score(" 0.25 ") == 0.25);
  CHECK(parse_judge_score("-0.5") == 0.0);  // clamped
  CHECK_THROWS_AS(parse_judge_score("score: 0.9"), ContentError);
  CHECK_THROWS_AS(parse_judge_score(""), ContentError);
}

TEST_CASE("contradiction_rate counts contradictory verdicts") {
  PerturbationSet pset;
  pset.original = rel("a", "p", "b");
  auto add = [&](Verdict v) { pset.variants.emplace_back(pset.original, v); };

  add(Verdict::Contradictory);
  add(Verdict::Contradictory);
  add(Verdict::Consistent);
  add(Verdict::Unclear);
  add(Verdict::Consistent);
  CHECK(contradiction_rate(pset) == 0.4);

  pset.variants.clear();
  for (int i = 0; i < 4; ++i) add(Verdict::Consistent);
  CHECK(contradiction_rate(pset) == 0.0);

  pset.variants.clear();
  for (int i = 0; i < 3; ++i) add(Verdict::Contradictory);
  CHECK(contradiction_rate(pset) == 1.0);

  pset.variants.clear();
  CHECK_THROWS_AS(contradiction_rate(pset), DomainError);
}

TEST_CASE("unknown adversary verdicts stay Unclear") {
  CHECK(verdict_from_string("CONSISTENT") == Verdict::Consistent);
  CHECK(verdict_from_string("contradictory") == Verdict::Contradictory);
  CHECK(verdict_from_string("UNCLEAR") == Verdict::Unclear);
  CHECK(verdict_from_string("whatever else") == Verdict::Unclear);
}

TEST_CASE("filter_trusted keeps high-J low-xi triples only") {
  auto scored = [](double j, double xi) {
    RelationTriple t = rel("a", "p", "b");
    t.scores.J = j;
    t.scores.xi = xi;
    return t;
  };
  CHECK(filter_trusted({scored(0.92, 0.0)}, 0.7, 0.2).size() == 1);
  CHECK(filter_trusted({scored(0.6, 0.0)}, 0.7, 0.2).empty());
  CHECK(filter_trusted({scored(0.9, 0.5)}, 0.7, 0.2).empty());
  // Thresholds: J strictly greater, xi at most.
  CHECK(filter_trusted({scored(0.7, 0.2)}, 0.7, 0.2).empty());
  CHECK(filter_trusted({scored(0.71, 0.2)}, 0.7, 0.2).size() == 1);
  // Unscored triples are excluded.
  RelationTriple unscored = rel("a", "p", "b");
  CHECK(filter_trusted({unscored}, 0.7, 0.2).empty());
}

TEST_CASE("filter_trusted equals brute-force comprehension on a random grid") {
  std::mt19937 rng(20260810);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<RelationTriple> triples;
  for (int i = 0; i < 100; ++i) {
    RelationTriple t = rel("h" + std::to_string(i), "p", "t");
    if (rng() % 10 != 0) t.scores.J = unit(rng);
    if (rng() % 10 != 0) t.scores.xi = unit(rng);
    triples.push_back(t);
  }
  const double delta_j = 0.7;
  const double epsilon = 0.2;
  const auto fast = filter_trusted(triples, delta_j, epsilon);

  std::vector<std::string> expected;
  for (const RelationTriple& t : triples) {
    if (t.scores.J && t.scores.xi && *t.scores.J > delta_j &&
        *t.scores.xi <= epsilon) {
      expected.push_back(t.head);
    }
  }
  REQUIRE(fast.size() == expected.size());
  for (std::size_t i = 0; i < fast.size(); ++i) {
    CHECK(fast[i].head == expected[i]);
  }
}

TEST_CASE("self-consistency is the canonical membership fraction") {
  const RelationTriple probe = rel("Biopsy", "confirms", "TumorType");
  const std::vector<RelationTriple> with = {probe};
  const std::vector<RelationTriple> with_synonym = {
      rel("biopsy", "verifies", "tumortype")};
  const std::vector<RelationTriple> without = {rel("x", "y", "z")};

  CHECK(self_consistency(probe, {with, with, with_synonym, with, without}) ==
        0.8);
  CHECK(self_consistency(probe, {with, with, with}) == 1.0);
  CHECK(self_consistency(probe, {without, without}) == 0.0);
  CHECK_THROWS_AS(self_consistency(probe, {}), DomainError);
}

TEST_CASE("evidence alignment reaches the HER2 bound") {
  const auto report = make_report(
      "HER2 is overexpressed; trastuzumab eligibility confirmed.");
  const double r = evidence_alignment(
      rel("HER2", "determines", "Trastuzumab Eligibility"), report);
  CHECK(r >= 0.5);
}

TEST_CASE("evidence alignment edge cases") {
  const auto exact = make_report("Biopsy confirms TumorType.");
  CHECK(evidence_alignment(rel("Biopsy", "confirms", "TumorType"), exact) ==
        1.0);
  const auto disjoint = make_report("Completely unrelated sentence here.");
  CHECK(evidence_alignment(rel("alpha", "beta", "gamma"), disjoint) == 0.0);
}

TEST_CASE("the agent-based entailment override takes the best sentence") {
  const auto report =
      make_report("First sentence here. Second sentence follows.");
  ScriptedJudge scorer("0.83");
  CHECK(evidence_alignment_entail(rel("a", "links", "b"), report, scorer) ==
        0.83);
}

TEST_CASE("composite trust reproduces the weighted sum") {
  const TrustScore t = composite_trust(0.9, 0.8, 0.92, {0.4, 0.3, 0.3});
  CHECK(t.T == doctest::Approx(0.876).epsilon(1e-12));
  CHECK(t.T >= 0.65);  // the delta_T gate retains this triple
  CHECK(composite_trust(1.0, 1.0, 1.0, {0.4, 0.3, 0.3}).T ==
        doctest::Approx(1.0));
  CHECK(composite_trust(1.0, 1.0, 1.0, {0.2, 0.5, 0.3}).T ==
        doctest::Approx(1.0));
}

TEST_CASE("weight validation") {
  CHECK_THROWS_AS(composite_trust(0.5, 0.5, 0.5, {0.6, 0.3, 0.3}), DomainError);
  CHECK_THROWS_AS(composite_trust(0.5, 0.5, 0.5, {-0.1, 0.6, 0.5}), DomainError);
}

TEST_CASE("composite trust is monotone and positively homogeneous") {
  std::mt19937 rng(4);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const std::array<double, 3> lambda = {0.4, 0.3, 0.3};
  for (int i = 0; i < 300; ++i) {
    const double r = unit(rng);
    const double c = unit(rng);
    const double j = unit(rng);
    const double base = composite_trust(r, c, j, lambda).T;
    CHECK(composite_trust(std::min(1.0, r + 0.05), c, j, lambda).T >= base);
    CHECK(composite_trust(r, std::min(1.0, c + 0.05), j, lambda).T >= base);
    CHECK(composite_trust(r, c, std::min(1.0, j + 0.05), lambda).T >= base);
    // Scaling every component by k scales T by k, so threshold pass/fail
    // is preserved exactly when the threshold scales too.
    const double k = 0.5;
    const double scaled = composite_trust(k * r, k * c, k * j, lambda).T;
    CHECK(scaled == doctest::Approx(k * base).epsilon(1e-12));
    const double delta_t = 0.65;
    CHECK((base >= delta_t) == (scaled >= k * delta_t));
  }
}

TEST_CASE("missing components renormalize the remaining weights") {
  const double t =
      composite_trust_partial(std::nullopt, 0.8, 0.9, {0.4, 0.3, 0.3});
  CHECK(t == doctest::Approx(0.5 * 0.8 + 0.5 * 0.9));
  CHECK_THROWS_AS(
      composite_trust_partial(std::nullopt, std::nullopt, std::nullopt,
                              {0.4, 0.3, 0.3}),
      DomainError);
}

TEST_CASE("consensus accepts triples validated by at least two models") {
  const RelationTriple shared = rel("Biopsy", "confirms", "TumorType");
  const RelationTriple lonely = rel("Vitamin D", "prevents", "Cancer");
  const RelationTriple everywhere = rel("CT Scan", "visualizes", "Mass");

  std::map<std::string, std::vector<RelationTriple>> sets;
  sets["extractor"] = {shared, lonely, everywhere};
  sets["refiner"] = {everywhere};
  sets["adversary"] = {shared, everywhere};

  const ConsensusResult result = consensus_accept(sets, nullptr);
  REQUIRE(result.accepted.size() == 2);
  REQUIRE(result.flagged.size() == 1);
  CHECK(result.flagged[0].head == "Vitamin D");

  CHECK_THROWS_AS(consensus_accept({{"only", {shared}}}, nullptr), DomainError);
}

TEST_CASE("consensus is symmetric in model order") {
  const RelationTriple a = rel("a", "p", "b");
  const RelationTriple b = rel("c", "q", "d");
  std::map<std::string, std::vector<RelationTriple>> forward;
  forward["m1"] = {a, b};
  forward["m2"] = {a};
  forward["m3"] = {b};
  std::map<std::string, std::vector<RelationTriple>> renamed;
  renamed["m3"] = {a, b};
  renamed["m2"] = {a};
  renamed["m1"] = {b};

  auto keys = [](const ConsensusResult& r) {
    std::vector<std::string> out;
    for (const auto& t : r.accepted) out.push_back(canonical_key(t));
    std::sort(out.begin(), out.end());
    return out;
  };
  CHECK(keys(consensus_accept(forward, nullptr)) ==
        keys(consensus_accept(renamed, nullptr)));
}

TEST_CASE("consensus equals the set-intersection-count oracle") {
  std::mt19937 rng(20260810);
  const std::vector<std::string> heads = {"a", "b", "c", "d", "e"};
  const std::vector<std::string> preds = {"p", "q"};
  for (int iter = 0; iter < 100; ++iter) {
    std::map<std::string, std::vector<RelationTriple>> sets;
    std::map<std::string, std::set<std::string>> membership;
    for (const std::string model : {"m1", "m2", "m3"}) {
      for (const std::string& h : heads) {
        if (rng() % 2) continue;
        const RelationTriple t = rel(h, preds[rng() % preds.size()], "tail");
        sets[model].push_back(t);
      }
      if (sets[model].empty()) sets[model].push_back(rel("filler", "p", "tail"));
    }
    for (const auto& [model, triples] : sets) {
      for (const auto& t : triples) membership[canonical_key(t)].insert(model);
    }
    const ConsensusResult result = consensus_accept(sets, nullptr);
    for (const RelationTriple& t : result.accepted) {
      CHECK(membership[canonical_key(t)].size() >= 2);
    }
    for (const RelationTriple& t : result.flagged) {
      CHECK(membership[canonical_key(t)].size() == 1);
    }
    std::size_t expected_accepted = 0;
    for (const auto& [key, models] : membership) {
      if (models.size() >= 2) ++expected_accepted;
    }
    CHECK(result.accepted.size() == expected_accepted);
  }
}

TEST_CASE("ontology-mappable variants win near-duplicate selection") {
  std::map<std::string, std::vector<RelationTriple>> sets;
  sets["m1"] = {rel("Tumour Type", "confirms", "Finding")};
  sets["m2"] = {rel("tumour type", "confirms", "finding")};
  auto mappable = [](const std::string& term) {
    return term == "tumour type";  // only the lowercase surface maps
  };
  const ConsensusResult result = consensus_accept(sets, mappable);
  REQUIRE(result.accepted.size() == 1);
  CHECK(result.accepted[0].head == "tumour type");
}

TEST_CASE("redundancy clusters synonym-predicate paraphrases") {
  agents::TrigramEmbeddingProvider embedder;
  std::vector<RelationTriple> triples = {
      rel("Biopsy", "confirms", "TumorType"),
      rel("Biopsy", "verifies", "TumorType"),
      rel("CT Scan", "visualizes", "Pancreatic Mass"),
  };
  triples[0].scores.T = 0.9;
  triples[1].scores.T = 0.8;
  triples[2].scores.T = 0.85;

  const auto clusters = redundancy_pairs(triples, embedder, 0.8);
  REQUIRE(clusters.size() == 2);
  CHECK(clusters[0].member_indices == std::vector<std::size_t>{0, 1});
  CHECK(clusters[0].representative == 0);  // highest T
  CHECK(clusters[1].member_indices == std::vector<std::size_t>{2});
}

TEST_CASE("identical triples share a cluster at cosine one") {
  agents::TrigramEmbeddingProvider embedder;
  const std::vector<RelationTriple> triples = {rel("a", "links", "b"),
                                               rel("a", "links", "b")};
  const auto clusters = redundancy_pairs(triples, embedder, 0.99);
  REQUIRE(clusters.size() == 1);
  CHECK(clusters[0].member_indices.size() == 2);
}

TEST_CASE("token-disjoint triples land in separate clusters") {
  agents::TrigramEmbeddingProvider embedder;
  const std::vector<RelationTriple> triples = {
      rel("CT Scan", "visualizes", "Pancreatic Mass"),
      rel("HER2 Status", "determines", "Trastuzumab Eligibility"),
  };
  const double cos = agents::cosine(
      embedder.embed(verbalize_canonical(triples[0])),
      embedder.embed(verbalize_canonical(triples[1])));
  CHECK(cos < 0.5);
  CHECK(redundancy_pairs(triples, embedder, 0.8).size() == 2);
}

TEST_CASE("redundancy clusters partition the input deterministically") {
  agents::TrigramEmbeddingProvider embedder;
  std::vector<RelationTriple> triples;
  for (int i = 0; i < 20; ++i) {
    triples.push_back(rel("head" + std::to_string(i % 5), "links",
                          "tail" + std::to_string(i % 3)));
  }
  const auto once = redundancy_pairs(triples, embedder, 0.85);
  const auto twice = redundancy_pairs(triples, embedder, 0.85);
  std::vector<bool> seen(triples.size(), false);
  std::size_t total = 0;
  for (const auto& cluster : once) {
    for (std::size_t idx : cluster.member_indices) {
      CHECK_FALSE(seen[idx]);
      seen[idx] = true;
      ++total;
    }
  }
  CHECK(total == triples.size());
  REQUIRE(once.size() == twice.size());
  for (std::size_t i = 0; i < once.size(); ++i) {
    CHECK(once[i].member_indices == twice[i].member_indices);
    CHECK(once[i].representative == twice[i].representative);
  }
}

TEST_CASE("gap suggestions list similar endpoints lacking any edge") {
  agents::TrigramEmbeddingProvider embedder;
  // Two near-identical endpoint terms with no edge between them.
  const std::vector<RelationTriple> triples = {
      rel("initiated treatment", "follows", "diagnosis"),
      rel("initiated treatments", "precede", "surgery"),
  };
  const auto gaps = suggest_gaps(triples, embedder, 0.8);
  REQUIRE(gaps.size() == 1);
  CHECK(gaps[0].terms.size() == 2);
}

TEST_CASE("relation artifacts round-trip through json") {
  RelationTriple t = rel("Biopsy", "confirms", "TumorType");
  t.kind = RelationKind::EE;
  t.scores.J = 0.9;
  t.scores.T = 0.876;
  t.head_anchored = false;
  const auto restored = relations_from_json(relations_to_json({t}));
  REQUIRE(restored.size() == 1);
  CHECK(restored[0].head == "Biopsy");
  CHECK(restored[0].kind == RelationKind::EE);
  CHECK(restored[0].scores.J == 0.9);
  CHECK_FALSE(restored[0].scores.C.has_value());
  CHECK_FALSE(restored[0].head_anchored);
}
