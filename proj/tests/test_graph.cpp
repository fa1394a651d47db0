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
#include "kgf/errors.hpp"
#include "kgf/graph/encode.hpp"
#include "kgf/graph/serialize.hpp"
#include "kgf/graph/store.hpp"
#include "kgf/graph/swrl.hpp"

using namespace kgf;
using namespace kgf::graph;
using ontology::SchemaDecl;
using ontology::SchemaDeclKind;

namespace {

const std::string kKg = "http://example.org/kg#";

Iri kg(const std::string& local) { return Iri(kKg + local); }

RdfTriple type_of(const std::string& node, const std::string& cls) {
  return {kg(node), rdf_type(), kg(cls)};
}

SchemaDecl subclass(const std::string& sub, const std::string& sup) {
  return {SchemaDeclKind::SubClassOf, kKg + sub, kKg + sup, "", ""};
}

SchemaDecl domain_range(const std::string& prop, const std::string& domain,
                        const std::string& range) {
  return {SchemaDeclKind::DomainRange, kKg + prop, "", kKg + domain, kKg + range};
}

}  // namespace

TEST_CASE("insert is idempotent; contains reflects membership") {
  GraphStore store;
  const RdfTriple t = type_of("a", "B");
  CHECK_FALSE(store.contains(t));
  CHECK(store.insert(t));
  CHECK_FALSE(store.insert(t));
  CHECK(store.size() == 1);
  CHECK(store.contains(t));
}

TEST_CASE("malformed IRIs are rejected at construction") {
  CHECK_THROWS_AS(Iri("no-scheme-here"), DomainError);
  CHECK_THROWS_AS(Iri(""), DomainError);
  CHECK_NOTHROW(Iri("http://ok/x"));
}

TEST_CASE("encode_eav emits type assertion plus attribute edge") {
  extraction::EavTriple eav;
  eav.entity = "Observation";
  eav.fhir_type = extraction::FhirResourceType::Observation;
  eav.attribute = "hasLabResult";
  eav.value = "CA 19-9";
  eav.source.patient_id = "p0";

  const auto triples = encode_eav(eav, {}, EncodePolicy{});
  REQUIRE(triples.size() == 2);
  CHECK(triples[0].predicate == rdf_type());
  CHECK(as_iri(triples[0].object).value == "http://hl7.org/fhir/Observation");
  CHECK(triples[1].subject.value ==
        "http://example.org/kg#ent/p0/observation");
  const Literal& lit = as_literal(triples[1].object);
  CHECK(lit.lexical == "CA 19-9");
  CHECK(lit.datatype == LiteralType::String);
}

TEST_CASE("numeric values sniff to decimal literals") {
  extraction::EavTriple eav;
  eav.entity = "Patient";
  eav.attribute = "weight_loss";
  eav.value = "12";
  eav.source.patient_id = "p0";
  const auto triples = encode_eav(eav, {}, EncodePolicy{});
  const Literal& lit = as_literal(triples[1].object);
  CHECK(lit.lexical == "12");
  CHECK(lit.datatype == LiteralType::Decimal);
}

TEST_CASE("boolean values sniff to boolean literals") {
  extraction::EavTriple eav;
  eav.entity = "Patient";
  eav.attribute = "smoking";
  eav.value = "false";
  eav.source.patient_id = "p0";
  const auto triples = encode_eav(eav, {}, EncodePolicy{});
  CHECK(as_literal(triples[1].object).datatype == LiteralType::Boolean);
}

TEST_CASE("mapped attributes use their vocabulary URI") {
  extraction::EavTriple eav;
  eav.entity = "Patient";
  eav.attribute = "weight_loss";
  eav.value = "12";
  eav.source.patient_id = "p0";
  ontology::ConceptMapping m;
  m.raw_term = "weight_loss";
  m.term.uri = "http://snomed.info/id/267036007";
  const auto triples = encode_eav(eav, {{"weight_loss", m}}, EncodePolicy{});
  CHECK(triples[1].predicate.value == "http://snomed.info/id/267036007");
}

TEST_CASE("strict mode rejects unmapped attributes; lenient mints one") {
  extraction::EavTriple eav;
  eav.entity = "Patient";
  eav.attribute = "mystery_attr";
  eav.value = "1";
  eav.source.patient_id = "p0";
  EncodePolicy strict;
  strict.strict = true;
  CHECK_THROWS_AS(encode_eav(eav, {}, strict), ContentError);
  const auto lenient = encode_eav(eav, {}, EncodePolicy{});
  CHECK(lenient[1].predicate.value ==
        "http://example.org/kg#attr/mystery_attr");
}

TEST_CASE("subclass closure: transitivity and reflexivity") {
  const std::vector<SchemaDecl> schema = {subclass("A", "B"), subclass("B", "C")};
  const SubclassClosure closure = subclass_closure(schema);
  CHECK(closure.is_subclass_of(kKg + "A", kKg + "C"));
  CHECK(closure.is_subclass_of(kKg + "A", kKg + "A"));
  CHECK(closure.is_subclass_of("http://elsewhere/X", "http://elsewhere/X"));
  CHECK_FALSE(closure.is_subclass_of(kKg + "C", kKg + "A"));
}

TEST_CASE("empty schema closes to the identity relation") {
  const SubclassClosure closure = subclass_closure({});
  CHECK(closure.nonreflexive_pairs().empty());
  CHECK(closure.is_subclass_of("http://x/A", "http://x/A"));
}

TEST_CASE("a chain of five declarations yields fifteen pairs") {
  const std::vector<SchemaDecl> schema = {
      subclass("C0", "C1"), subclass("C1", "C2"), subclass("C2", "C3"),
      subclass("C3", "C4"), subclass("C4", "C5")};
  CHECK(subclass_closure(schema).nonreflexive_pairs().size() == 15);
}

TEST_CASE("closure rejects cycles") {
  const std::vector<SchemaDecl> schema = {subclass("A", "B"), subclass("B", "C"),
                                          subclass("C", "A")};
  CHECK_THROWS_WITH_AS(subclass_closure(schema), doctest::Contains("cycle"),
                       DomainError);
}

TEST_CASE("equivalence behaves as bidirectional subclass") {
  const std::vector<SchemaDecl> schema = {subclass("Tumor", "Finding")};
  const SubclassClosure closure =
      subclass_closure(schema, {{kKg + "Tumor", kKg + "Neoplasm"}});
  CHECK(closure.is_subclass_of(kKg + "Neoplasm", kKg + "Tumor"));
  CHECK(closure.is_subclass_of(kKg + "Tumor", kKg + "Neoplasm"));
  CHECK(closure.is_subclass_of(kKg + "Neoplasm", kKg + "Finding"));
}

TEST_CASE("restriction axiom fires on the malignant-biopsy fixture") {
  GraphStore store;
  store.insert(type_of("b", "class/Biopsy"));
  store.insert({kg("b"), kg("rel/hasoutcome"), kg("m")});
  store.insert(type_of("m", "class/Malignant"));

  const ontology::RestrictionAxiom axiom = {
      kKg + "class/Biopsy", kKg + "rel/hasoutcome", kKg + "class/Malignant",
      kKg + "class/PositiveFinding"};
  const auto inferred = apply_restrictions(store, {axiom});
  REQUIRE(inferred.size() == 1);
  CHECK(store.contains(type_of("b", "class/PositiveFinding")));
}

TEST_CASE("restriction does not fire without the outcome edge") {
  GraphStore store;
  store.insert(type_of("b", "class/Biopsy"));
  store.insert(type_of("m", "class/Malignant"));
  const ontology::RestrictionAxiom axiom = {
      kKg + "class/Biopsy", kKg + "rel/hasoutcome", kKg + "class/Malignant",
      kKg + "class/PositiveFinding"};
  CHECK(apply_restrictions(store, {axiom}).empty());
}

TEST_CASE("chained restrictions reach the fixpoint") {
  // The first axiom's inferred class enables the second.
  GraphStore store;
  store.insert(type_of("b", "class/Biopsy"));
  store.insert({kg("b"), kg("rel/hasoutcome"), kg("m")});
  store.insert(type_of("m", "class/Malignant"));
  store.insert({kg("b"), kg("rel/reportedin"), kg("r")});
  store.insert(type_of("r", "class/Report"));

  const std::vector<ontology::RestrictionAxiom> axioms = {
      {kKg + "class/Biopsy", kKg + "rel/hasoutcome", kKg + "class/Malignant",
       kKg + "class/PositiveFinding"},
      {kKg + "class/PositiveFinding", kKg + "rel/reportedin",
       kKg + "class/Report", kKg + "class/ActionableFinding"},
  };
  const auto inferred = apply_restrictions(store, axioms);
  CHECK(inferred.size() == 2);
  CHECK(store.contains(type_of("b", "class/ActionableFinding")));
}

namespace {

// A conforming instance store for hasmarker: Observation -> Biomarker.
GraphStore conforming_store(int instances) {
  GraphStore store;
  store.schema.push_back(domain_range("rel/hasmarker", "class/Observation",
                                      "class/Biomarker"));
  store.schema.push_back(subclass("class/GeneMarker", "class/Biomarker"));
  for (int i = 0; i < instances; ++i) {
    const std::string s = "obs" + std::to_string(i);
    const std::string o = "marker" + std::to_string(i);
    store.insert(type_of(s, "class/Observation"));
    store.insert(type_of(o, i % 2 == 0 ? "class/Biomarker" : "class/GeneMarker"));
    store.insert({kg(s), kg("rel/hasmarker"), kg(o)});
  }
  return store;
}

}  // namespace

TEST_CASE("conforming store validates cleanly") {
  GraphStore store = conforming_store(6);
  CHECK(validate_domain_range(store).empty());
}

TEST_CASE("range violation is reported with expected and found") {
  GraphStore store = conforming_store(3);
  // One object typed LabTest, which is not a subclass of Biomarker.
  store.insert(type_of("bad", "class/LabTest"));
  store.insert(type_of("obs_x", "class/Observation"));
  store.insert({kg("obs_x"), kg("rel/hasmarker"), kg("bad")});
  const auto inconsistencies = validate_domain_range(store);
  REQUIRE(inconsistencies.size() == 1);
  CHECK(inconsistencies[0].side == "range");
  CHECK(inconsistencies[0].expected == kKg + "class/Biomarker");
  CHECK(inconsistencies[0].found == kKg + "class/LabTest");
}

TEST_CASE("untyped endpoints count as violations") {
  GraphStore store = conforming_store(2);
  store.insert({kg("obs0"), kg("rel/hasmarker"), kg("untyped_node")});
  const auto inconsistencies = validate_domain_range(store);
  REQUIRE(inconsistencies.size() == 1);
  CHECK(inconsistencies[0].found == "untyped");
}

TEST_CASE("seeding k violations yields exactly k reports") {
  for (int k : {0, 1, 5}) {
    GraphStore store = conforming_store(8);
    for (int i = 0; i < k; ++i) {
      const std::string o = "rogue" + std::to_string(i);
      store.insert(type_of(o, "class/LabTest"));
      store.insert({kg("obs" + std::to_string(i)), kg("rel/hasmarker"), kg(o)});
    }
    CHECK(validate_domain_range(store).size() == static_cast<std::size_t>(k));
  }
}

namespace {

const char* kHighRiskRule = R"((prefix kg <http://example.org/kg#>)
(rule (body (class kg:class/Patient ?p)
            (prop kg:rel/hasattribute ?p ?ca)
            (class kg:class/CA19_9 ?ca)
            (prop kg:rel/indicates ?ca ?v1)
            (gt ?v1 1000)
            (prop kg:rel/hasattribute ?p ?w)
            (class kg:class/WeightLoss ?w)
            (prop kg:rel/indicates ?w ?v2)
            (gt ?v2 10))
      (head (class kg:class/HighRiskPatient ?p)))
)";

GraphStore high_risk_store(const std::string& ca_value,
                           const std::string& wl_value) {
  GraphStore store;
  store.insert(type_of("p", "class/Patient"));
  store.insert({kg("p"), kg("rel/hasattribute"), kg("ca")});
  store.insert(type_of("ca", "class/CA19_9"));
  store.insert({kg("ca"), kg("rel/indicates"),
                Literal{ca_value, LiteralType::Decimal}});
  store.insert({kg("p"), kg("rel/hasattribute"), kg("w")});
  store.insert(type_of("w", "class/WeightLoss"));
  store.insert({kg("w"), kg("rel/indicates"),
                Literal{wl_value, LiteralType::Decimal}});
  return store;
}

bool high_risk_fires(const std::string& ca, const std::string& wl) {
  GraphStore store = high_risk_store(ca, wl);
  apply_swrl(store, parse_rules(kHighRiskRule));
  return store.contains(type_of("p", "class/HighRiskPatient"));
}

}  // namespace

TEST_CASE("high-risk rule fires iff both thresholds are strictly exceeded") {
  CHECK(high_risk_fires("1200", "12"));
  CHECK_FALSE(high_risk_fires("1200", "5"));
  CHECK_FALSE(high_risk_fires("800", "12"));
  CHECK_FALSE(high_risk_fires("800", "5"));
  // Boundaries: greaterThan is strict.
  CHECK_FALSE(high_risk_fires("1000", "12"));
  CHECK_FALSE(high_risk_fires("1200", "10"));
}

TEST_CASE("non-numeric literals reject the binding without erroring") {
  GraphStore store = high_risk_store("1200", "12");
  store.insert({kg("ca"), kg("rel/indicates"),
                Literal{"elevated", LiteralType::String}});
  CHECK_NOTHROW(apply_swrl(store, parse_rules(kHighRiskRule)));
  CHECK(store.contains(type_of("p", "class/HighRiskPatient")));
}

TEST_CASE("rule parsing validates structure") {
  CHECK_THROWS_AS(parse_rules("(rule (body) (head (class <http://x/C> ?p)))"),
                  ParseError);
  CHECK_THROWS_AS(
      parse_rules("(rule (body (class <http://x/C> ?a)) "
                  "(head (class <http://x/D> ?other)))"),
      ParseError);
  CHECK_THROWS_AS(parse_rules("(rule (body (gt ?v 1)) "
                              "(head (class <http://x/D> ?v)))"),
                  ParseError);
  CHECK(parse_rules("# only a comment\n").empty());
}

TEST_CASE("fixpoint is order-independent across shuffled rule sets") {
  // Rule chain: A -> B -> C plus the high-risk rule.
  const std::string rules_text = R"((prefix kg <http://example.org/kg#>)
(rule (body (class kg:class/A ?x)) (head (class kg:class/B ?x)))
(rule (body (class kg:class/B ?x)) (head (class kg:class/C ?x)))
(rule (body (class kg:class/C ?x) (prop kg:rel/links ?x ?y))
      (head (class kg:class/Linked ?x)))
)";
  auto rules = parse_rules(rules_text);
  REQUIRE(rules.size() == 3);

  auto run = [&](const std::vector<SwrlRule>& ordered) {
    GraphStore store;
    store.insert(type_of("n1", "class/A"));
    store.insert({kg("n1"), kg("rel/links"), kg("n2")});
    store.insert(type_of("n2", "class/A"));
    apply_swrl(store, ordered);
    return serialize_ntriples(store);
  };

  const std::string reference = run(rules);
  std::mt19937 rng(17);
  for (int iter = 0; iter < 10; ++iter) {
    std::shuffle(rules.begin(), rules.end(), rng);
    CHECK(run(rules) == reference);
  }
}

TEST_CASE("inference is monotone: rules only add triples") {
  GraphStore store = high_risk_store("1200", "12");
  const std::size_t before = store.size();
  apply_swrl(store, parse_rules(kHighRiskRule));
  CHECK(store.size() >= before);
}

TEST_CASE("serialize/parse round trip on random triples") {
  std::mt19937 rng(20260810);
  std::uniform_int_distribution<int> subj(0, 40);
  std::uniform_int_distribution<int> pred(0, 9);
  std::uniform_int_distribution<int> kind(0, 3);
  const std::vector<std::string> lexicals = {
      "plain",       "with \"quotes\"", "back\\slash", "tab\there",
      "new\nline",   "carriage\rret",  "1200",        "1.5",
      "true",        "trailing space ", "ünïcode-ish", ""};

  GraphStore store;
  while (store.size() < 1000) {
    RdfTriple t;
    t.subject = Iri("http://example.org/s/" + std::to_string(subj(rng)));
    t.predicate = Iri("http://example.org/p/" + std::to_string(pred(rng)));
    switch (kind(rng)) {
      case 0:
        t.object = Iri("http://example.org/o/" + std::to_string(subj(rng)));
        break;
      case 1:
        t.object = Literal{lexicals[rng() % lexicals.size()], LiteralType::String};
        break;
      case 2:
        t.object = Literal{std::to_string(static_cast<int>(rng() % 5000)),
                           LiteralType::Decimal};
        break;
      default:
        t.object = Literal{rng() % 2 ? "true" : "false", LiteralType::Boolean};
        break;
    }
    store.insert(t);
  }

  const std::string text = serialize_ntriples(store);
  const GraphStore restored = parse_ntriples(text);
  CHECK(restored.size() == store.size());
  CHECK(restored.triples() == store.triples());
  // Serializer output is canonical: re-serializing is the identity.
  CHECK(serialize_ntriples(restored) == text);
}

TEST_CASE("empty store serializes to empty text") {
  CHECK(serialize_ntriples(GraphStore{}).empty());
  CHECK(parse_ntriples("").size() == 0);
}

TEST_CASE("embedded quotes escape on write and restore on read") {
  GraphStore store;
  store.insert({kg("s"), kg("p"),
                Literal{"she said \"hi\" once", LiteralType::String}});
  const std::string text = serialize_ntriples(store);
  CHECK(text.find("\\\"hi\\\"") != std::string::npos);
  const GraphStore restored = parse_ntriples(text);
  CHECK(restored.triples() == store.triples());
}

TEST_CASE("serialization is deterministic and sorted") {
  GraphStore store;
  store.insert(type_of("b", "B"));
  store.insert(type_of("a", "A"));
  const std::string once = serialize_ntriples(store);
  CHECK(once == serialize_ntriples(store));
  std::vector<std::string> lines;
  std::string line;
  for (char c : once) {
    if (c == '\n') {
      lines.push_back(line);
      line.clear();
    } else {
      line += c;
    }
  }
  CHECK(std::is_sorted(lines.begin(), lines.end()));
}

TEST_CASE("malformed n-triples lines name the offending line") {
  try {
    parse_ntriples("<http://a> <http://b> <http://c> .\nnot a triple\n");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
  CHECK_THROWS_AS(parse_ntriples("<http://a> <http://b> \"open .\n"), ParseError);
  CHECK_THROWS_AS(
      parse_ntriples("<http://a> <http://b> \"x\"^^<http://unknown/dt> .\n"),
      ParseError);
}

TEST_CASE("turtle serializer groups subjects under prefixes") {
  GraphStore store;
  store.prefixes["kg"] = kKg;
  store.insert(type_of("a", "B"));
  store.insert({kg("a"), kg("p"), Literal{"v", LiteralType::String}});
  const std::string ttl = serialize_turtle(store);
  CHECK(ttl.find("@prefix kg:") != std::string::npos);
  CHECK(ttl.find(";") != std::string::npos);
}
