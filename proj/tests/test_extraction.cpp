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
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "doctest.h"
#include "kgf/agents.hpp"
#include "kgf/errors.hpp"
#include "kgf/extraction.hpp"
#include "kgf/prompts.hpp"

namespace fs = std::filesystem;
using namespace kgf;
using namespace kgf::extraction;

TEST_CASE("parses the lab-result record") {
  const auto result = parse_extraction_response(
      "entity=Observation|type=Observation|attribute=hasLabResult|value=CA 19-9\n",
      "p0", "mock");
  REQUIRE(result.triples.size() == 1);
  const EavTriple& t = result.triples[0];
  CHECK(t.entity == "Observation");
  CHECK(t.fhir_type == FhirResourceType::Observation);
  CHECK(t.attribute == "hasLabResult");
  CHECK(t.value == "CA 19-9");
  CHECK(t.source.patient_id == "p0");
  CHECK(t.extractor_id == "mock");
}

TEST_CASE("parses the procedure record") {
  const auto result = parse_extraction_response(
      "entity=Procedure|type=Procedure|attribute=performed_by|value=SurgicalOncologist\n",
      "p0", "mock");
  REQUIRE(result.triples.size() == 1);
  CHECK(result.triples[0].fhir_type == FhirResourceType::Procedure);
}

TEST_CASE("malformed records are skipped and counted") {
  const auto result = parse_extraction_response(
      "entity=A|type=Condition|attribute=x|value=1\n"
      "completely malformed line\n"
      "entity=B|type=Observation|attribute=y|value=2\n",
      "p0", "mock");
  CHECK(result.triples.size() == 2);
  CHECK(result.skipped_records == 1);
}

TEST_CASE("wholly unparseable response raises with the raw text") {
  CHECK_THROWS_WITH_AS(
      parse_extraction_response("nothing useful at all\n", "p0", "mock"),
      doctest::Contains("nothing useful"), ContentError);
}

TEST_CASE("empty response parses to an empty list") {
  CHECK(parse_extraction_response("", "p0", "mock").triples.empty());
  CHECK(parse_extraction_response("  \n \n", "p0", "mock").triples.empty());
}

TEST_CASE("missing type field falls back to the alias table") {
  const auto result = parse_extraction_response(
      "entity=CT Scan|attribute=visualizes|value=mass\n", "p0", "mock");
  REQUIRE(result.triples.size() == 1);
  CHECK(result.triples[0].fhir_type == FhirResourceType::ImagingStudy);
}

TEST_CASE("assign_fhir_type resolves aliases and exact names") {
  CHECK(assign_fhir_type("CT Scan") == FhirResourceType::ImagingStudy);
  CHECK(assign_fhir_type("  ct scan ") == FhirResourceType::ImagingStudy);
  CHECK(assign_fhir_type("Observation") == FhirResourceType::Observation);
  CHECK(assign_fhir_type("biopsy") == FhirResourceType::Procedure);
  CHECK(assign_fhir_type("zzz-unknown-entity") == FhirResourceType::Unknown);
}

TEST_CASE("value_entropy closed-form cases") {
  CHECK(value_entropy({1.0}) == 0.0);
  CHECK(value_entropy({0.5, 0.5}) == doctest::Approx(0.693147).epsilon(1e-6));
  CHECK(value_entropy({0.9, 0.1}) == doctest::Approx(0.325083).epsilon(1e-6));
}

TEST_CASE("value_entropy domain errors") {
  CHECK_THROWS_AS(value_entropy({}), DomainError);
  CHECK_THROWS_AS(value_entropy({0.0}), DomainError);
  CHECK_THROWS_AS(value_entropy({1.2}), DomainError);
  CHECK_THROWS_AS(value_entropy({0.5, -0.1}), DomainError);
}

TEST_CASE("value_entropy is permutation-invariant and non-negative") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> dist(1e-6, 1.0);
  for (int iter = 0; iter < 500; ++iter) {
    std::vector<double> probs(1 + rng() % 8);
    for (double& p : probs) p = dist(rng);
    const double h = value_entropy(probs);
    CHECK(h >= 0.0);
    std::vector<double> shuffled = probs;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    CHECK(value_entropy(shuffled) == doctest::Approx(h).epsilon(1e-12));
  }
}

TEST_CASE("averaged entropy divides by token count") {
  CHECK(value_entropy_mean({0.5, 0.5}) ==
        doctest::Approx(0.5 * 0.693147).epsilon(1e-6));
}

TEST_CASE("flag_uncertain partitions on the threshold") {
  auto with_entropy = [](double h) {
    EavTriple t;
    t.entity = "e";
    t.attribute = "a";
    t.value = "v";
    t.value_token_probs = {{0.5}};
    t.entropy = h;
    return t;
  };
  EavTriple unknown;
  unknown.entity = "e";
  unknown.attribute = "a";
  unknown.value = "v";

  const auto p = flag_uncertain({with_entropy(0.0), with_entropy(0.7), unknown}, 0.5);
  CHECK(p.confident.size() == 1);
  CHECK(p.flagged.size() == 1);
  CHECK(p.unknown.size() == 1);
}

TEST_CASE("delta zero flags exactly the strictly positive entropies") {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> dist(1e-6, 1.0);
  std::vector<EavTriple> triples;
  for (int i = 0; i < 100; ++i) {
    EavTriple t;
    t.entity = "e";
    t.attribute = "a";
    t.value = "v";
    std::vector<double> probs(1 + rng() % 4);
    for (double& p : probs) p = dist(rng);
    t.value_token_probs = probs;
    t.entropy = value_entropy(probs);
    triples.push_back(t);
  }
  const auto p = flag_uncertain(triples, 0.0);
  CHECK(p.unknown.empty());
  for (const EavTriple& t : p.flagged) CHECK(*t.entropy > 0.0);
  for (const EavTriple& t : p.confident) CHECK(*t.entropy == 0.0);
  CHECK(p.flagged.size() + p.confident.size() == triples.size());
}

TEST_CASE("negative threshold is rejected") {
  CHECK_THROWS_AS(flag_uncertain({}, -0.1), DomainError);
}

TEST_CASE("extract_eav via the mock provider is deterministic") {
  const fs::path dir = fs::temp_directory_path() / "kgf_extract_mock";
  fs::remove_all(dir);
  fs::create_directories(dir);

  corpus::ClinicalReport report;
  report.patient_id = "px";
  report.narrative = "CA 19-9 was 1200.";
  report.sentences = corpus::segment_sentences(report.narrative);

  const std::string prompt =
      prompts::render_prompt("extract_eav", {{"doc", report.narrative}});
  {
    std::ofstream out(dir / agents::MockCompletionProvider::fixture_filename(
                                agents::AgentRole::Extractor, prompt));
    out << "entity=Observation|type=Observation|attribute=ca_19_9|value=1200|probs=0.9,0.8\n";
  }
  agents::MockCompletionProvider mock(dir.string());

  const auto a = extract_eav(report, mock);
  const auto b = extract_eav(report, mock);
  REQUIRE(a.triples.size() == 1);
  CHECK(to_json(a.triples) == to_json(b.triples));
  REQUIRE(a.triples[0].entropy.has_value());
  CHECK(*a.triples[0].entropy ==
        doctest::Approx(value_entropy({0.9, 0.8})).epsilon(1e-12));
}

TEST_CASE("entropy present iff probabilities present") {
  const auto result = parse_extraction_response(
      "entity=A|type=Condition|attribute=x|value=1|probs=0.9,0.7\n"
      "entity=B|type=Condition|attribute=y|value=2\n",
      "p0", "mock");
  REQUIRE(result.triples.size() == 2);
  CHECK(result.triples[0].entropy.has_value());
  CHECK(result.triples[0].value_token_probs.has_value());
  CHECK_FALSE(result.triples[1].entropy.has_value());
  CHECK_FALSE(result.triples[1].value_token_probs.has_value());
}

TEST_CASE("json round trip preserves records") {
  const auto result = parse_extraction_response(
      "entity=A|type=Condition|attribute=x|value=1|probs=0.9,0.7|span=3:9\n",
      "p7", "mock");
  const auto restored = from_json(to_json(result.triples));
  REQUIRE(restored.size() == 1);
  CHECK(restored[0].entity == "A");
  CHECK(restored[0].fhir_type == FhirResourceType::Condition);
  CHECK(restored[0].source.patient_id == "p7");
  REQUIRE(restored[0].source.span.has_value());
  CHECK(restored[0].source.span->first == 3);
  CHECK(restored[0].entropy.has_value());
}
