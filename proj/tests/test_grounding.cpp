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
#include <filesystem>
#include <fstream>
#include <random>

#include "doctest.h"
#include "kgf/corpus.hpp"
#include "kgf/errors.hpp"
#include "kgf/grounding.hpp"

using namespace kgf;
using namespace kgf::grounding;
using extraction::EavTriple;

namespace {

// Independent oracle: full-matrix edit distance with insert/delete cost 1
// and substitution cost 2.
std::size_t indel_oracle(const std::string& a, const std::string& b) {
  const std::size_t la = a.size();
  const std::size_t lb = b.size();
  std::vector<std::vector<std::size_t>> d(la + 1,
                                          std::vector<std::size_t>(lb + 1, 0));
  for (std::size_t i = 0; i <= la; ++i) d[i][0] = i;
  for (std::size_t j = 0; j <= lb; ++j) d[0][j] = j;
  for (std::size_t i = 1; i <= la; ++i) {
    for (std::size_t j = 1; j <= lb; ++j) {
      const std::size_t sub =
          d[i - 1][j - 1] + (a[i - 1] == b[j - 1] ? 0 : 2);
      d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1, sub});
    }
  }
  return d[la][lb];
}

double ratio_oracle(const std::string& a, const std::string& b) {
  const std::size_t total = a.size() + b.size();
  if (total == 0) return 100.0;
  const std::size_t dist = indel_oracle(a, b);
  return 100.0 * static_cast<double>(total - dist) / static_cast<double>(total);
}

corpus::ClinicalReport make_report(const std::string& narrative) {
  corpus::ClinicalReport r;
  r.patient_id = "pt";
  r.narrative = narrative;
  r.sentences = corpus::segment_sentences(narrative);
  return r;
}

EavTriple make_triple(const std::string& entity, const std::string& attribute,
                      const std::string& value) {
  EavTriple t;
  t.entity = entity;
  t.attribute = attribute;
  t.value = value;
  t.source.patient_id = "pt";
  return t;
}

}  // namespace

TEST_CASE("fuzzy_ratio scores the canonical regimen typo") {
  CHECK(fuzzy_ratio("FOLFRINOX", "FOLFIRINOX") ==
        doctest::Approx(94.74).epsilon(0.0002));
  CHECK(fuzzy_ratio("FOLFRINOX", "FOLFIRINOX") > 90.0);
}

TEST_CASE("fuzzy_ratio identity and disjoint cases") {
  CHECK(fuzzy_ratio("pancreas", "pancreas") == 100.0);
  CHECK(fuzzy_ratio("abc", "xyz") == 0.0);
  CHECK(fuzzy_ratio("", "") == 100.0);
  CHECK(fuzzy_ratio("abc", "") == 0.0);
}

TEST_CASE("fuzzy_ratio equals the DP oracle exactly on random pairs") {
  std::mt19937 rng(20260810);
  const std::string alphabet = "abcdef";
  auto random_string = [&] {
    std::string s(rng() % 21, 'a');
    for (char& c : s) c = alphabet[rng() % alphabet.size()];
    return s;
  };
  for (int iter = 0; iter < 1000; ++iter) {
    const std::string a = random_string();
    const std::string b = random_string();
    CHECK(fuzzy_ratio(a, b) == ratio_oracle(a, b));
    CHECK(indel_distance(a, b) == indel_oracle(a, b));
  }
}

TEST_CASE("fuzzy_ratio is symmetric and 100 only at equality") {
  std::mt19937 rng(99);
  const std::string alphabet = "abcz";
  auto random_string = [&] {
    std::string s(rng() % 12, 'a');
    for (char& c : s) c = alphabet[rng() % alphabet.size()];
    return s;
  };
  for (int iter = 0; iter < 500; ++iter) {
    const std::string a = random_string();
    const std::string b = random_string();
    CHECK(fuzzy_ratio(a, b) == fuzzy_ratio(b, a));
    if (fuzzy_ratio(a, b) == 100.0) CHECK(a == b);
    if (a == b) CHECK(fuzzy_ratio(a, b) == 100.0);
  }
}

TEST_CASE("stage 1: exact, regex, and boolean-inference examples") {
  const GroundingConfig cfg = GroundingConfig::defaults();

  const auto report = make_report(
      "FOLFIRINOX was continued. bilirubin: 1.2mg/dL. Patient denies smoking.");

  const auto exact = stage1_match(make_triple("Regimen", "drug", "FOLFIRINOX"),
                                  report, cfg);
  REQUIRE(exact.has_value());
  CHECK(*exact->technique == MatchTechnique::Exact);
  CHECK(exact->status == MatchStatus::Grounded);
  REQUIRE(exact->matched_span.has_value());
  CHECK(report.narrative.substr(exact->matched_span->first,
                                exact->matched_span->second -
                                    exact->matched_span->first) == "FOLFIRINOX");

  const auto regex = stage1_match(
      make_triple("Observation", "bilirubin", "1.2 mg/dL"), report, cfg);
  REQUIRE(regex.has_value());
  CHECK(*regex->technique == MatchTechnique::Regex);

  const auto boolean = stage1_match(make_triple("Patient", "smoking", "false"),
                                    report, cfg);
  REQUIRE(boolean.has_value());
  CHECK(*boolean->technique == MatchTechnique::BooleanInference);
  CHECK(boolean->score == 1.0);
}

TEST_CASE("stage 2: case-insensitive, negation pattern, and lemma examples") {
  const GroundingConfig cfg = GroundingConfig::defaults();

  const auto caseins = stage2_match(make_triple("Patient", "sex", "Male"),
                                    make_report("recorded as male sex"), cfg);
  REQUIRE(caseins.has_value());
  CHECK(*caseins->technique == MatchTechnique::CaseInsensitive);
  CHECK(caseins->status == MatchStatus::Rescued);

  const auto negation =
      stage2_match(make_triple("Observation", "observation_chills", "absent"),
                   make_report("Patient denies chills today."), cfg);
  REQUIRE(negation.has_value());
  CHECK(*negation->technique == MatchTechnique::NegationPattern);

  const auto lemma =
      stage2_match(make_triple("Observation", "diaphoresis", "present"),
                   make_report("The patient was diaphoretic overnight."), cfg);
  REQUIRE(lemma.has_value());
  CHECK(*lemma->technique == MatchTechnique::Lemma);

  // The shipped irregular pair dyspneic <-> dyspnea.
  const auto irregular =
      stage2_match(make_triple("Observation", "dyspnea", "present"),
                   make_report("Patient remains dyspneic at rest."), cfg);
  REQUIRE(irregular.has_value());
  CHECK(*irregular->technique == MatchTechnique::Lemma);
}

TEST_CASE("stage 3: sentence negation, typo fix, and explicit fix examples") {
  const GroundingConfig cfg = GroundingConfig::defaults();

  const auto sentence =
      stage3_match(make_triple("pruritus", "status", "absent"),
                   make_report("Denies pruritus. Skin intact."), cfg);
  REQUIRE(sentence.has_value());
  CHECK(*sentence->technique == MatchTechnique::SentenceNegation);

  const auto typo =
      stage3_match(make_triple("medication", "administration", "denied"),
                   make_report("Pain medication deneid by patient."), cfg);
  REQUIRE(typo.has_value());
  CHECK(*typo->technique == MatchTechnique::TypoFix);
  CHECK(typo->score == doctest::Approx(83.33).epsilon(0.0002));

  const auto explicit_fix =
      stage3_match(make_triple("Patient", "history", "smoking"),
                   make_report("Documented smking history at intake."), cfg);
  REQUIRE(explicit_fix.has_value());
  CHECK(*explicit_fix->technique == MatchTechnique::ExplicitFix);
}

TEST_CASE("twelve-triple fixture exercises every technique exactly once") {
  const GroundingConfig cfg = GroundingConfig::defaults();
  const auto report = make_report(
      "Patient started FOLFIRINOX last month and tolerated it well. "
      "Bilirubin: 1.2mg/dL on admission. "
      "Reported 2-3 episodes of vomiting daily. "
      "Denies smoking. "
      "Recorded as male sex on intake. "
      "Denies chills. "
      "Overnight the patient was diaphoretic. "
      "A neoplasm was identified on imaging. "
      "Denies pruritus. "
      "Pain medication deneid by patient. "
      "Takes lorazepam qd.");

  const std::vector<EavTriple> triples = {
      make_triple("Regimen", "medication", "FOLFIRINOX"),            // Exact
      make_triple("Observation", "bilirubin", "1.2 mg/dL"),          // Regex
      make_triple("Regimen", "medication_alt", "FOLFRINOX"),         // Fuzzy
      make_triple("Symptom", "vomiting_frequency",
                  "vomiting 2-3 episodes"),                          // NGram
      make_triple("Patient", "smoking", "false"),                    // Boolean
      make_triple("Patient", "sex", "Male"),                         // CaseIns
      make_triple("Observation", "observation_chills", "absent"),    // NegPat
      make_triple("Observation", "diaphoresis", "present"),          // Lemma
      make_triple("Finding", "finding", "tumor"),                    // Synonym
      make_triple("pruritus", "status", "absent"),                   // SentNeg
      make_triple("medication", "administration", "denied"),         // TypoFix
      make_triple("prescription", "frequency", "once daily"),        // Explicit
  };

  const GroundingOutcome outcome = ground_triples(triples, report, cfg);
  REQUIRE(outcome.results.size() == 12);

  const std::vector<MatchTechnique> expected = {
      MatchTechnique::Exact,           MatchTechnique::Regex,
      MatchTechnique::Fuzzy,           MatchTechnique::NGram,
      MatchTechnique::BooleanInference, MatchTechnique::CaseInsensitive,
      MatchTechnique::NegationPattern, MatchTechnique::Lemma,
      MatchTechnique::Synonym,         MatchTechnique::SentenceNegation,
      MatchTechnique::TypoFix,         MatchTechnique::ExplicitFix,
  };
  for (std::size_t i = 0; i < expected.size(); ++i) {
    INFO("triple ", i, " value=", triples[i].value);
    REQUIRE(outcome.results[i].technique.has_value());
    CHECK(*outcome.results[i].technique == expected[i]);
  }
  CHECK(outcome.report.per_technique_counts.size() == 12);
  for (const auto& [technique, count] : outcome.report.per_technique_counts) {
    INFO(technique);
    CHECK(count == 1);
  }
  CHECK(outcome.report.grounded == 5);
  CHECK(outcome.report.rescued == 7);
  CHECK(outcome.report.hallucinated == 0);
}

TEST_CASE("ten-triple fixture reproduces the hand-computed rates") {
  const GroundingConfig cfg = GroundingConfig::defaults();
  const auto report = make_report(
      "The tumor was resected. Margins were clear. CA 19-9 was 1200 U/mL. "
      "Bilirubin was 1.2 mg/dL. FOLFIRINOX started. Patient denies chills.");

  const std::vector<EavTriple> triples = {
      make_triple("Condition", "finding", "tumor"),
      make_triple("Procedure", "status", "resected"),
      make_triple("Observation", "ca_19_9", "1200 U/mL"),
      make_triple("Observation", "bilirubin", "1.2 mg/dL"),
      make_triple("Medication", "drug", "FOLFIRINOX"),
      make_triple("Observation", "symptom", "chills"),
      make_triple("Condition", "finding", "Tumor"),                 // rescued
      make_triple("Observation", "observation_chills", "absent"),   // rescued
      make_triple("Observation", "x", "zzgarble"),                  // halluc.
      make_triple("Observation", "y", "qqnothing"),                 // halluc.
  };
  const GroundingOutcome outcome = ground_triples(triples, report, cfg);
  CHECK(outcome.report.grounded == 6);
  CHECK(outcome.report.rescued == 2);
  CHECK(outcome.report.hallucinated == 2);
  CHECK(outcome.report.coverage == 0.6);
  CHECK(outcome.report.correctness_rate == 0.8);
  CHECK(outcome.report.hallucination_rate == 0.2);
  CHECK(outcome.report.rescue_rate == 0.5);
}

TEST_CASE("empty input produces zero rates without division errors") {
  const GroundingConfig cfg = GroundingConfig::defaults();
  const auto outcome = ground_triples({}, make_report("Some text."), cfg);
  CHECK(outcome.report.triples == 0);
  CHECK(outcome.report.coverage == 0.0);
  CHECK(outcome.report.rescue_rate == 0.0);
}

TEST_CASE("adding stages never downgrades a status") {
  const GroundingConfig cfg = GroundingConfig::defaults();
  const auto report = make_report(
      "Patient started FOLFIRINOX. Denies smoking and chills. Recorded as "
      "male sex. The patient was diaphoretic. A neoplasm was identified. "
      "Takes lorazepam qd. Pain medication deneid by patient. Bilirubin: "
      "1.2mg/dL measured.");

  auto rank = [](MatchStatus s) {
    return s == MatchStatus::Grounded ? 2 : s == MatchStatus::Rescued ? 1 : 0;
  };

  std::mt19937 rng(42);
  const std::vector<std::string> entities = {"Patient", "Observation",
                                             "pruritus", "Finding"};
  const std::vector<std::string> attributes = {
      "smoking", "observation_chills", "sex", "diaphoresis", "finding",
      "frequency", "administration", "bilirubin"};
  const std::vector<std::string> values = {
      "FOLFIRINOX",  "FOLFRINOX", "false",  "absent", "Male",   "male",
      "present",     "tumor",     "denied", "once daily", "1.2 mg/dL",
      "zzmissing",   "true",      "neoplasm"};

  for (int iter = 0; iter < 500; ++iter) {
    const auto t = make_triple(entities[rng() % entities.size()],
                               attributes[rng() % attributes.size()],
                               values[rng() % values.size()]);
    const auto s1 = ground_triples({t}, report, cfg, 1).results[0].status;
    const auto s2 = ground_triples({t}, report, cfg, 2).results[0].status;
    const auto s3 = ground_triples({t}, report, cfg, 3).results[0].status;
    CHECK(rank(s2) >= rank(s1));
    CHECK(rank(s3) >= rank(s2));
    // A stage-1 success is never reclassified by later stages.
    if (s1 == MatchStatus::Grounded) CHECK(s3 == MatchStatus::Grounded);
  }
}

TEST_CASE("negation templates flip boolean-inference polarity") {
  const GroundingConfig cfg = GroundingConfig::defaults();
  const std::vector<std::string> terms = {"smoking", "chills", "fever"};
  const std::vector<std::string> cues = {"denies", "no"};

  for (const std::string& cue : cues) {
    for (const std::string& term : terms) {
      const auto report =
          make_report("Assessment note: " + cue + " " + term + " currently.");
      // Asserting the finding present must NOT ground via boolean inference.
      const auto present =
          stage1_match(make_triple("Patient", term, "present"), report, cfg);
      CHECK_FALSE(present.has_value());
      // Asserting it absent must ground.
      const auto absent =
          stage1_match(make_triple("Patient", term, "absent"), report, cfg);
      REQUIRE(absent.has_value());
      CHECK(*absent->technique == MatchTechnique::BooleanInference);
    }
  }
}

TEST_CASE("status counts always sum to the input size") {
  const GroundingConfig cfg = GroundingConfig::defaults();
  const auto report = make_report("FOLFIRINOX given. Denies chills. male sex.");
  std::mt19937 rng(5);
  const std::vector<std::string> values = {"FOLFIRINOX", "male", "absent",
                                           "chills", "zzz", "Male"};
  for (int iter = 0; iter < 50; ++iter) {
    std::vector<EavTriple> triples;
    const std::size_t n = rng() % 12;
    for (std::size_t i = 0; i < n; ++i) {
      triples.push_back(
          make_triple("Patient", "observation_chills", values[rng() % values.size()]));
    }
    const auto outcome = ground_triples(triples, report, cfg);
    CHECK(outcome.report.grounded + outcome.report.rescued +
              outcome.report.hallucinated ==
          triples.size());
    CHECK(outcome.results.size() == triples.size());
  }
}

TEST_CASE("hallucinated results carry no span, stage, or technique") {
  const GroundingConfig cfg = GroundingConfig::defaults();
  const auto outcome = ground_triples({make_triple("X", "y", "zzabsent-term")},
                                      make_report("Nothing relevant here."), cfg);
  const MatchResult& r = outcome.results[0];
  CHECK(r.status == MatchStatus::Hallucinated);
  CHECK_FALSE(r.stage.has_value());
  CHECK_FALSE(r.technique.has_value());
  CHECK_FALSE(r.matched_span.has_value());
}

TEST_CASE("table files extend the built-in configuration") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "kgf_tables";
  fs::create_directories(dir);
  auto write = [&](const std::string& name, const std::string& content) {
    std::ofstream out(dir / name);
    out << content;
    return (dir / name).string();
  };

  GroundingConfig cfg = GroundingConfig::defaults();
  load_negation_cues(cfg, write("cues.txt", "# cues\nrefuses\n"));
  CHECK(std::find(cfg.negation_cues.begin(), cfg.negation_cues.end(),
                  "refuses") != cfg.negation_cues.end());

  load_synonyms(cfg, write("syn.txt", "lesion|abnormality|spot\n"));
  REQUIRE(cfg.synonyms.count("lesion") == 1);
  CHECK(cfg.synonyms["lesion"].size() == 2);
  CHECK(cfg.synonyms.count("abnormality") == 1);  // groups are bidirectional

  load_lemma_rules(cfg, write("lem.txt", "otic>osis\n"));
  CHECK(lemmatize_token("necrotic", cfg) == "necrosis");

  load_irregular_lemmas(cfg, write("irr.txt", "icterus|jaundice\n"));
  CHECK(lemmatize_token("icterus", cfg) == "jaundice");

  load_explicit_fixes(cfg, write("fix.txt", "nuasea|nausea\n"));
  CHECK(cfg.explicit_fixes.at("nuasea") == "nausea");

  CHECK_THROWS_AS(load_synonyms(cfg, "/nonexistent/syn.txt"), IoError);
}

TEST_CASE("grounding artifacts round-trip through json") {
  const GroundingConfig cfg = GroundingConfig::defaults();
  const auto report = make_report("FOLFIRINOX given. zz.");
  const auto outcome = ground_triples(
      {make_triple("A", "a", "FOLFIRINOX"), make_triple("B", "b", "missingzz")},
      report, cfg);
  const std::string json_text = to_json(outcome);
  const GroundingReport restored = report_from_json(json_text);
  CHECK(restored.triples == 2);
  CHECK(restored.grounded == 1);
  CHECK(restored.hallucinated == 1);
  const auto statuses = statuses_from_json(json_text);
  REQUIRE(statuses.size() == 2);
  CHECK(statuses[0] == MatchStatus::Grounded);
  CHECK(statuses[1] == MatchStatus::Hallucinated);
}
