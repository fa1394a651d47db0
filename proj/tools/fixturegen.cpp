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

// Regenerates fixtures/mock from fixtures/corpus: every completion the
// offline pipeline will request gets a scripted response file named by its
// request hash. Usage: kgf-fixturegen <corpus_dir> <mock_dir>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "kgf/agents.hpp"
#include "kgf/corpus.hpp"
#include "kgf/extraction.hpp"
#include "kgf/prompts.hpp"
#include "kgf/relations.hpp"
#include "kgf/text.hpp"

namespace fs = std::filesystem;
using kgf::agents::AgentRole;

namespace {

struct PatientScript {
  std::string extraction;
  std::vector<std::string> relate_lines;        // extractor
  std::vector<std::string> refine_lines;        // refiner
  std::vector<std::string> conservative_lines;  // adversary
  // judge plausibility per "head|predicate|tail" (post-normalization form
  // is identical for these fixtures); default 0.9.
  std::map<std::string, double> judge_scores;
  // perturbation indices (1-based) answered CONTRADICTORY, per line.
  std::map<std::string, std::set<int>> contradictory;
};

std::map<std::string, PatientScript> build_scripts() {
  std::map<std::string, PatientScript> scripts;

  PatientScript p0;
  p0.extraction =
      "entity=Patient|type=Patient|attribute=ca_19_9|value=1200|probs=0.97,0.94\n"
      "entity=Patient|type=Patient|attribute=weight_loss|value=12|probs=0.95\n"
      "entity=Observation|type=Observation|attribute=hasLabResult|value=CA 19-9|probs=0.99,0.98\n"
      "entity=CT Scan|type=ImagingStudy|attribute=visualizes|value=pancreatic mass\n"
      "entity=Patient|type=Patient|attribute=smoking|value=false|probs=0.9\n"
      "entity=FOLFIRINOX|type=MedicationStatement|attribute=treatment_status|value=initiated\n"
      "entity=Patient|type=Patient|attribute=observation_chills|value=absent\n"
      "entity=Observation|type=Observation|attribute=hypertension_history|value=hypertension\n"
      "this line is deliberately malformed\n";
  p0.relate_lines = {
      "CT Scan | visualizes | Pancreatic Mass",
      "FOLFIRINOX | treats | pancreatic ductal adenocarcinoma",
      "CA 19-9 | indicates | ElevatedCA19_9",
      "Patient | experienced | weight loss",
  };
  p0.refine_lines = {
      "CT Scan | visualizes | Pancreatic Mass",
      "FOLFIRINOX | treats | pancreatic ductal adenocarcinoma",
      "CA 19-9 | indicates | ElevatedCA19_9",
  };
  p0.conservative_lines = {
      "CT Scan | visualizes | Pancreatic Mass",
      "FOLFIRINOX | treats | pancreatic ductal adenocarcinoma",
  };
  p0.judge_scores = {
      {"CT Scan | visualizes | Pancreatic Mass", 0.85},
      {"FOLFIRINOX | treats | pancreatic ductal adenocarcinoma", 0.92},
      {"CA 19-9 | indicates | ElevatedCA19_9", 0.88},
      {"Patient | experienced | weight_loss", 0.4},
  };
  p0.contradictory = {{"CA 19-9 | indicates | ElevatedCA19_9", {1, 2}}};
  scripts["p0"] = std::move(p0);

  PatientScript p1;
  p1.extraction =
      "entity=Procedure|type=Procedure|attribute=procedure_name|value=surgical resection\n"
      "entity=Biopsy|type=Procedure|attribute=confirms|value=adenocarcinoma\n"
      "entity=Patient|type=Patient|attribute=sex|value=Male\n"
      "entity=Patient|type=Patient|attribute=diaphoresis|value=present\n"
      "entity=Patient|type=Patient|attribute=observation_pruritus|value=absent\n"
      "entity=Lorazepam|type=MedicationStatement|attribute=frequency|value=once daily\n"
      "entity=Symptom|type=Observation|attribute=vomiting_frequency|value=vomiting 2-3 episodes\n"
      "entity=Observation|type=Observation|attribute=fever_measurement|value=39.9\n";
  p1.relate_lines = {
      "Biopsy | confirms | adenocarcinoma",
      "Procedure | treats | primary tumor",
  };
  p1.refine_lines = {
      "Biopsy | verifies | adenocarcinoma",
      "Procedure | treats | primary tumor",
  };
  p1.conservative_lines = {
      "Biopsy | confirms | adenocarcinoma",
  };
  p1.judge_scores = {
      {"Biopsy | confirms | adenocarcinoma", 0.9},
      {"Procedure | treats | primary tumor", 0.88},
  };
  scripts["p1"] = std::move(p1);

  PatientScript p2;
  p2.extraction =
      "entity=HER2 Status|type=Observation|attribute=her2|value=overexpressed\n"
      "entity=Ki-67 Index|type=Observation|attribute=ki67_index|value=25\n"
      "entity=Biopsy|type=Procedure|attribute=confirms|value=TumorType\n"
      "entity=TumorType|type=Condition|attribute=consistent_with|value=invasive ductal carcinoma\n"
      "entity=Tamoxifen|type=MedicationStatement|attribute=medication_status|value=discontinued\n"
      "entity=Patient|type=Patient|attribute=er_status|value=positive\n";
  p2.relate_lines = {
      "HER2 Status | determines | Trastuzumab Eligibility",
      "Biopsy | confirms | TumorType",
      "Biopsy | verifies | TumorType",
      "Ki-67 Index | indicates | High Proliferation Rate",
  };
  p2.refine_lines = {
      "HER2 Status | determines | Trastuzumab Eligibility",
      "Biopsy | verifies | TumorType",
      "Ki-67 Index | indicates | High Proliferation Rate",
      "Tamoxifen | discontinued_after | review",  // refiner-only, flagged
  };
  p2.conservative_lines = {
      "HER2 Status | determines | Trastuzumab Eligibility",
      "Biopsy | confirms | TumorType",
  };
  p2.judge_scores = {
      {"HER2 Status | determines | Trastuzumab Eligibility", 0.92},
      {"Biopsy | confirms | TumorType", 0.9},
      {"Biopsy | verifies | TumorType", 0.89},
      {"Ki-67 Index | indicates | High Proliferation Rate", 0.85},
  };
  scripts["p2"] = std::move(p2);

  PatientScript p3;
  p3.extraction =
      "entity=Mammogram|type=ImagingStudy|attribute=visualizes|value=suspicious lesion\n"
      "entity=Lumpectomy|type=Procedure|attribute=status|value=performed\n"
      "entity=Observation|type=Observation|attribute=observation_nausea|value=absent\n"
      "entity=Observation|type=Observation|attribute=ca_15_3|value=22 U/mL\n"
      "entity=Patient|type=Patient|attribute=estrogen_exposure|value=documented\n";
  p3.relate_lines = {
      "Mammogram | visualizes | suspicious lesion",
      "Lumpectomy | treats | suspicious lesion",
  };
  p3.refine_lines = {
      "Mammogram | visualizes | suspicious lesion",
      "Lumpectomy | treats | suspicious lesion",
  };
  p3.conservative_lines = {
      "Mammogram | visualizes | suspicious lesion",
      "Mammogram | documents | left breast",  // adversary-only, flagged
  };
  p3.judge_scores = {
      {"Mammogram | visualizes | suspicious lesion", 0.9},
      {"Lumpectomy | treats | suspicious lesion", 0.9},
  };
  scripts["p3"] = std::move(p3);
  return scripts;
}

class FixtureWriter {
 public:
  explicit FixtureWriter(fs::path dir) : dir_(std::move(dir)) {
    fs::create_directories(dir_);
  }

  void write(AgentRole role, const std::string& prompt, const std::string& body) {
    const fs::path file =
        dir_ / kgf::agents::MockCompletionProvider::fixture_filename(role, prompt);
    std::ofstream out(file, std::ios::binary | std::ios::trunc);
    out << body;
    ++count_;
  }

  std::size_t count() const { return count_; }

 private:
  fs::path dir_;
  std::size_t count_ = 0;
};

std::string join_lines(const std::vector<std::string>& lines) {
  std::string out;
  for (const std::string& line : lines) {
    out += line;
    out += '\n';
  }
  return out;
}

// The normalized "head | predicate | tail" form used to key judge scores.
std::string key_of(const kgf::relations::RelationTriple& t) {
  return t.head + " | " + t.predicate + " | " + t.tail;
}

}  // namespace

int main(int argc, char** argv) {
  const std::string corpus_dir = argc > 1 ? argv[1] : "fixtures/corpus";
  const std::string mock_dir = argc > 2 ? argv[2] : "fixtures/mock";

  const auto scripts = build_scripts();
  const kgf::corpus::LoadResult loaded = kgf::corpus::load_corpus(corpus_dir);
  FixtureWriter writer(mock_dir);

  for (const kgf::corpus::ClinicalReport& report : loaded.reports) {
    auto it = scripts.find(report.patient_id);
    if (it == scripts.end()) {
      std::cerr << "no script for patient " << report.patient_id << ", skipped\n";
      continue;
    }
    const PatientScript& script = it->second;

    // Extraction.
    const std::string extract_prompt =
        kgf::prompts::render_prompt("extract_eav", {{"doc", report.narrative}});
    writer.write(AgentRole::Extractor, extract_prompt, script.extraction);

    // The pipeline derives known terms from the parsed extraction.
    const auto eavs = kgf::extraction::parse_extraction_response(
                          script.extraction, report.patient_id, "mock")
                          .triples;
    std::set<std::string> entities;
    std::set<std::string> attributes;
    for (const auto& eav : eavs) {
      entities.insert(eav.entity);
      attributes.insert(eav.attribute);
    }
    auto joined = [](const std::set<std::string>& s) {
      std::vector<std::string> v(s.begin(), s.end());
      return kgf::text::join(v, ", ");
    };
    const std::map<std::string, std::string> base_ctx = {
        {"doc", report.narrative},
        {"entities", joined(entities)},
        {"attributes", joined(attributes)}};

    // Relation sets for the three consensus roles.
    writer.write(AgentRole::Extractor,
                 kgf::prompts::render_prompt("relate", base_ctx),
                 join_lines(script.relate_lines));
    writer.write(AgentRole::Refiner,
                 kgf::prompts::render_prompt("relate_refine", base_ctx),
                 join_lines(script.refine_lines));
    writer.write(AgentRole::Adversary,
                 kgf::prompts::render_prompt("relate_conservative", base_ctx),
                 join_lines(script.conservative_lines));

    // Self-consistency variants: variant k drops the k-th line.
    for (int k = 1; k <= 5; ++k) {
      auto ctx = base_ctx;
      ctx["variant"] = std::to_string(k);
      std::vector<std::string> lines;
      for (std::size_t i = 0; i < script.relate_lines.size(); ++i) {
        if (static_cast<int>(i) + 1 == k) continue;
        lines.push_back(script.relate_lines[i]);
      }
      writer.write(AgentRole::Extractor,
                   kgf::prompts::render_prompt("relate_variant", ctx),
                   join_lines(lines));
    }

    // Judge and adversary fixtures keyed on the normalized candidates.
    const auto candidates = kgf::relations::parse_relation_response(
        join_lines(script.relate_lines), report.patient_id, "mock", eavs);
    for (const auto& candidate : candidates) {
      const std::string key = key_of(candidate);
      double score = 0.9;
      for (const auto& [raw_key, s] : script.judge_scores) {
        if (raw_key == key) score = s;
      }
      // Raw-line keys may differ after normalization; fall back on head+pred.
      if (script.judge_scores.count(key) == 0) {
        for (const auto& [raw_key, s] : script.judge_scores) {
          if (kgf::text::starts_with(raw_key, candidate.head + " | " +
                                                   candidate.predicate)) {
            score = s;
          }
        }
      }
      char buf[16];
      std::snprintf(buf, sizeof(buf), "%.2f", score);
      writer.write(AgentRole::Judge,
                   kgf::prompts::render_prompt(
                       "judge", {{"head", candidate.head},
                                 {"predicate", candidate.predicate},
                                 {"tail", candidate.tail},
                                 {"context", report.narrative}}),
                   std::string(buf) + "\n");

      std::set<int> contradictory;
      for (const auto& [raw_key, indices] : script.contradictory) {
        if (kgf::text::starts_with(raw_key,
                                   candidate.head + " | " + candidate.predicate)) {
          contradictory = indices;
        }
      }
      for (int i = 1; i <= 5; ++i) {
        const std::string verdict =
            contradictory.count(i) > 0 ? "CONTRADICTORY" : "CONSISTENT";
        writer.write(
            AgentRole::Adversary,
            kgf::prompts::render_prompt("adversary",
                                        {{"head", candidate.head},
                                         {"predicate", candidate.predicate},
                                         {"tail", candidate.tail},
                                         {"context", report.narrative},
                                         {"index", std::to_string(i)}}),
            "variant: " + candidate.head + " | not_" + candidate.predicate +
                " | " + candidate.tail + "\nverdict: " + verdict + "\n");
      }
    }
  }

  std::cout << "wrote " << writer.count() << " mock fixtures to " << mock_dir
            << "\n";
  return 0;
}
