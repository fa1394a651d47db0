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

#include "kgf/extraction.hpp"

#include <cmath>
#include <cstdlib>
#include <map>

#include "json.hpp"
#include "kgf/errors.hpp"
#include "kgf/prompts.hpp"
#include "kgf/text.hpp"

namespace kgf::extraction {

using nlohmann::json;

std::string to_string(FhirResourceType t) {
  switch (t) {
    case FhirResourceType::Patient: return "Patient";
    case FhirResourceType::Condition: return "Condition";
    case FhirResourceType::Observation: return "Observation";
    case FhirResourceType::Procedure: return "Procedure";
    case FhirResourceType::MedicationStatement: return "MedicationStatement";
    case FhirResourceType::ImagingStudy: return "ImagingStudy";
    case FhirResourceType::DiagnosticReport: return "DiagnosticReport";
    case FhirResourceType::CarePlan: return "CarePlan";
    case FhirResourceType::Practitioner: return "Practitioner";
    case FhirResourceType::Specimen: return "Specimen";
    case FhirResourceType::Unknown: return "Unknown";
  }
  return "Unknown";
}

std::optional<FhirResourceType> fhir_type_from_string(std::string_view s) {
  static const std::map<std::string, FhirResourceType> names = {
      {"patient", FhirResourceType::Patient},
      {"condition", FhirResourceType::Condition},
      {"observation", FhirResourceType::Observation},
      {"procedure", FhirResourceType::Procedure},
      {"medicationstatement", FhirResourceType::MedicationStatement},
      {"imagingstudy", FhirResourceType::ImagingStudy},
      {"diagnosticreport", FhirResourceType::DiagnosticReport},
      {"careplan", FhirResourceType::CarePlan},
      {"practitioner", FhirResourceType::Practitioner},
      {"specimen", FhirResourceType::Specimen},
      {"unknown", FhirResourceType::Unknown},
  };
  auto it = names.find(text::casefold(text::trim(s)));
  if (it == names.end()) return std::nullopt;
  return it->second;
}

FhirResourceType assign_fhir_type(std::string_view entity) {
  const std::string key = text::casefold(text::trim(entity));
  if (auto exact = fhir_type_from_string(key)) return *exact;

  // Alias table for common clinical surface forms, spot-checked against
  // the FHIR resource definitions.
  static const std::map<std::string, FhirResourceType> aliases = {
      {"ct scan", FhirResourceType::ImagingStudy},
      {"ct", FhirResourceType::ImagingStudy},
      {"mri", FhirResourceType::ImagingStudy},
      {"pet scan", FhirResourceType::ImagingStudy},
      {"ultrasound", FhirResourceType::ImagingStudy},
      {"x-ray", FhirResourceType::ImagingStudy},
      {"mammogram", FhirResourceType::ImagingStudy},
      {"biopsy", FhirResourceType::Procedure},
      {"surgery", FhirResourceType::Procedure},
      {"surgical resection", FhirResourceType::Procedure},
      {"resection", FhirResourceType::Procedure},
      {"whipple procedure", FhirResourceType::Procedure},
      {"mastectomy", FhirResourceType::Procedure},
      {"lumpectomy", FhirResourceType::Procedure},
      {"chemotherapy", FhirResourceType::MedicationStatement},
      {"medication", FhirResourceType::MedicationStatement},
      {"drug", FhirResourceType::MedicationStatement},
      {"regimen", FhirResourceType::MedicationStatement},
      {"lab result", FhirResourceType::Observation},
      {"lab test", FhirResourceType::Observation},
      {"vital sign", FhirResourceType::Observation},
      {"tumor marker", FhirResourceType::Observation},
      {"ca 19-9", FhirResourceType::Observation},
      {"her2 status", FhirResourceType::Observation},
      {"ki-67 index", FhirResourceType::Observation},
      {"diagnosis", FhirResourceType::Condition},
      {"tumor", FhirResourceType::Condition},
      {"mass", FhirResourceType::Condition},
      {"carcinoma", FhirResourceType::Condition},
      {"adenocarcinoma", FhirResourceType::Condition},
      {"metastasis", FhirResourceType::Condition},
      {"pathology report", FhirResourceType::DiagnosticReport},
      {"radiology report", FhirResourceType::DiagnosticReport},
      {"treatment plan", FhirResourceType::CarePlan},
      {"care plan", FhirResourceType::CarePlan},
      {"follow-up", FhirResourceType::CarePlan},
      {"oncologist", FhirResourceType::Practitioner},
      {"surgeon", FhirResourceType::Practitioner},
      {"surgical oncologist", FhirResourceType::Practitioner},
      {"radiologist", FhirResourceType::Practitioner},
      {"specimen", FhirResourceType::Specimen},
      {"tissue sample", FhirResourceType::Specimen},
  };
  auto it = aliases.find(key);
  if (it != aliases.end()) return it->second;
  return FhirResourceType::Unknown;
}

double value_entropy(const std::vector<double>& probs) {
  if (probs.empty()) throw DomainError("value_entropy: empty probability list");
  double h = 0.0;
  for (double p : probs) {
    if (p <= 0.0 || p > 1.0) {
      throw DomainError("value_entropy: probability out of (0,1]: " +
                        std::to_string(p));
    }
    h -= p * std::log(p);
  }
  // -p*log(p) can round to -0.0 at p == 1.
  return h == 0.0 ? 0.0 : h;
}

double value_entropy_mean(const std::vector<double>& probs) {
  return value_entropy(probs) / static_cast<double>(probs.size());
}

namespace {

// Parses one `key=value|key=value` record; returns nullopt when malformed.
std::optional<EavTriple> parse_record(std::string_view line,
                                      const std::string& patient_id,
                                      const std::string& extractor_id,
                                      bool entropy_mean) {
  std::map<std::string, std::string> fields;
  for (const std::string& part : text::split(line, '|')) {
    const std::size_t eq = part.find('=');
    if (eq == std::string::npos) return std::nullopt;
    fields[std::string(text::trim(part.substr(0, eq)))] =
        std::string(text::trim(std::string_view(part).substr(eq + 1)));
  }
  if (fields["entity"].empty() || fields["attribute"].empty() ||
      fields["value"].empty()) {
    return std::nullopt;
  }
  EavTriple t;
  t.entity = fields["entity"];
  t.attribute = fields["attribute"];
  t.value = fields["value"];
  t.source.patient_id = patient_id;
  t.extractor_id = extractor_id;

  if (auto declared = fhir_type_from_string(fields["type"])) {
    t.fhir_type = *declared;
  } else {
    t.fhir_type = assign_fhir_type(t.entity);
  }

  if (!fields["probs"].empty()) {
    std::vector<double> probs;
    for (const std::string& s : text::split(fields["probs"], ',')) {
      char* end = nullptr;
      const double p = std::strtod(s.c_str(), &end);
      if (end == s.c_str()) return std::nullopt;
      probs.push_back(p);
    }
    try {
      t.entropy = entropy_mean ? value_entropy_mean(probs) : value_entropy(probs);
    } catch (const DomainError&) {
      return std::nullopt;
    }
    t.value_token_probs = std::move(probs);
  }

  if (!fields["span"].empty()) {
    const auto parts = text::split(fields["span"], ':');
    if (parts.size() == 2 && text::is_integer(parts[0]) &&
        text::is_integer(parts[1])) {
      t.source.span = {std::strtoul(parts[0].c_str(), nullptr, 10),
                       std::strtoul(parts[1].c_str(), nullptr, 10)};
    }
  }
  return t;
}

}  // namespace

ExtractionResult parse_extraction_response(const std::string& response_text,
                                           const std::string& patient_id,
                                           const std::string& extractor_id,
                                           bool entropy_mean) {
  ExtractionResult result;
  if (text::trim(response_text).empty()) return result;

  bool saw_candidate = false;
  for (const std::string& raw : text::split(response_text, '\n')) {
    std::string_view line = text::trim(raw);
    if (line.empty() || line[0] == '#') continue;
    saw_candidate = true;
    if (auto triple =
            parse_record(line, patient_id, extractor_id, entropy_mean)) {
      result.triples.push_back(std::move(*triple));
    } else {
      ++result.skipped_records;
    }
  }
  if (saw_candidate && result.triples.empty()) {
    throw ContentError("wholly unparseable extraction response: " +
                       response_text);
  }
  return result;
}

ExtractionResult extract_eav(const corpus::ClinicalReport& report,
                             agents::CompletionProvider& extractor,
                             bool entropy_mean) {
  agents::AgentRequest request;
  request.role = agents::AgentRole::Extractor;
  request.prompt = prompts::render_prompt("extract_eav", {{"doc", report.narrative}});
  request.temperature = 0.0;
  request.want_token_probs = true;
  const agents::AgentResponse response = extractor.complete(request);
  return parse_extraction_response(response.text, report.patient_id,
                                   extractor.id(), entropy_mean);
}

UncertaintyPartition flag_uncertain(const std::vector<EavTriple>& triples,
                                    double delta_h) {
  if (delta_h < 0.0) throw DomainError("flag_uncertain: delta_h must be >= 0");
  UncertaintyPartition p;
  for (const EavTriple& t : triples) {
    if (!t.entropy.has_value()) {
      p.unknown.push_back(t);
    } else if (*t.entropy > delta_h) {
      p.flagged.push_back(t);
    } else {
      p.confident.push_back(t);
    }
  }
  return p;
}

std::string to_json(const std::vector<EavTriple>& triples) {
  json arr = json::array();
  for (const EavTriple& t : triples) {
    json rec;
    rec["entity"] = t.entity;
    rec["fhir_type"] = to_string(t.fhir_type);
    rec["attribute"] = t.attribute;
    rec["value"] = t.value;
    rec["patient_id"] = t.source.patient_id;
    rec["extractor_id"] = t.extractor_id;
    if (t.entropy) rec["entropy"] = *t.entropy;
    if (t.value_token_probs) rec["probs"] = *t.value_token_probs;
    if (t.source.span) {
      rec["span"] = {t.source.span->first, t.source.span->second};
    }
    arr.push_back(std::move(rec));
  }
  return arr.dump(2) + "\n";
}

std::vector<EavTriple> from_json(const std::string& json_text) {
  std::vector<EavTriple> out;
  json arr;
  try {
    arr = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("bad extraction artifact: ") + e.what());
  }
  for (const auto& rec : arr) {
    EavTriple t;
    t.entity = rec.at("entity").get<std::string>();
    t.attribute = rec.at("attribute").get<std::string>();
    t.value = rec.at("value").get<std::string>();
    t.source.patient_id = rec.value("patient_id", "");
    t.extractor_id = rec.value("extractor_id", "");
    t.fhir_type = fhir_type_from_string(rec.value("fhir_type", "Unknown"))
                      .value_or(FhirResourceType::Unknown);
    if (rec.contains("entropy")) t.entropy = rec["entropy"].get<double>();
    if (rec.contains("probs")) {
      t.value_token_probs = rec["probs"].get<std::vector<double>>();
    }
    if (rec.contains("span")) {
      t.source.span = {rec["span"][0].get<std::size_t>(),
                       rec["span"][1].get<std::size_t>()};
    }
    out.push_back(std::move(t));
  }
  return out;
}

}  // namespace kgf::extraction
