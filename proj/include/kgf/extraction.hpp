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

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "kgf/agents.hpp"
#include "kgf/corpus.hpp"

namespace kgf::extraction {

enum class FhirResourceType {
  Patient,
  Condition,
  Observation,
  Procedure,
  MedicationStatement,
  ImagingStudy,
  DiagnosticReport,
  CarePlan,
  Practitioner,
  Specimen,
  Unknown,
};

std::string to_string(FhirResourceType t);
// Exact enum-name lookup (case-insensitive); no hit -> nullopt.
std::optional<FhirResourceType> fhir_type_from_string(std::string_view s);

struct SourceRef {
  std::string patient_id;
  std::optional<std::pair<std::size_t, std::size_t>> span;
};

struct EavTriple {
  std::string entity;
  FhirResourceType fhir_type = FhirResourceType::Unknown;
  std::string attribute;
  std::string value;
  std::optional<std::vector<double>> value_token_probs;
  std::optional<double> entropy;  // present iff value_token_probs present
  SourceRef source;
  std::string extractor_id;
};

struct ExtractionResult {
  std::vector<EavTriple> triples;
  std::size_t skipped_records = 0;
};

// Alias/keyword lookup (case-insensitive, trimmed); no hit -> Unknown.
FhirResourceType assign_fhir_type(std::string_view entity);

// Natural-log Shannon entropy summed over per-token probabilities:
// sum of -p*ln(p). Every p must lie in (0, 1]; empty input is an error.
double value_entropy(const std::vector<double>& probs);

// Averaged variant: value_entropy / count. Offered behind a config switch
// so long values do not dominate the threshold.
double value_entropy_mean(const std::vector<double>& probs);

// Parses line-delimited tagged records:
//   entity=<e>|type=<t>|attribute=<a>|value=<v>[|probs=p,p,...][|span=a:b]
// Unparseable records are skipped and counted. A non-empty response with
// zero parseable records throws ContentError carrying the raw text.
ExtractionResult parse_extraction_response(const std::string& response_text,
                                           const std::string& patient_id,
                                           const std::string& extractor_id,
                                           bool entropy_mean = false);

// Renders the extraction prompt, calls the provider, parses the response.
ExtractionResult extract_eav(const corpus::ClinicalReport& report,
                             agents::CompletionProvider& extractor,
                             bool entropy_mean = false);

struct UncertaintyPartition {
  std::vector<EavTriple> confident;
  std::vector<EavTriple> flagged;  // entropy present and > delta_h
  std::vector<EavTriple> unknown;  // entropy absent
};

UncertaintyPartition flag_uncertain(const std::vector<EavTriple>& triples,
                                    double delta_h);

// Stage artifact persistence (one record per triple).
std::string to_json(const std::vector<EavTriple>& triples);
std::vector<EavTriple> from_json(const std::string& json_text);

}  // namespace kgf::extraction
