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
#include <string>
#include <vector>

#include "kgf/extraction.hpp"
#include "kgf/graph/store.hpp"
#include "kgf/ontology.hpp"

namespace kgf::graph {

struct EncodePolicy {
  std::string instance_base = "http://example.org/kg#ent/";
  std::string attr_base = "http://example.org/kg#attr/";
  std::string rel_base = "http://example.org/kg#rel/";
  std::string class_base = "http://example.org/kg#class/";
  std::string prov_base = "http://example.org/kg#raw/";
  std::string fhir_base = "http://hl7.org/fhir/";
  // Strict mode rejects EAVs whose attribute has no vocabulary mapping;
  // lenient mode mints an artifact-namespace IRI instead.
  bool strict = false;
};

// Lowercases and maps non-alphanumerics to '_' (squeezed).
std::string sanitize_local(std::string_view s);

Iri entity_iri(const std::string& patient_id, const std::string& entity,
               const EncodePolicy& policy);

// Numeric sniffing: full decimal forms become decimal literals, true/false
// boolean; everything else stays a string.
Literal sniff_literal(const std::string& value);

// Emits the entity type assertion plus the attribute edge; mapped
// attributes use their minted vocabulary URI. When the sniffed literal's
// lexical form differs from the raw value a provenance triple keeps the
// original.
std::vector<RdfTriple> encode_eav(
    const extraction::EavTriple& eav,
    const std::map<std::string, ontology::ConceptMapping>& mappings_by_attr,
    const EncodePolicy& policy);

}  // namespace kgf::graph
