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

#include "kgf/graph/encode.hpp"

#include <cctype>

#include "kgf/errors.hpp"
#include "kgf/text.hpp"

namespace kgf::graph {

std::string sanitize_local(std::string_view s) {
  std::string out;
  bool pending_sep = false;
  for (char c : text::casefold(text::trim(s))) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      if (pending_sep && !out.empty()) out += '_';
      pending_sep = false;
      out += c;
    } else {
      pending_sep = true;
    }
  }
  return out.empty() ? "term" : out;
}

Iri entity_iri(const std::string& patient_id, const std::string& entity,
               const EncodePolicy& policy) {
  return Iri(policy.instance_base + sanitize_local(patient_id) + "/" +
             sanitize_local(entity));
}

Literal sniff_literal(const std::string& value) {
  const std::string trimmed(text::trim(value));
  const std::string cf = text::casefold(trimmed);
  if (cf == "true" || cf == "false") {
    return Literal{cf, LiteralType::Boolean};
  }
  if (text::is_decimal(trimmed)) {
    return Literal{trimmed, LiteralType::Decimal};
  }
  return Literal{trimmed, LiteralType::String};
}

std::vector<RdfTriple> encode_eav(
    const extraction::EavTriple& eav,
    const std::map<std::string, ontology::ConceptMapping>& mappings_by_attr,
    const EncodePolicy& policy) {
  std::vector<RdfTriple> out;
  const Iri entity = entity_iri(eav.source.patient_id, eav.entity, policy);

  out.push_back(
      {entity, rdf_type(),
       Iri(policy.fhir_base + extraction::to_string(eav.fhir_type))});

  Iri attribute;
  auto it = mappings_by_attr.find(text::casefold(text::trim(eav.attribute)));
  if (it != mappings_by_attr.end()) {
    attribute = Iri(it->second.term.uri);
  } else if (policy.strict) {
    throw ContentError("strict encoding: unmapped attribute \"" +
                       eav.attribute + "\"");
  } else {
    attribute = Iri(policy.attr_base + sanitize_local(eav.attribute));
  }

  const Literal value = sniff_literal(eav.value);
  out.push_back({entity, attribute, value});

  if (value.lexical != eav.value) {
    out.push_back({entity, Iri(policy.prov_base + sanitize_local(eav.attribute)),
                   Literal{eav.value, LiteralType::String}});
  }
  return out;
}

}  // namespace kgf::graph
