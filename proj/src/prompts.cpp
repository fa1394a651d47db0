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

#include "kgf/prompts.hpp"

#include "kgf/errors.hpp"

namespace kgf::prompts {

namespace {

const std::map<std::string, std::string>& registry() {
  static const std::map<std::string, std::string> templates = {
      {"extract_eav",
       "You are a clinical information extraction agent. Read the oncology "
       "narrative below and list every entity-attribute-value fact you can "
       "support. Use one record per line in the exact form:\n"
       "entity=<entity>|type=<resource type>|attribute=<attribute>|value=<value>\n"
       "Resource types: Patient, Condition, Observation, Procedure, "
       "MedicationStatement, ImagingStudy, DiagnosticReport, CarePlan, "
       "Practitioner, Specimen, Unknown.\n"
       "Narrative:\n{doc}"},
      {"relate",
       "You are a clinical relation discovery agent. Given the narrative and "
       "the known terms, list semantic relations, one per line, in the exact "
       "form: head | predicate | tail\n"
       "Known entities: {entities}\n"
       "Known attributes: {attributes}\n"
       "Narrative:\n{doc}"},
      {"relate_refine",
       "You are a clinical relation refinement agent. Re-derive the relation "
       "list for the narrative, correcting predicates for clinical accuracy. "
       "One relation per line: head | predicate | tail\n"
       "Known entities: {entities}\n"
       "Known attributes: {attributes}\n"
       "Narrative:\n{doc}"},
      {"relate_conservative",
       "You are a conservative clinical validator. List only relations with "
       "direct textual support in the narrative, one per line: "
       "head | predicate | tail\n"
       "Known entities: {entities}\n"
       "Known attributes: {attributes}\n"
       "Narrative:\n{doc}"},
      {"relate_variant",
       "You are a clinical relation discovery agent (prompt variant "
       "{variant}). List semantic relations from the narrative, one per "
       "line: head | predicate | tail\n"
       "Known entities: {entities}\n"
       "Known attributes: {attributes}\n"
       "Narrative:\n{doc}"},
      {"judge",
       "Rate the clinical plausibility of this relation given the source "
       "context. Respond with a single number between 0 and 1 and nothing "
       "else.\n"
       "Relation: {head} | {predicate} | {tail}\n"
       "Context: {context}"},
      {"adversary",
       "Perturb the relation below (perturbation {index}) and decide whether "
       "the perturbed form contradicts the source context. Respond with two "
       "lines:\n"
       "variant: <head> | <predicate> | <tail>\n"
       "verdict: CONSISTENT or CONTRADICTORY or UNCLEAR\n"
       "Relation: {head} | {predicate} | {tail}\n"
       "Context: {context}"},
      {"entail",
       "Does the sentence entail the relation? Respond with a single number "
       "between 0 and 1.\n"
       "Relation: {head} | {predicate} | {tail}\n"
       "Sentence: {sentence}"},
  };
  return templates;
}

}  // namespace

std::vector<std::string> template_ids() {
  std::vector<std::string> ids;
  for (const auto& [id, _] : registry()) ids.push_back(id);
  return ids;
}

const std::string& template_text(const std::string& template_id) {
  auto it = registry().find(template_id);
  if (it == registry().end()) {
    throw ContentError("unknown prompt template: " + template_id);
  }
  return it->second;
}

std::string render_prompt(const std::string& template_id,
                          const std::map<std::string, std::string>& context) {
  const std::string& tpl = template_text(template_id);
  std::string out;
  out.reserve(tpl.size());
  std::size_t i = 0;
  while (i < tpl.size()) {
    if (tpl[i] != '{') {
      out += tpl[i++];
      continue;
    }
    const std::size_t close = tpl.find('}', i);
    if (close == std::string::npos) {
      throw ContentError("unterminated placeholder in template " + template_id);
    }
    const std::string name = tpl.substr(i + 1, close - i - 1);
    auto it = context.find(name);
    if (it == context.end()) {
      throw ContentError("missing placeholder " + name);
    }
    out += it->second;
    i = close + 1;
  }
  return out;
}

}  // namespace kgf::prompts
