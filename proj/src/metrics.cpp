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

#include "kgf/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>

#include "json.hpp"
#include "kgf/errors.hpp"
#include "kgf/text.hpp"

namespace kgf::metrics {

using nlohmann::json;

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) {
    throw DomainError("pearson: series lengths differ");
  }
  if (x.size() < 2) throw DomainError("pearson: need at least two points");
  const double n = static_cast<double>(x.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) {
    throw DomainError("pearson: undefined correlation for constant series");
  }
  return sxy / std::sqrt(sxx * syy);
}

StructureMetrics summarize_graph(const graph::GraphStore& store,
                                 bool include_type_triples,
                                 std::size_t inconsistent_entities) {
  StructureMetrics m;
  m.rdf_triples = store.size();
  m.inconsistent_entities = inconsistent_entities;

  std::set<std::string> predicates;
  std::set<std::string> nodes;
  std::set<std::pair<std::string, std::string>> edges;
  for (const graph::RdfTriple& t : store.triples()) {
    predicates.insert(t.predicate.value);
    if (!include_type_triples && t.predicate == graph::rdf_type()) continue;
    const std::string s = graph::render_term(t.subject);
    const std::string o = graph::render_term(t.object);
    nodes.insert(s);
    nodes.insert(o);
    if (s != o) {
      edges.insert({std::min(s, o), std::max(s, o)});
    } else {
      edges.insert({s, o});
    }
  }
  m.unique_predicates = predicates.size();
  m.nodes = nodes.size();
  m.avg_node_degree =
      nodes.empty() ? 0.0
                    : 2.0 * static_cast<double>(edges.size()) /
                          static_cast<double>(nodes.size());
  return m;
}

CohortMetrics summarize_eav(const std::string& cohort,
                            const std::vector<PatientInputs>& patients,
                            const std::vector<ontology::ConceptMapping>& mappings,
                            std::size_t mapping_attempted,
                            std::size_t mapping_unmapped) {
  CohortMetrics m;
  m.cohort = cohort;
  m.patients = patients.size();

  std::set<std::string> unique_attributes;
  std::set<std::string> ee_predicates;
  std::set<std::string> aa_ea_predicates;
  double coverage_sum = 0.0;
  double correctness_sum = 0.0;
  double hallucination_sum = 0.0;
  double rescue_sum = 0.0;

  for (const PatientInputs& p : patients) {
    m.total_triples += p.eavs.size();
    std::set<std::string> patient_entities;
    for (const extraction::EavTriple& t : p.eavs) {
      patient_entities.insert(text::casefold(t.entity));
      unique_attributes.insert(text::casefold(t.attribute));
    }
    m.entity_instances += patient_entities.size();

    coverage_sum += p.grounding.coverage;
    correctness_sum += p.grounding.correctness_rate;
    hallucination_sum += p.grounding.hallucination_rate;
    rescue_sum += p.grounding.rescue_rate;
    m.hallucinated_total += p.grounding.hallucinated;

    m.total_predicate_instances += p.relations.size();
    for (const relations::RelationTriple& r : p.relations) {
      const std::string pred = relations::canonical_predicate(r.predicate);
      if (r.kind == relations::RelationKind::EE) {
        ee_predicates.insert(pred);
      } else {
        aa_ea_predicates.insert(pred);
      }
    }
  }

  m.unique_attributes = unique_attributes.size();
  if (!patients.empty()) {
    const double n = static_cast<double>(patients.size());
    m.coverage = coverage_sum / n;
    m.correctness_rate = correctness_sum / n;
    m.hallucination_rate = hallucination_sum / n;
    m.rescue_rate = rescue_sum / n;
    m.hallucinated_avg = static_cast<double>(m.hallucinated_total) / n;
  }

  m.mapped_attributes = mappings.size();
  for (const ontology::ConceptMapping& cm : mappings) {
    ++m.per_vocab_counts[ontology::to_string(cm.term.vocabulary)];
  }
  m.unmapped_rate = ontology::unmapped_rate(mapping_attempted, mapping_unmapped);

  m.entity_predicates = ee_predicates.size();
  m.attribute_predicates = aa_ea_predicates.size();
  return m;
}

namespace {

std::string fmt_double(double v) {
  char buf[64];
  const auto result = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, result.ptr);
}

json cohort_json(const CohortMetrics& m) {
  json doc;
  doc["cohort"] = m.cohort;
  doc["patients"] = m.patients;
  doc["eav"] = {{"total_triples", m.total_triples},
                {"entity_instances", m.entity_instances},
                {"unique_attributes", m.unique_attributes}};
  doc["grounding"] = {{"coverage", m.coverage},
                      {"correctness_rate", m.correctness_rate},
                      {"hallucination_rate", m.hallucination_rate},
                      {"rescue_rate", m.rescue_rate},
                      {"hallucinated_total", m.hallucinated_total},
                      {"hallucinated_avg", m.hallucinated_avg}};
  doc["ontology"] = {{"mapped_attributes", m.mapped_attributes},
                     {"per_vocab_counts", m.per_vocab_counts},
                     {"unmapped_rate", m.unmapped_rate}};
  doc["predicates"] = {{"entity_predicates", m.entity_predicates},
                       {"attribute_predicates", m.attribute_predicates},
                       {"total_instances", m.total_predicate_instances}};
  doc["structure"] = {{"rdf_triples", m.structure.rdf_triples},
                      {"unique_predicates", m.structure.unique_predicates},
                      {"nodes", m.structure.nodes},
                      {"avg_node_degree", m.structure.avg_node_degree},
                      {"inconsistent_entities", m.structure.inconsistent_entities}};
  return doc;
}

}  // namespace

std::string cohort_to_json(const CohortMetrics& m) {
  return cohort_json(m).dump(2) + "\n";
}

std::string cohort_to_csv(const std::vector<CohortMetrics>& all) {
  std::string out = "cohort,metric,value\n";
  for (const CohortMetrics& m : all) {
    auto row = [&](const std::string& metric, const std::string& value) {
      out += m.cohort + "," + metric + "," + value + "\n";
    };
    row("patients", std::to_string(m.patients));
    row("total_eav_triples", std::to_string(m.total_triples));
    row("entity_instances", std::to_string(m.entity_instances));
    row("unique_attributes", std::to_string(m.unique_attributes));
    row("coverage", fmt_double(m.coverage));
    row("correctness_rate", fmt_double(m.correctness_rate));
    row("hallucination_rate", fmt_double(m.hallucination_rate));
    row("rescue_rate", fmt_double(m.rescue_rate));
    row("hallucinated_total", std::to_string(m.hallucinated_total));
    row("hallucinated_avg", fmt_double(m.hallucinated_avg));
    row("mapped_attributes", std::to_string(m.mapped_attributes));
    for (const auto& [vocab, count] : m.per_vocab_counts) {
      row("mapped_" + vocab, std::to_string(count));
    }
    row("unmapped_rate", fmt_double(m.unmapped_rate));
    row("entity_predicates", std::to_string(m.entity_predicates));
    row("attribute_predicates", std::to_string(m.attribute_predicates));
    row("total_predicate_instances", std::to_string(m.total_predicate_instances));
    row("rdf_triples", std::to_string(m.structure.rdf_triples));
    row("unique_predicates", std::to_string(m.structure.unique_predicates));
    row("nodes", std::to_string(m.structure.nodes));
    row("avg_node_degree", fmt_double(m.structure.avg_node_degree));
    row("inconsistent_entities",
        std::to_string(m.structure.inconsistent_entities));
  }
  return out;
}

std::string model_comparison_to_json(const ModelComparison& mc) {
  json doc;
  doc["patients"] = mc.patients;
  doc["per_model_correctness"] = mc.per_model_correctness;
  doc["pairwise_differences"] = mc.pairwise_differences;
  json r = json::object();
  for (const auto& [pair, value] : mc.pairwise_pearson) r[pair] = value;
  doc["pairwise_pearson"] = std::move(r);
  return doc.dump(2) + "\n";
}

std::string radar_to_csv(
    const std::map<std::string, std::map<std::string, double>>& axis_model_value) {
  std::string out = "axis,model,value\n";
  for (const auto& [axis, models] : axis_model_value) {
    for (const auto& [model, value] : models) {
      out += axis + "," + model + "," + fmt_double(value) + "\n";
    }
  }
  return out;
}

}  // namespace kgf::metrics
