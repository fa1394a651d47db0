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
#include "kgf/grounding.hpp"
#include "kgf/ontology.hpp"
#include "kgf/relations.hpp"

namespace kgf::metrics {

struct StructureMetrics {
  std::size_t rdf_triples = 0;
  std::size_t unique_predicates = 0;
  std::size_t nodes = 0;
  double avg_node_degree = 0.0;  // 2E/V over the undirected simple graph
  std::size_t inconsistent_entities = 0;
};

struct CohortMetrics {
  std::string cohort;
  std::size_t patients = 0;

  // EAV statistics.
  std::size_t total_triples = 0;
  std::size_t entity_instances = 0;
  std::size_t unique_attributes = 0;

  // Grounding rates (unweighted means over patients).
  double coverage = 0.0;
  double correctness_rate = 0.0;
  double hallucination_rate = 0.0;
  double rescue_rate = 0.0;
  std::size_t hallucinated_total = 0;
  double hallucinated_avg = 0.0;  // hallucinated_total / patients

  // Ontology mapping.
  std::size_t mapped_attributes = 0;
  std::map<std::string, std::size_t> per_vocab_counts;
  double unmapped_rate = 0.0;

  // Predicate typing.
  std::size_t entity_predicates = 0;     // distinct predicates on EE edges
  std::size_t attribute_predicates = 0;  // distinct predicates on EA/AA edges
  std::size_t total_predicate_instances = 0;

  StructureMetrics structure;
};

struct ModelComparison {
  // model -> per-patient correctness fraction, patient order fixed.
  std::vector<std::string> patients;
  std::map<std::string, std::vector<double>> per_model_correctness;
  // (model_a, model_b) -> per-patient differences and Pearson r (when
  // defined; constant series leave r absent).
  std::map<std::string, std::vector<double>> pairwise_differences;
  std::map<std::string, double> pairwise_pearson;
};

// Standard sample Pearson coefficient. Throws DomainError when the series
// lengths differ, are shorter than 2, or either series is constant.
double pearson(const std::vector<double>& x, const std::vector<double>& y);

// Counts triples, distinct predicates, distinct nodes; degree = 2E/V over
// the undirected simple graph (duplicate predicate edges between one node
// pair count once). include_type_triples=false drops rdf:type triples from
// edge and node counting.
StructureMetrics summarize_graph(const graph::GraphStore& store,
                                 bool include_type_triples = true,
                                 std::size_t inconsistent_entities = 0);

struct PatientInputs {
  std::string patient_id;
  std::vector<extraction::EavTriple> eavs;
  grounding::GroundingReport grounding;
  std::vector<relations::RelationTriple> relations;
};

// Totals are sums over patients; rates are unweighted means.
CohortMetrics summarize_eav(const std::string& cohort,
                            const std::vector<PatientInputs>& patients,
                            const std::vector<ontology::ConceptMapping>& mappings,
                            std::size_t mapping_attempted,
                            std::size_t mapping_unmapped);

// Deterministic report files: cohort_<name>.json, metrics.csv rows, and
// radar.csv (axis, model, value) series.
std::string cohort_to_json(const CohortMetrics& m);
std::string cohort_to_csv(const std::vector<CohortMetrics>& all);
std::string model_comparison_to_json(const ModelComparison& mc);
std::string radar_to_csv(
    const std::map<std::string, std::map<std::string, double>>& axis_model_value);

}  // namespace kgf::metrics
