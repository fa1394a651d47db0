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

#include "kgf/pipeline.hpp"

#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <memory>
#include <set>
#include <sstream>

#include "json.hpp"
#include "kgf/agents.hpp"
#include "kgf/corpus.hpp"
#include "kgf/errors.hpp"
#include "kgf/extraction.hpp"
#include "kgf/graph/encode.hpp"
#include "kgf/graph/serialize.hpp"
#include "kgf/graph/sparql.hpp"
#include "kgf/graph/store.hpp"
#include "kgf/graph/swrl.hpp"
#include "kgf/grounding.hpp"
#include "kgf/metrics.hpp"
#include "kgf/ontology.hpp"
#include "kgf/prompts.hpp"
#include "kgf/relations.hpp"
#include "kgf/text.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace kgf::pipeline {

namespace {

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError("cannot read: " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& p, const std::string& content) {
  fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write: " + p.string());
  out << content;
  if (!out) throw IoError("write failure on: " + p.string());
}

// Everything one stage run needs, resolved from the config once.
struct Context {
  Config config;
  fs::path out;
  bool offline = false;
  std::optional<std::string> cohort_filter;

  grounding::GroundingConfig ground_cfg;
  double delta_h = 0.8;
  bool entropy_mean = false;
  double alpha_lex = 0.6;
  double map_floor = 0.55;
  double delta_j = 0.7;
  double epsilon_xi = 0.2;
  std::array<double, 3> lambda{0.4, 0.3, 0.3};
  double delta_t = 0.65;
  double gamma_red = 0.85;
  int n_variants = 5;
  int n_perturb = 5;
  int max_inflight = 4;
  std::size_t embed_dim = 512;
  bool strict_encoding = false;
  bool degree_include_type = true;
  bool entailment_via_agent = false;

  std::string corpus_root;
  std::string vocab_file;
  std::optional<std::string> tbox_file;
  std::optional<std::string> rules_file;
  std::string fixtures_dir;

  std::vector<corpus::ClinicalReport> reports;  // filtered, sorted

  std::unique_ptr<agents::CompletionProvider> provider;
  std::unique_ptr<agents::EmbeddingProvider> embedder;

  fs::path stage_file(const std::string& stage, const std::string& name) const {
    return out / stage / name;
  }
};

Context make_context(const Options& options) {
  Context ctx;
  ctx.config = Config::load(options.config_path);
  ctx.config.require(required_pipeline_keys());
  ctx.offline = options.offline || ctx.config.get_bool("offline", false);
  ctx.cohort_filter = options.cohort;
  ctx.out = options.out_dir.value_or(ctx.config.get_string("out_dir", "out"));

  ctx.corpus_root = ctx.config.get_string("corpus_root");
  ctx.vocab_file = ctx.config.get_string("vocab_file");
  if (ctx.config.has("tbox_file")) ctx.tbox_file = ctx.config.get_string("tbox_file");
  if (ctx.config.has("rules_file")) ctx.rules_file = ctx.config.get_string("rules_file");
  ctx.fixtures_dir = ctx.config.get_string("fixtures_dir", "fixtures/mock");

  // Config-named inputs must exist before any work starts.
  for (const std::string& path : {ctx.corpus_root, ctx.vocab_file}) {
    if (!fs::exists(path)) {
      throw ConfigError("configured path does not exist: " + path);
    }
  }
  if (ctx.tbox_file && !fs::exists(*ctx.tbox_file)) {
    throw ConfigError("configured path does not exist: " + *ctx.tbox_file);
  }
  if (ctx.rules_file && !fs::exists(*ctx.rules_file)) {
    throw ConfigError("configured path does not exist: " + *ctx.rules_file);
  }

  ctx.ground_cfg = grounding::GroundingConfig::defaults();
  ctx.ground_cfg.tau_fuzzy = ctx.config.get_double("tau_fuzzy");
  ctx.ground_cfg.gamma_ngram = ctx.config.get_double("gamma_ngram");
  ctx.ground_cfg.tau_typo = ctx.config.get_double("tau_typo");
  if (ctx.config.has("negation_cues_file")) {
    grounding::load_negation_cues(ctx.ground_cfg,
                                  ctx.config.get_string("negation_cues_file"));
  }
  if (ctx.config.has("synonyms_file")) {
    grounding::load_synonyms(ctx.ground_cfg, ctx.config.get_string("synonyms_file"));
  }
  if (ctx.config.has("lemma_rules_file")) {
    grounding::load_lemma_rules(ctx.ground_cfg,
                                ctx.config.get_string("lemma_rules_file"));
  }
  if (ctx.config.has("irregular_lemmas_file")) {
    grounding::load_irregular_lemmas(
        ctx.ground_cfg, ctx.config.get_string("irregular_lemmas_file"));
  }
  if (ctx.config.has("explicit_fixes_file")) {
    grounding::load_explicit_fixes(ctx.ground_cfg,
                                   ctx.config.get_string("explicit_fixes_file"));
  }

  ctx.delta_h = ctx.config.get_double("delta_h");
  ctx.entropy_mean = ctx.config.get_bool("entropy_mean", false);
  ctx.alpha_lex = ctx.config.get_double("alpha_lex");
  ctx.map_floor = ctx.config.get_double("map_floor");
  ctx.delta_j = ctx.config.get_double("delta_j");
  ctx.epsilon_xi = ctx.config.get_double("epsilon_xi");
  ctx.lambda = {ctx.config.get_double("lambda1"), ctx.config.get_double("lambda2"),
                ctx.config.get_double("lambda3")};
  ctx.delta_t = ctx.config.get_double("delta_t");
  ctx.gamma_red = ctx.config.get_double("gamma_red");
  ctx.n_variants = ctx.config.get_int("n_variants");
  ctx.n_perturb = ctx.config.get_int("n_perturb", 5);
  ctx.max_inflight = ctx.config.get_int("max_inflight");
  ctx.embed_dim = static_cast<std::size_t>(ctx.config.get_int("embed_dim", 512));
  ctx.strict_encoding = ctx.config.get_bool("strict_encoding", false);
  ctx.degree_include_type = ctx.config.get_bool("degree_include_type", true);
  ctx.entailment_via_agent = ctx.config.get_bool("entailment_via_agent", false);

  if (ctx.offline) {
    if (!fs::exists(ctx.fixtures_dir)) {
      throw ConfigError("mock fixtures directory does not exist: " +
                        ctx.fixtures_dir);
    }
    ctx.provider = std::make_unique<agents::MockCompletionProvider>(ctx.fixtures_dir);
  } else {
    agents::HttpCompletionProvider::Options http;
    http.provider_id = ctx.config.get_string("provider_id");
    http.host = ctx.config.get_string("provider_host");
    http.port = ctx.config.get_int("provider_port", 443);
    http.path = ctx.config.get_string("provider_path", "/v1/complete");
    http.model = ctx.config.get_string("provider_model");
    http.max_inflight = ctx.max_inflight;
    ctx.provider = std::make_unique<agents::HttpCompletionProvider>(http);
  }
  ctx.embedder = std::make_unique<agents::TrigramEmbeddingProvider>(ctx.embed_dim);

  corpus::LoadResult loaded = corpus::load_corpus(ctx.corpus_root);
  for (const corpus::LoadError& e : loaded.errors) {
    std::cerr << "warning: " << e.path << ": " << e.message << "\n";
  }
  for (corpus::ClinicalReport& r : loaded.reports) {
    if (ctx.cohort_filter &&
        text::casefold(corpus::to_string(r.cohort)) !=
            text::casefold(*ctx.cohort_filter)) {
      continue;
    }
    ctx.reports.push_back(std::move(r));
  }
  return ctx;
}

// Bounded deterministic parallel map over reports: results land by index.
template <typename Fn>
void for_each_report(const Context& ctx, Fn&& fn) {
  const std::size_t workers =
      std::max(1, std::min<int>(ctx.max_inflight,
                                static_cast<int>(ctx.reports.size())));
  if (workers <= 1) {
    for (std::size_t i = 0; i < ctx.reports.size(); ++i) fn(i);
    return;
  }
  std::vector<std::future<void>> futures;
  std::size_t next = 0;
  while (next < ctx.reports.size()) {
    futures.clear();
    for (std::size_t w = 0; w < workers && next < ctx.reports.size(); ++w) {
      futures.push_back(
          std::async(std::launch::async, [&fn, index = next]() { fn(index); }));
      ++next;
    }
    for (auto& f : futures) f.get();
  }
}

bool all_exist(const std::vector<fs::path>& paths) {
  for (const fs::path& p : paths) {
    if (!fs::exists(p)) return false;
  }
  return !paths.empty();
}

std::vector<fs::path> per_patient_outputs(const Context& ctx,
                                          const std::string& stage,
                                          const std::string& suffix) {
  std::vector<fs::path> out;
  for (const auto& r : ctx.reports) {
    out.push_back(ctx.stage_file(stage, r.patient_id + suffix));
  }
  return out;
}

// ---------------------------------------------------------------- extract

void stage_extract(const Context& ctx) {
  for_each_report(ctx, [&](std::size_t i) {
    const corpus::ClinicalReport& report = ctx.reports[i];
    const extraction::ExtractionResult result =
        extraction::extract_eav(report, *ctx.provider, ctx.entropy_mean);
    json doc;
    doc["triples"] = json::parse(extraction::to_json(result.triples));
    doc["skipped_records"] = result.skipped_records;
    const auto partition = extraction::flag_uncertain(result.triples, ctx.delta_h);
    doc["uncertainty"] = {{"confident", partition.confident.size()},
                          {"flagged", partition.flagged.size()},
                          {"unknown", partition.unknown.size()},
                          {"delta_h", ctx.delta_h}};
    write_file(ctx.stage_file("extract", report.patient_id + ".json"),
               doc.dump(2) + "\n");
  });
}

std::vector<extraction::EavTriple> load_eavs(const Context& ctx,
                                             const std::string& patient_id) {
  const fs::path p = ctx.stage_file("extract", patient_id + ".json");
  if (!fs::exists(p)) {
    throw Error("missing extract artifact for " + patient_id +
                " (run the extract stage first)");
  }
  const json doc = json::parse(read_file(p));
  return extraction::from_json(doc.at("triples").dump());
}

// ----------------------------------------------------------------- ground

void stage_ground(const Context& ctx) {
  for_each_report(ctx, [&](std::size_t i) {
    const corpus::ClinicalReport& report = ctx.reports[i];
    const auto eavs = load_eavs(ctx, report.patient_id);
    const grounding::GroundingOutcome outcome =
        grounding::ground_triples(eavs, report, ctx.ground_cfg);
    write_file(ctx.stage_file("ground", report.patient_id + ".json"),
               grounding::to_json(outcome));
  });
}

// -------------------------------------------------------------------- map

// Terms submitted to concept mapping: attributes plus non-numeric,
// non-boolean values.
std::vector<std::string> mappable_terms(
    const std::vector<extraction::EavTriple>& eavs) {
  std::set<std::string> seen;
  std::vector<std::string> terms;
  auto add = [&](const std::string& term) {
    const std::string cf = text::casefold(text::trim(term));
    if (cf.empty()) return;
    if (seen.insert(cf).second) terms.push_back(std::string(text::trim(term)));
  };
  for (const auto& eav : eavs) {
    add(eav.attribute);
    const std::string value(text::trim(eav.value));
    const std::string value_cf = text::casefold(value);
    if (!text::is_decimal(value) && value_cf != "true" && value_cf != "false" &&
        value_cf != "present" && value_cf != "absent") {
      add(eav.value);
    }
  }
  return terms;
}

void stage_map(const Context& ctx) {
  const ontology::VocabLoadResult vocab = ontology::load_vocab(ctx.vocab_file);
  for (const std::string& w : vocab.warnings) {
    std::cerr << "vocab warning: " << w << "\n";
  }
  if (vocab.terms.empty()) {
    throw ConfigError("vocabulary file has no usable rows: " + ctx.vocab_file);
  }
  for_each_report(ctx, [&](std::size_t i) {
    const corpus::ClinicalReport& report = ctx.reports[i];
    const auto eavs = load_eavs(ctx, report.patient_id);
    std::vector<ontology::ConceptMapping> mappings;
    std::size_t attempted = 0;
    std::size_t unmapped = 0;
    for (const std::string& term : mappable_terms(eavs)) {
      ++attempted;
      auto m = ontology::map_concept(term, vocab.terms, ctx.alpha_lex,
                                     *ctx.embedder, ctx.map_floor);
      if (m) {
        mappings.push_back(std::move(*m));
      } else {
        ++unmapped;
      }
    }
    write_file(ctx.stage_file("map", report.patient_id + ".json"),
               ontology::mappings_to_json(mappings, attempted, unmapped));
  });
}

std::vector<ontology::ConceptMapping> load_mappings(const Context& ctx,
                                                    const std::string& patient_id,
                                                    std::size_t* attempted = nullptr,
                                                    std::size_t* unmapped = nullptr) {
  const fs::path p = ctx.stage_file("map", patient_id + ".json");
  if (!fs::exists(p)) {
    throw Error("missing map artifact for " + patient_id +
                " (run the map stage first)");
  }
  const json doc = json::parse(read_file(p));
  if (attempted) *attempted = doc.value("attempted", 0u);
  if (unmapped) *unmapped = doc.value("unmapped", 0u);
  std::vector<ontology::ConceptMapping> out;
  for (const auto& rec : doc.value("mappings", json::array())) {
    ontology::ConceptMapping m;
    m.raw_term = rec.at("raw").get<std::string>();
    m.term.vocabulary =
        ontology::vocabulary_from_string(rec.at("vocab").get<std::string>())
            .value_or(ontology::Vocabulary::SNOMED);
    m.term.code = rec.at("code").get<std::string>();
    m.term.label = rec.value("label", "");
    m.term.uri = rec.at("uri").get<std::string>();
    m.sim_lex = rec.value("sim_lex", 0.0);
    m.sim_sem = rec.value("sim_sem", 0.0);
    m.score = rec.value("score", 0.0);
    out.push_back(std::move(m));
  }
  return out;
}

// ----------------------------------------------------------------- relate

struct RelateArtifacts {
  std::vector<relations::RelationTriple> kept;
  std::vector<relations::QuarantineRecord> quarantine;
  std::vector<relations::GapCandidate> gaps;
  std::map<std::string, double> per_model_correctness;
  std::map<std::string, std::size_t> per_model_counts;
};

RelateArtifacts relate_one(const Context& ctx,
                           const corpus::ClinicalReport& report,
                           const std::vector<extraction::EavTriple>& eavs,
                           const std::set<std::string>& mappable_cf) {
  using relations::RelationTriple;
  RelateArtifacts artifacts;

  // Three model sets for consensus.
  std::map<std::string, std::vector<RelationTriple>> model_sets;
  model_sets["extractor"] = relations::generate_candidates(
      report, eavs, *ctx.provider, ctx.ground_cfg.tau_fuzzy, "relate",
      agents::AgentRole::Extractor);
  model_sets["refiner"] = relations::generate_candidates(
      report, eavs, *ctx.provider, ctx.ground_cfg.tau_fuzzy, "relate_refine",
      agents::AgentRole::Refiner);
  model_sets["adversary"] = relations::generate_candidates(
      report, eavs, *ctx.provider, ctx.ground_cfg.tau_fuzzy,
      "relate_conservative", agents::AgentRole::Adversary);

  // Self-consistency variant sets (temperature 0.7 requests).
  std::set<std::string> entities;
  std::set<std::string> attributes;
  for (const auto& eav : eavs) {
    entities.insert(eav.entity);
    attributes.insert(eav.attribute);
  }
  auto joined = [](const std::set<std::string>& s) {
    std::vector<std::string> v(s.begin(), s.end());
    return text::join(v, ", ");
  };
  std::vector<std::vector<RelationTriple>> variant_sets;
  for (int k = 1; k <= ctx.n_variants; ++k) {
    agents::AgentRequest request;
    request.role = agents::AgentRole::Extractor;
    request.temperature = 0.7;
    request.prompt = prompts::render_prompt(
        "relate_variant", {{"doc", report.narrative},
                           {"entities", joined(entities)},
                           {"attributes", joined(attributes)},
                           {"variant", std::to_string(k)}});
    const agents::AgentResponse response = ctx.provider->complete(request);
    variant_sets.push_back(relations::parse_relation_response(
        response.text, report.patient_id, ctx.provider->id(), eavs,
        ctx.ground_cfg.tau_fuzzy));
  }

  // Score the extractor candidates.
  std::vector<RelationTriple>& candidates = model_sets["extractor"];
  for (RelationTriple& t : candidates) {
    t.scores.J = relations::judge(t, report.narrative, *ctx.provider);
    t.scores.xi = relations::contradiction_rate(
        relations::perturb(t, report.narrative, *ctx.provider, ctx.n_perturb));
    t.scores.C = relations::self_consistency(t, variant_sets);
    t.scores.R =
        ctx.entailment_via_agent
            ? relations::evidence_alignment_entail(t, report, *ctx.provider)
            : relations::evidence_alignment(t, report);
    t.scores.T = relations::composite_trust(*t.scores.R, *t.scores.C,
                                            *t.scores.J, ctx.lambda)
                     .T;
  }

  // Consensus across the three model sets.
  auto mappable = [&](const std::string& term) {
    return mappable_cf.count(text::casefold(text::trim(term))) > 0;
  };
  const relations::ConsensusResult consensus =
      relations::consensus_accept(model_sets, mappable);
  std::set<std::string> accepted_keys;
  for (const RelationTriple& t : consensus.accepted) {
    accepted_keys.insert(relations::canonical_key(t));
  }
  for (const RelationTriple& t : consensus.flagged) {
    artifacts.quarantine.push_back({t, "SINGLE_MODEL"});
  }

  // Gates on the scored candidates.
  std::vector<RelationTriple> gated;
  for (const RelationTriple& t : candidates) {
    if (accepted_keys.count(relations::canonical_key(t)) == 0) continue;
    if (*t.scores.J <= ctx.delta_j) {
      artifacts.quarantine.push_back({t, "LOW_J"});
      continue;
    }
    if (*t.scores.xi > ctx.epsilon_xi) {
      artifacts.quarantine.push_back({t, "HIGH_XI"});
      continue;
    }
    if (*t.scores.T < ctx.delta_t) {
      artifacts.quarantine.push_back({t, "LOW_T"});
      continue;
    }
    gated.push_back(t);
  }

  // Redundancy elimination keeps each cluster's highest-T member.
  const auto clusters =
      relations::redundancy_pairs(gated, *ctx.embedder, ctx.gamma_red);
  for (const relations::RedundancyCluster& cluster : clusters) {
    for (std::size_t idx : cluster.member_indices) {
      if (idx == cluster.representative) {
        artifacts.kept.push_back(gated[idx]);
      } else {
        artifacts.quarantine.push_back({gated[idx], "REDUNDANT"});
      }
    }
  }

  // Reporting-only gap candidates: similar endpoint terms with no edge.
  artifacts.gaps =
      relations::suggest_gaps(artifacts.kept, *ctx.embedder, ctx.gamma_red);

  // Per-model correctness against the accepted keys.
  for (const auto& [model, triples] : model_sets) {
    artifacts.per_model_counts[model] = triples.size();
    if (triples.empty()) {
      artifacts.per_model_correctness[model] = 0.0;
      continue;
    }
    std::size_t hits = 0;
    for (const RelationTriple& t : triples) {
      if (accepted_keys.count(relations::canonical_key(t)) > 0) ++hits;
    }
    artifacts.per_model_correctness[model] =
        static_cast<double>(hits) / static_cast<double>(triples.size());
  }
  return artifacts;
}

void stage_relate(const Context& ctx) {
  for_each_report(ctx, [&](std::size_t i) {
    const corpus::ClinicalReport& report = ctx.reports[i];
    const auto eavs = load_eavs(ctx, report.patient_id);
    const auto mappings = load_mappings(ctx, report.patient_id);
    std::set<std::string> mappable_cf;
    for (const auto& m : mappings) {
      mappable_cf.insert(text::casefold(text::trim(m.raw_term)));
    }

    const RelateArtifacts artifacts = relate_one(ctx, report, eavs, mappable_cf);
    write_file(ctx.stage_file("relate", report.patient_id + ".json"),
               relations::relations_to_json(artifacts.kept));
    write_file(ctx.stage_file("relate", report.patient_id + ".quarantine.json"),
               relations::quarantine_to_json(artifacts.quarantine));
    json models;
    models["correctness"] = artifacts.per_model_correctness;
    models["counts"] = artifacts.per_model_counts;
    write_file(ctx.stage_file("relate", report.patient_id + ".models.json"),
               models.dump(2) + "\n");
    json gaps = json::array();
    for (const relations::GapCandidate& gap : artifacts.gaps) {
      gaps.push_back({{"terms", gap.terms}});
    }
    write_file(ctx.stage_file("relate", report.patient_id + ".gaps.json"),
               gaps.dump(2) + "\n");
  });
}

// ----------------------------------------------------------------- encode

graph::EncodePolicy encode_policy(const Context& ctx) {
  graph::EncodePolicy policy;
  policy.strict = ctx.strict_encoding;
  return policy;
}

std::string endpoint_class_iri(const std::string& term,
                               const std::map<std::string, extraction::FhirResourceType>&
                                   entity_types,
                               const graph::EncodePolicy& policy) {
  auto it = entity_types.find(text::casefold(text::trim(term)));
  if (it != entity_types.end() &&
      it->second != extraction::FhirResourceType::Unknown) {
    return policy.fhir_base + extraction::to_string(it->second);
  }
  return policy.class_base + graph::sanitize_local(term);
}

struct EncodedPatient {
  graph::GraphStore store;
  std::vector<ontology::PredicateObservation> observations;
};

EncodedPatient encode_one(const Context& ctx, const std::string& patient_id,
                          const std::vector<extraction::EavTriple>& eavs,
                          const std::vector<grounding::MatchStatus>& statuses,
                          const std::vector<relations::RelationTriple>& rels,
                          const std::vector<ontology::ConceptMapping>& mappings) {
  const graph::EncodePolicy policy = encode_policy(ctx);
  EncodedPatient out;

  std::map<std::string, ontology::ConceptMapping> by_attr;
  for (const auto& m : mappings) {
    by_attr.emplace(text::casefold(text::trim(m.raw_term)), m);
  }
  std::map<std::string, extraction::FhirResourceType> entity_types;
  for (const auto& eav : eavs) {
    entity_types.emplace(text::casefold(text::trim(eav.entity)), eav.fhir_type);
  }

  for (std::size_t i = 0; i < eavs.size(); ++i) {
    const bool supported =
        i < statuses.size() &&
        statuses[i] != grounding::MatchStatus::Hallucinated;
    if (!supported) continue;  // encode grounded or rescued EAVs only
    for (const graph::RdfTriple& t :
         graph::encode_eav(eavs[i], by_attr, policy)) {
      out.store.insert(t);
    }
  }

  for (const relations::RelationTriple& rel : rels) {
    const graph::Iri head = graph::entity_iri(patient_id, rel.head, policy);
    const graph::Iri tail = graph::entity_iri(patient_id, rel.tail, policy);
    const graph::Iri predicate(policy.rel_base +
                               graph::sanitize_local(rel.predicate));
    const std::string head_class =
        endpoint_class_iri(rel.head, entity_types, policy);
    const std::string tail_class =
        endpoint_class_iri(rel.tail, entity_types, policy);
    out.store.insert({head, graph::rdf_type(), graph::Iri(head_class)});
    out.store.insert({tail, graph::rdf_type(), graph::Iri(tail_class)});
    out.store.insert({head, predicate, tail});
    out.observations.push_back({predicate.value, head_class, tail_class});
  }
  return out;
}

// RDF/RDFS/OWL triples mirroring the schema declarations.
void add_schema_triples(graph::GraphStore& store) {
  static const std::string rdfs = "http://www.w3.org/2000/01/rdf-schema#";
  static const std::string owl = "http://www.w3.org/2002/07/owl#";
  for (const ontology::SchemaDecl& d : store.schema) {
    switch (d.kind) {
      case ontology::SchemaDeclKind::ClassDecl:
        store.insert({graph::Iri(d.subject), graph::rdf_type(),
                      graph::Iri(owl + "Class")});
        break;
      case ontology::SchemaDeclKind::ObjectProperty:
        store.insert({graph::Iri(d.subject), graph::rdf_type(),
                      graph::Iri(owl + "ObjectProperty")});
        break;
      case ontology::SchemaDeclKind::SubClassOf:
        store.insert({graph::Iri(d.subject), graph::Iri(rdfs + "subClassOf"),
                      graph::Iri(d.object)});
        break;
      case ontology::SchemaDeclKind::DomainRange:
        store.insert({graph::Iri(d.subject), graph::Iri(rdfs + "domain"),
                      graph::Iri(d.domain)});
        store.insert({graph::Iri(d.subject), graph::Iri(rdfs + "range"),
                      graph::Iri(d.range)});
        break;
    }
  }
  for (const auto& [a, b] : store.equivalences) {
    store.insert({graph::Iri(a), graph::Iri(owl + "equivalentClass"),
                  graph::Iri(b)});
  }
}

struct CohortGraphs {
  std::map<std::string, graph::GraphStore> per_cohort;
  graph::GraphStore merged;
};

CohortGraphs build_graphs(const Context& ctx) {
  CohortGraphs graphs;
  const ontology::TBox tbox =
      ctx.tbox_file ? ontology::load_tbox(*ctx.tbox_file) : ontology::TBox{};

  std::map<std::string, std::vector<ontology::PredicateObservation>>
      cohort_observations;
  std::map<std::string, std::vector<ontology::ConceptMapping>> cohort_mappings;

  for (const corpus::ClinicalReport& report : ctx.reports) {
    const std::string cohort = corpus::to_string(report.cohort);
    const auto eavs = load_eavs(ctx, report.patient_id);
    const fs::path ground_file = ctx.stage_file("ground", report.patient_id + ".json");
    if (!fs::exists(ground_file)) {
      throw Error("missing ground artifact for " + report.patient_id);
    }
    const auto statuses = grounding::statuses_from_json(read_file(ground_file));
    const fs::path rel_file = ctx.stage_file("relate", report.patient_id + ".json");
    if (!fs::exists(rel_file)) {
      throw Error("missing relate artifact for " + report.patient_id);
    }
    const auto rels = relations::relations_from_json(read_file(rel_file));
    const auto mappings = load_mappings(ctx, report.patient_id);

    EncodedPatient encoded =
        encode_one(ctx, report.patient_id, eavs, statuses, rels, mappings);
    for (const graph::RdfTriple& t : encoded.store.triples()) {
      graphs.per_cohort[cohort].insert(t);
      graphs.merged.insert(t);
    }
    auto& obs = cohort_observations[cohort];
    obs.insert(obs.end(), encoded.observations.begin(),
               encoded.observations.end());
    auto& maps = cohort_mappings[cohort];
    maps.insert(maps.end(), mappings.begin(), mappings.end());
  }

  std::vector<ontology::PredicateObservation> all_observations;
  std::vector<ontology::ConceptMapping> all_mappings;
  for (auto& [cohort, store] : graphs.per_cohort) {
    store.schema = ontology::build_schema(cohort_mappings[cohort],
                                          cohort_observations[cohort], tbox);
    store.equivalences = tbox.equivalences;
    const auto& obs = cohort_observations[cohort];
    all_observations.insert(all_observations.end(), obs.begin(), obs.end());
    const auto& maps = cohort_mappings[cohort];
    all_mappings.insert(all_mappings.end(), maps.begin(), maps.end());
  }
  graphs.merged.schema =
      ontology::build_schema(all_mappings, all_observations, tbox);
  graphs.merged.equivalences = tbox.equivalences;

  // Inference to fixpoint, then schema triples for the serialized form.
  const std::vector<graph::SwrlRule> rules =
      ctx.rules_file ? graph::load_rules(*ctx.rules_file)
                     : std::vector<graph::SwrlRule>{};
  for (auto& [cohort, store] : graphs.per_cohort) {
    graph::apply_restrictions(store, tbox.restrictions);
    graph::apply_swrl(store, rules);
    add_schema_triples(store);
  }
  graph::apply_restrictions(graphs.merged, tbox.restrictions);
  graph::apply_swrl(graphs.merged, rules);
  add_schema_triples(graphs.merged);
  return graphs;
}

void stage_encode(const Context& ctx) {
  CohortGraphs graphs = build_graphs(ctx);
  for (auto& [cohort, store] : graphs.per_cohort) {
    store.prefixes = {{"kg", "http://example.org/kg#"},
                      {"fhir", "http://hl7.org/fhir/"},
                      {"rdf", "http://www.w3.org/1999/02/22-rdf-syntax-ns#"},
                      {"rdfs", "http://www.w3.org/2000/01/rdf-schema#"},
                      {"owl", "http://www.w3.org/2002/07/owl#"},
                      {"xsd", "http://www.w3.org/2001/XMLSchema#"}};
    write_file(ctx.out / "graph" / (text::casefold(cohort) + ".nt"),
               graph::serialize_ntriples(store));
    // Readable companion; the .nt files stay the canonical form.
    write_file(ctx.out / "graph" / (text::casefold(cohort) + ".ttl"),
               graph::serialize_turtle(store));
  }
  write_file(ctx.out / "graph" / "cohort.nt",
             graph::serialize_ntriples(graphs.merged));
}

// --------------------------------------------------------------- validate

json inconsistency_to_json(const graph::Inconsistency& inc) {
  return {{"subject", inc.triple.subject.value},
          {"predicate", inc.triple.predicate.value},
          {"object", graph::render_term(inc.triple.object)},
          {"side", inc.side},
          {"expected", inc.expected},
          {"found", inc.found}};
}

void stage_validate(const Context& ctx) {
  // Schema is rebuilt deterministically; the .nt file carries instance and
  // schema triples but not the decl structures.
  CohortGraphs graphs = build_graphs(ctx);
  json doc;
  std::size_t total = 0;
  json per_cohort = json::object();
  for (const auto& [cohort, store] : graphs.per_cohort) {
    const auto inconsistencies = graph::validate_domain_range(store);
    json arr = json::array();
    for (const auto& inc : inconsistencies) arr.push_back(inconsistency_to_json(inc));
    per_cohort[cohort] = {{"count", inconsistencies.size()},
                          {"violations", std::move(arr)}};
    total += inconsistencies.size();
  }
  doc["per_cohort"] = std::move(per_cohort);
  doc["total"] = total;
  write_file(ctx.out / "validate" / "inconsistencies.json", doc.dump(2) + "\n");
}

// ----------------------------------------------------------------- report

void stage_report(const Context& ctx) {
  const json validation = fs::exists(ctx.out / "validate" / "inconsistencies.json")
                              ? json::parse(read_file(ctx.out / "validate" /
                                                      "inconsistencies.json"))
                              : json{{"per_cohort", json::object()}};

  std::map<std::string, std::vector<metrics::PatientInputs>> per_cohort_inputs;
  std::map<std::string, std::vector<ontology::ConceptMapping>> per_cohort_mappings;
  std::map<std::string, std::size_t> attempted;
  std::map<std::string, std::size_t> unmapped;

  metrics::ModelComparison comparison;

  for (const corpus::ClinicalReport& report : ctx.reports) {
    const std::string cohort = corpus::to_string(report.cohort);
    metrics::PatientInputs inputs;
    inputs.patient_id = report.patient_id;
    inputs.eavs = load_eavs(ctx, report.patient_id);
    const fs::path ground_file = ctx.stage_file("ground", report.patient_id + ".json");
    if (!fs::exists(ground_file)) {
      throw Error("missing ground artifact for " + report.patient_id);
    }
    inputs.grounding = grounding::report_from_json(read_file(ground_file));
    const fs::path rel_file = ctx.stage_file("relate", report.patient_id + ".json");
    if (!fs::exists(rel_file)) {
      throw Error("missing relate artifact for " + report.patient_id);
    }
    inputs.relations = relations::relations_from_json(read_file(rel_file));
    per_cohort_inputs[cohort].push_back(std::move(inputs));

    std::size_t a = 0;
    std::size_t u = 0;
    const auto maps = load_mappings(ctx, report.patient_id, &a, &u);
    auto& cm = per_cohort_mappings[cohort];
    cm.insert(cm.end(), maps.begin(), maps.end());
    attempted[cohort] += a;
    unmapped[cohort] += u;

    const fs::path models_file =
        ctx.stage_file("relate", report.patient_id + ".models.json");
    if (fs::exists(models_file)) {
      const json models = json::parse(read_file(models_file));
      comparison.patients.push_back(report.patient_id);
      for (auto it = models["correctness"].begin();
           it != models["correctness"].end(); ++it) {
        comparison.per_model_correctness[it.key()].push_back(
            it.value().get<double>());
      }
    }
  }

  // Pairwise difference series and Pearson r per model pair.
  std::vector<std::string> model_names;
  for (const auto& [model, _] : comparison.per_model_correctness) {
    model_names.push_back(model);
  }
  for (std::size_t i = 0; i < model_names.size(); ++i) {
    for (std::size_t j = i + 1; j < model_names.size(); ++j) {
      const auto& a = comparison.per_model_correctness[model_names[i]];
      const auto& b = comparison.per_model_correctness[model_names[j]];
      const std::string key = model_names[i] + "-" + model_names[j];
      std::vector<double> diff;
      for (std::size_t k = 0; k < std::min(a.size(), b.size()); ++k) {
        diff.push_back(a[k] - b[k]);
      }
      comparison.pairwise_differences[key] = std::move(diff);
      try {
        comparison.pairwise_pearson[key] = metrics::pearson(a, b);
      } catch (const DomainError&) {
        // Constant or short series: correlation undefined, omitted.
      }
    }
  }

  std::vector<metrics::CohortMetrics> all_metrics;
  for (auto& [cohort, inputs] : per_cohort_inputs) {
    metrics::CohortMetrics m = metrics::summarize_eav(
        cohort, inputs, per_cohort_mappings[cohort], attempted[cohort],
        unmapped[cohort]);
    const fs::path nt = ctx.out / "graph" / (text::casefold(cohort) + ".nt");
    std::size_t inconsistent = 0;
    if (validation["per_cohort"].contains(cohort)) {
      inconsistent = validation["per_cohort"][cohort].value("count", 0u);
    }
    if (fs::exists(nt)) {
      const graph::GraphStore store = graph::parse_ntriples(read_file(nt));
      m.structure = metrics::summarize_graph(store, ctx.degree_include_type,
                                             inconsistent);
    }
    write_file(ctx.out / "report" / ("cohort_" + text::casefold(cohort) + ".json"),
               metrics::cohort_to_json(m));
    all_metrics.push_back(std::move(m));
  }

  write_file(ctx.out / "report" / "metrics.csv",
             metrics::cohort_to_csv(all_metrics));
  write_file(ctx.out / "report" / "model_comparison.json",
             metrics::model_comparison_to_json(comparison));

  // Radar series: per-model means across patients.
  std::map<std::string, std::map<std::string, double>> radar;
  for (const auto& [model, series] : comparison.per_model_correctness) {
    double sum = 0.0;
    for (double v : series) sum += v;
    radar["correctness"][model] =
        series.empty() ? 0.0 : sum / static_cast<double>(series.size());
  }
  for (const corpus::ClinicalReport& report : ctx.reports) {
    const fs::path models_file =
        ctx.stage_file("relate", report.patient_id + ".models.json");
    if (!fs::exists(models_file)) continue;
    const json models = json::parse(read_file(models_file));
    for (auto it = models["counts"].begin(); it != models["counts"].end(); ++it) {
      radar["relations_per_patient"][it.key()] +=
          it.value().get<double>() / static_cast<double>(ctx.reports.size());
    }
  }
  write_file(ctx.out / "report" / "radar.csv", metrics::radar_to_csv(radar));
}

// ------------------------------------------------------------ stage table

struct StageSpec {
  std::string name;
  void (*run)(const Context&);
  std::vector<fs::path> (*outputs)(const Context&);
};

std::vector<fs::path> extract_outputs(const Context& ctx) {
  return per_patient_outputs(ctx, "extract", ".json");
}
std::vector<fs::path> ground_outputs(const Context& ctx) {
  return per_patient_outputs(ctx, "ground", ".json");
}
std::vector<fs::path> map_outputs(const Context& ctx) {
  return per_patient_outputs(ctx, "map", ".json");
}
std::vector<fs::path> relate_outputs(const Context& ctx) {
  auto out = per_patient_outputs(ctx, "relate", ".json");
  for (const char* suffix :
       {".quarantine.json", ".models.json", ".gaps.json"}) {
    const auto extra = per_patient_outputs(ctx, "relate", suffix);
    out.insert(out.end(), extra.begin(), extra.end());
  }
  return out;
}
std::vector<fs::path> encode_outputs(const Context& ctx) {
  std::vector<fs::path> out = {ctx.out / "graph" / "cohort.nt"};
  std::set<std::string> cohorts;
  for (const auto& r : ctx.reports) {
    cohorts.insert(text::casefold(corpus::to_string(r.cohort)));
  }
  for (const std::string& c : cohorts) {
    out.push_back(ctx.out / "graph" / (c + ".nt"));
    out.push_back(ctx.out / "graph" / (c + ".ttl"));
  }
  return out;
}
std::vector<fs::path> validate_outputs(const Context& ctx) {
  return {ctx.out / "validate" / "inconsistencies.json"};
}
std::vector<fs::path> report_outputs(const Context& ctx) {
  std::vector<fs::path> out = {ctx.out / "report" / "metrics.csv",
                               ctx.out / "report" / "model_comparison.json",
                               ctx.out / "report" / "radar.csv"};
  std::set<std::string> cohorts;
  for (const auto& r : ctx.reports) {
    cohorts.insert(text::casefold(corpus::to_string(r.cohort)));
  }
  for (const std::string& c : cohorts) {
    out.push_back(ctx.out / "report" / ("cohort_" + c + ".json"));
  }
  return out;
}

const std::vector<StageSpec>& stages() {
  static const std::vector<StageSpec> table = {
      {"extract", stage_extract, extract_outputs},
      {"ground", stage_ground, ground_outputs},
      {"map", stage_map, map_outputs},
      {"relate", stage_relate, relate_outputs},
      {"encode", stage_encode, encode_outputs},
      {"validate", stage_validate, validate_outputs},
      {"report", stage_report, report_outputs},
  };
  return table;
}

}  // namespace

const std::vector<std::string>& stage_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const StageSpec& s : stages()) out.push_back(s.name);
    return out;
  }();
  return names;
}

void run_stage(const std::string& stage, const Options& options) {
  const Context ctx = make_context(options);
  for (const StageSpec& spec : stages()) {
    if (spec.name == stage) {
      spec.run(ctx);
      return;
    }
  }
  throw ConfigError("unknown stage: " + stage);
}

int run_pipeline(const Options& options) {
  try {
    const Context ctx = make_context(options);
    if (ctx.reports.empty()) {
      std::cerr << "warning: no reports selected under " << ctx.corpus_root
                << "\n";
    }
    for (const StageSpec& spec : stages()) {
      if (all_exist(spec.outputs(ctx))) {
        std::cerr << "stage " << spec.name << ": cached, skipping\n";
        continue;
      }
      std::cerr << "stage " << spec.name << ": running\n";
      spec.run(ctx);
    }
    return kExitOk;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "pipeline failure: " << e.what() << "\n";
    return kExitStageFailure;
  }
}

std::string run_query(const std::string& graph_path,
                      const std::string& query_path) {
  const graph::GraphStore store = graph::parse_ntriples(read_file(graph_path));
  const graph::SparqlQuery query = graph::parse_sparql(read_file(query_path));
  const auto rows = graph::eval_sparql(query, store);
  std::string out;
  for (std::size_t i = 0; i < query.select.size(); ++i) {
    out += (i == 0 ? "?" : "\t?") + query.select[i];
  }
  out += '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      out += (i == 0 ? "" : "\t") + graph::render_term(row[i]);
    }
    out += '\n';
  }
  return out;
}

}  // namespace kgf::pipeline
