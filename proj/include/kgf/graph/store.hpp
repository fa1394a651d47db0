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
#include <set>
#include <string>
#include <vector>

#include "kgf/graph/node.hpp"
#include "kgf/ontology.hpp"

namespace kgf::graph {

struct RdfTriple {
  Iri subject;
  Iri predicate;
  Node object;

  auto operator<=>(const RdfTriple&) const = default;
};

// Value-semantic RDF store with set semantics. Readers may share a store
// concurrently; mutation requires exclusive access (single-writer during
// inference fixpoints).
class GraphStore {
 public:
  // Returns true when the triple was new.
  bool insert(const RdfTriple& triple) { return triples_.insert(triple).second; }
  bool contains(const RdfTriple& triple) const {
    return triples_.count(triple) > 0;
  }
  std::size_t size() const { return triples_.size(); }

  const std::set<RdfTriple>& triples() const { return triples_; }

  std::vector<ontology::SchemaDecl> schema;
  std::vector<std::pair<std::string, std::string>> equivalences;
  std::map<std::string, std::string> prefixes;  // prefix -> IRI base

 private:
  std::set<RdfTriple> triples_;
};

// Reflexive-transitive subclass relation. Equivalent classes share all
// ancestors in both directions.
class SubclassClosure {
 public:
  SubclassClosure() = default;

  // Throws DomainError on a SubClassOf cycle.
  static SubclassClosure build(
      const std::vector<ontology::SchemaDecl>& schema,
      const std::vector<std::pair<std::string, std::string>>& equivalences = {});

  // True when sub ⊑ sup (always true for sub == sup).
  bool is_subclass_of(const std::string& sub, const std::string& sup) const;

  // All (sub, sup) pairs with sub != sup.
  std::vector<std::pair<std::string, std::string>> nonreflexive_pairs() const;

 private:
  std::map<std::string, std::set<std::string>> ancestors_;
};

SubclassClosure subclass_closure(
    const std::vector<ontology::SchemaDecl>& schema,
    const std::vector<std::pair<std::string, std::string>>& equivalences = {});

struct Inconsistency {
  RdfTriple triple;
  std::string side;      // "domain" or "range"
  std::string expected;  // class IRI
  std::string found;     // class IRIs, "untyped", or "literal"
};

// Checks every triple whose predicate declares a DomainRange; subject and
// object types are matched under the subclass closure. Untyped endpoints
// and literal objects of class-ranged predicates count as violations.
std::vector<Inconsistency> validate_domain_range(const GraphStore& store);

// Applies Class ⊓ ∃property.Filler ⊑ Super axioms to fixpoint; returns the
// inferred type triples (also inserted into the store).
std::vector<RdfTriple> apply_restrictions(
    GraphStore& store, const std::vector<ontology::RestrictionAxiom>& axioms);

}  // namespace kgf::graph
