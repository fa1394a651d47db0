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
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "kgf/graph/store.hpp"

namespace kgf::graph {

// A pattern term: variable, IRI, or literal.
struct Var {
  std::string name;  // without the leading '?'
  auto operator<=>(const Var&) const = default;
};

using PatternTerm = std::variant<Var, Iri, Literal>;

struct TriplePattern {
  PatternTerm subject;
  PatternTerm predicate;
  PatternTerm object;
};

enum class FilterOp { Gt, Lt, Ge, Le, Eq };

struct NumericFilter {
  std::string var;
  FilterOp op = FilterOp::Gt;
  double constant = 0.0;
};

// Supported subset: PREFIX declarations, SELECT with explicit variables,
// a basic graph pattern (conjunction of triple patterns), and numeric
// FILTER comparisons. rdf/rdfs/owl/xsd prefixes are predeclared.
struct SparqlQuery {
  std::map<std::string, std::string> prefixes;
  std::vector<std::string> select;  // variable names, no '?'
  std::vector<TriplePattern> patterns;
  std::vector<NumericFilter> filters;
};

// Throws ParseError with line/col on syntax errors; unsupported SPARQL
// constructs (OPTIONAL, UNION, DISTINCT, ORDER BY, ...) raise a ParseError
// that names the feature.
SparqlQuery parse_sparql(const std::string& query_text);

// One result row, aligned with query.select.
using BindingRow = std::vector<Node>;

// Conjunctive evaluation; rows are sorted by their rendered binding tuple
// (bag semantics: duplicates kept). Filters compare numeric literals only;
// bindings holding strings or IRIs fail the filter.
std::vector<BindingRow> eval_sparql(const SparqlQuery& query,
                                    const GraphStore& store);

}  // namespace kgf::graph
