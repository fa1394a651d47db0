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

#include <string>
#include <variant>
#include <vector>

#include "kgf/graph/store.hpp"

namespace kgf::graph {

// Horn-style rule atoms. Variables are written ?name.
struct ClassAtom {
  std::string class_iri;
  std::string var;
};

struct PropertyAtom {
  std::string property_iri;
  std::string subject_var;
  // Object: a variable name (with leading '?') or a literal constant.
  bool object_is_var = true;
  std::string object_var;
  Literal object_literal;
};

enum class BuiltinOp { GreaterThan, LessThan, Equal };

struct BuiltinAtom {
  BuiltinOp op = BuiltinOp::GreaterThan;
  std::string var;
  double constant = 0.0;
};

using Atom = std::variant<ClassAtom, PropertyAtom, BuiltinAtom>;

struct SwrlRule {
  std::vector<Atom> body;  // non-empty
  ClassAtom head;          // head variable must appear in the body
};

// Rule file syntax (s-expressions, `#` comments):
//   (prefix kg <http://example.org/kg#>)
//   (rule (body (class kg:Patient ?p)
//               (prop kg:hasAttribute ?p ?a)
//               (gt ?v 1000))
//         (head (class kg:HighRiskPatient ?p)))
// Atoms: (class <iri> ?v) | (prop <iri> ?s ?o-or-literal) |
//        (gt ?v n) | (lt ?v n) | (eq ?v n)
std::vector<SwrlRule> parse_rules(const std::string& content);
std::vector<SwrlRule> load_rules(const std::string& path);

// Naive forward chaining to fixpoint. Class membership honors the store's
// subclass closure; builtins compare numeric literals only (non-numeric
// bindings are rejected, not errors). Returns the inferred type triples
// (also inserted), sorted.
std::vector<RdfTriple> apply_swrl(GraphStore& store,
                                  const std::vector<SwrlRule>& rules);

}  // namespace kgf::graph
