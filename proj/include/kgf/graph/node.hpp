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

#include <compare>
#include <optional>
#include <string>
#include <variant>

namespace kgf::graph {

// Absolute IRI; construction validates a scheme prefix.
struct Iri {
  std::string value;

  Iri() = default;
  explicit Iri(std::string v);

  auto operator<=>(const Iri&) const = default;
};

enum class LiteralType { String, Decimal, Integer, Boolean };

std::string to_string(LiteralType t);
std::string datatype_iri(LiteralType t);
std::optional<LiteralType> literal_type_from_iri(std::string_view iri);

struct Literal {
  std::string lexical;
  LiteralType datatype = LiteralType::String;

  auto operator<=>(const Literal&) const = default;
};

// Numeric value of a Decimal/Integer literal; nullopt otherwise.
std::optional<double> numeric_value(const Literal& lit);

using Node = std::variant<Iri, Literal>;

bool is_iri(const Node& n);
const Iri& as_iri(const Node& n);
const Literal& as_literal(const Node& n);

// N-Triples term rendering: <iri> or "escaped"^^<datatype>.
std::string render_term(const Node& n);
std::string render_term(const Iri& iri);

// Well-known vocabulary IRIs.
const Iri& rdf_type();

}  // namespace kgf::graph
