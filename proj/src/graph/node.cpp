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

#include "kgf/graph/node.hpp"

#include <cctype>
#include <cstdlib>

#include "kgf/errors.hpp"
#include "kgf/text.hpp"

namespace kgf::graph {

namespace {

bool has_scheme(std::string_view v) {
  if (v.empty() || !std::isalpha(static_cast<unsigned char>(v[0]))) return false;
  for (std::size_t i = 1; i < v.size(); ++i) {
    const char c = v[i];
    if (c == ':') return i + 1 < v.size();
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '+' && c != '.' &&
        c != '-') {
      return false;
    }
  }
  return false;
}

}  // namespace

Iri::Iri(std::string v) : value(std::move(v)) {
  if (!has_scheme(value)) {
    throw DomainError("malformed IRI (missing scheme): " + value);
  }
}

std::string to_string(LiteralType t) {
  switch (t) {
    case LiteralType::String: return "string";
    case LiteralType::Decimal: return "decimal";
    case LiteralType::Integer: return "integer";
    case LiteralType::Boolean: return "boolean";
  }
  return "string";
}

std::string datatype_iri(LiteralType t) {
  static const std::string xsd = "http://www.w3.org/2001/XMLSchema#";
  switch (t) {
    case LiteralType::String: return xsd + "string";
    case LiteralType::Decimal: return xsd + "decimal";
    case LiteralType::Integer: return xsd + "integer";
    case LiteralType::Boolean: return xsd + "boolean";
  }
  return xsd + "string";
}

std::optional<LiteralType> literal_type_from_iri(std::string_view iri) {
  for (LiteralType t : {LiteralType::String, LiteralType::Decimal,
                        LiteralType::Integer, LiteralType::Boolean}) {
    if (iri == datatype_iri(t)) return t;
  }
  return std::nullopt;
}

std::optional<double> numeric_value(const Literal& lit) {
  if (lit.datatype != LiteralType::Decimal &&
      lit.datatype != LiteralType::Integer) {
    return std::nullopt;
  }
  if (!text::is_decimal(lit.lexical)) return std::nullopt;
  return std::strtod(lit.lexical.c_str(), nullptr);
}

bool is_iri(const Node& n) { return std::holds_alternative<Iri>(n); }

const Iri& as_iri(const Node& n) { return std::get<Iri>(n); }

const Literal& as_literal(const Node& n) { return std::get<Literal>(n); }

namespace {

std::string escape_literal(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '\\': out += "\\\\"; break;
      case '"': out += "\\\""; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string render_term(const Iri& iri) { return "<" + iri.value + ">"; }

std::string render_term(const Node& n) {
  if (is_iri(n)) return render_term(as_iri(n));
  const Literal& lit = as_literal(n);
  std::string out = "\"" + escape_literal(lit.lexical) + "\"";
  if (lit.datatype != LiteralType::String) {
    out += "^^<" + datatype_iri(lit.datatype) + ">";
  }
  return out;
}

const Iri& rdf_type() {
  static const Iri iri("http://www.w3.org/1999/02/22-rdf-syntax-ns#type");
  return iri;
}

}  // namespace kgf::graph
