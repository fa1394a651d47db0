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

#include "kgf/graph/sparql.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <functional>
#include <set>

#include "kgf/errors.hpp"
#include "kgf/text.hpp"

namespace kgf::graph {

namespace {

const std::set<std::string>& unsupported_keywords() {
  static const std::set<std::string> kw = {
      "OPTIONAL", "UNION",  "DISTINCT", "ORDER",    "LIMIT",  "OFFSET",
      "GROUP",    "HAVING", "ASK",      "CONSTRUCT", "DESCRIBE", "INSERT",
      "DELETE",   "MINUS",  "SERVICE",  "BIND",     "VALUES", "GRAPH",
      "REDUCED",  "FROM",   "EXISTS",   "NOT"};
  return kw;
}

struct SparqlToken {
  enum class Kind {
    Keyword,    // SELECT, WHERE, PREFIX, FILTER, a
    Var,        // ?x
    IriRef,     // <...>
    Prefixed,   // pfx:local (or pfx: alone in a PREFIX decl)
    Literal,    // "..."
    Number,
    Punct,      // { } . ( ) and comparison operators
    End,
  };
  Kind kind = Kind::End;
  std::string value;
  long line = 1;
  long col = 1;
};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) { advance(); }

  const SparqlToken& peek() const { return current_; }

  SparqlToken take() {
    SparqlToken t = current_;
    advance();
    return t;
  }

 private:
  void advance() {
    skip_ws();
    current_ = SparqlToken{};
    current_.line = line_;
    current_.col = col_;
    if (pos_ >= src_.size()) {
      current_.kind = SparqlToken::Kind::End;
      return;
    }
    const char c = src_[pos_];
    if (c == '{' || c == '}' || c == '.' || c == '(' || c == ')') {
      current_.kind = SparqlToken::Kind::Punct;
      current_.value = std::string(1, c);
      bump();
      return;
    }
    if (c == '>' || c == '<' || c == '=') {
      // '<' may open an IRI reference.
      if (c == '<') {
        const std::size_t close = src_.find('>', pos_);
        const std::size_t space = src_.find_first_of(" \t\r\n", pos_);
        if (close != std::string_view::npos &&
            (space == std::string_view::npos || close < space)) {
          current_.kind = SparqlToken::Kind::IriRef;
          current_.value = std::string(src_.substr(pos_ + 1, close - pos_ - 1));
          while (pos_ <= close) bump();
          return;
        }
      }
      current_.kind = SparqlToken::Kind::Punct;
      current_.value = std::string(1, c);
      bump();
      if (pos_ < src_.size() && src_[pos_] == '=' &&
          (current_.value == "<" || current_.value == ">")) {
        current_.value += '=';
        bump();
      }
      return;
    }
    if (c == '?' || c == '$') {
      bump();
      current_.kind = SparqlToken::Kind::Var;
      current_.value = take_word();
      if (current_.value.empty()) {
        throw ParseError("SPARQL: empty variable name", current_.line,
                         current_.col);
      }
      return;
    }
    if (c == '"') {
      bump();
      std::string value;
      while (pos_ < src_.size() && src_[pos_] != '"') {
        if (src_[pos_] == '\\' && pos_ + 1 < src_.size()) {
          const char e = src_[pos_ + 1];
          value += e == 'n' ? '\n' : e == 't' ? '\t' : e;
          bump();
          bump();
        } else {
          value += src_[pos_];
          bump();
        }
      }
      if (pos_ >= src_.size()) {
        throw ParseError("SPARQL: unterminated string literal", current_.line,
                         current_.col);
      }
      bump();  // closing quote
      current_.kind = SparqlToken::Kind::Literal;
      current_.value = value;
      return;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '-' || c == '+') {
      current_.kind = SparqlToken::Kind::Number;
      current_.value = take_word();
      return;
    }
    const std::string word = take_word();
    if (word.empty()) {
      throw ParseError(std::string("SPARQL: unexpected character '") + c + "'",
                       current_.line, current_.col);
    }
    if (word.find(':') != std::string::npos) {
      current_.kind = SparqlToken::Kind::Prefixed;
      current_.value = word;
    } else {
      current_.kind = SparqlToken::Kind::Keyword;
      current_.value = word;
    }
  }

  void skip_ws() {
    for (;;) {
      while (pos_ < src_.size() &&
             std::isspace(static_cast<unsigned char>(src_[pos_]))) {
        bump();
      }
      if (pos_ < src_.size() && src_[pos_] == '#') {
        while (pos_ < src_.size() && src_[pos_] != '\n') bump();
        continue;
      }
      break;
    }
  }

  std::string take_word() {
    std::string out;
    while (pos_ < src_.size()) {
      const char c = src_[pos_];
      if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == ':' ||
          c == '-' || c == '.' ) {
        // A trailing '.' ends a pattern, not a word.
        if (c == '.' && (pos_ + 1 >= src_.size() ||
                         std::isspace(static_cast<unsigned char>(src_[pos_ + 1])) ||
                         src_[pos_ + 1] == '}')) {
          break;
        }
        out += c;
        bump();
      } else {
        break;
      }
    }
    return out;
  }

  void bump() {
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  long line_ = 1;
  long col_ = 1;
  SparqlToken current_;
};

std::map<std::string, std::string> default_prefixes() {
  return {
      {"rdf", "http://www.w3.org/1999/02/22-rdf-syntax-ns#"},
      {"rdfs", "http://www.w3.org/2000/01/rdf-schema#"},
      {"owl", "http://www.w3.org/2002/07/owl#"},
      {"xsd", "http://www.w3.org/2001/XMLSchema#"},
  };
}

class Parser {
 public:
  explicit Parser(const std::string& src) : lexer_(src) {
    query_.prefixes = default_prefixes();
  }

  SparqlQuery parse() {
    while (is_keyword("PREFIX")) parse_prefix();
    parse_select();
    parse_where();
    const SparqlToken& t = lexer_.peek();
    if (t.kind != SparqlToken::Kind::End) {
      if (t.kind == SparqlToken::Kind::Keyword) reject_if_unsupported(t);
      throw ParseError("SPARQL: trailing content after '}'", t.line, t.col);
    }
    validate();
    return query_;
  }

 private:
  bool is_keyword(std::string_view kw) const {
    const SparqlToken& t = lexer_.peek();
    if (t.kind != SparqlToken::Kind::Keyword) return false;
    return text::casefold(t.value) == text::casefold(kw);
  }

  void reject_if_unsupported(const SparqlToken& t) const {
    std::string upper = t.value;
    for (char& c : upper) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    if (unsupported_keywords().count(upper) > 0) {
      throw ParseError("SPARQL: unsupported feature " + upper, t.line, t.col);
    }
  }

  void parse_prefix() {
    lexer_.take();  // PREFIX
    SparqlToken name = lexer_.take();
    if (name.kind != SparqlToken::Kind::Prefixed || name.value.back() != ':') {
      throw ParseError("SPARQL: expected prefix name ending in ':'", name.line,
                       name.col);
    }
    SparqlToken iri = lexer_.take();
    if (iri.kind != SparqlToken::Kind::IriRef) {
      throw ParseError("SPARQL: expected <iri> in PREFIX", iri.line, iri.col);
    }
    query_.prefixes[name.value.substr(0, name.value.size() - 1)] = iri.value;
  }

  void parse_select() {
    if (!is_keyword("SELECT")) {
      const SparqlToken& t = lexer_.peek();
      reject_if_unsupported(t);
      throw ParseError("SPARQL: expected SELECT", t.line, t.col);
    }
    lexer_.take();
    while (lexer_.peek().kind == SparqlToken::Kind::Var) {
      query_.select.push_back(lexer_.take().value);
    }
    if (query_.select.empty()) {
      const SparqlToken& t = lexer_.peek();
      if (t.kind == SparqlToken::Kind::Punct && t.value == "*") {
        throw ParseError("SPARQL: unsupported feature SELECT *", t.line, t.col);
      }
      reject_if_unsupported(t);
      throw ParseError("SPARQL: SELECT needs at least one variable", t.line,
                       t.col);
    }
  }

  void parse_where() {
    if (!is_keyword("WHERE")) {
      const SparqlToken& t = lexer_.peek();
      reject_if_unsupported(t);
      throw ParseError("SPARQL: expected WHERE", t.line, t.col);
    }
    lexer_.take();
    expect_punct("{");
    for (;;) {
      const SparqlToken& t = lexer_.peek();
      if (t.kind == SparqlToken::Kind::Punct && t.value == "}") {
        lexer_.take();
        break;
      }
      if (t.kind == SparqlToken::Kind::End) {
        throw ParseError("SPARQL: unterminated '{'", t.line, t.col);
      }
      if (is_keyword("FILTER")) {
        parse_filter();
      } else {
        if (t.kind == SparqlToken::Kind::Keyword &&
            text::casefold(t.value) != "a") {
          reject_if_unsupported(t);
        }
        parse_pattern();
      }
    }
  }

  void parse_filter() {
    lexer_.take();  // FILTER
    expect_punct("(");
    SparqlToken var = lexer_.take();
    if (var.kind != SparqlToken::Kind::Var) {
      throw ParseError("SPARQL: FILTER expects a variable", var.line, var.col);
    }
    SparqlToken op = lexer_.take();
    if (op.kind != SparqlToken::Kind::Punct) {
      throw ParseError("SPARQL: FILTER expects a comparison operator", op.line,
                       op.col);
    }
    NumericFilter filter;
    filter.var = var.value;
    if (op.value == ">") filter.op = FilterOp::Gt;
    else if (op.value == "<") filter.op = FilterOp::Lt;
    else if (op.value == ">=") filter.op = FilterOp::Ge;
    else if (op.value == "<=") filter.op = FilterOp::Le;
    else if (op.value == "=") filter.op = FilterOp::Eq;
    else {
      throw ParseError("SPARQL: unsupported comparison " + op.value, op.line,
                       op.col);
    }
    SparqlToken num = lexer_.take();
    if (num.kind != SparqlToken::Kind::Number ||
        !text::is_decimal(num.value)) {
      throw ParseError("SPARQL: FILTER expects a numeric constant", num.line,
                       num.col);
    }
    filter.constant = std::strtod(num.value.c_str(), nullptr);
    expect_punct(")");
    query_.filters.push_back(filter);
  }

  void parse_pattern() {
    TriplePattern p;
    p.subject = parse_term(/*predicate_position=*/false);
    p.predicate = parse_term(/*predicate_position=*/true);
    p.object = parse_term(/*predicate_position=*/false);
    // Optional '.' separator.
    const SparqlToken& t = lexer_.peek();
    if (t.kind == SparqlToken::Kind::Punct && t.value == ".") lexer_.take();
    query_.patterns.push_back(std::move(p));
  }

  PatternTerm parse_term(bool predicate_position) {
    SparqlToken t = lexer_.take();
    switch (t.kind) {
      case SparqlToken::Kind::Var:
        return Var{t.value};
      case SparqlToken::Kind::IriRef:
        return make_iri(t.value, t);
      case SparqlToken::Kind::Prefixed: {
        const std::size_t colon = t.value.find(':');
        const std::string prefix = t.value.substr(0, colon);
        auto it = query_.prefixes.find(prefix);
        if (it == query_.prefixes.end()) {
          throw ParseError("SPARQL: undeclared prefix " + prefix, t.line, t.col);
        }
        return make_iri(it->second + t.value.substr(colon + 1), t);
      }
      case SparqlToken::Kind::Keyword:
        if (predicate_position && text::casefold(t.value) == "a") {
          return rdf_type();
        }
        reject_if_unsupported(t);
        throw ParseError("SPARQL: unexpected token " + t.value, t.line, t.col);
      case SparqlToken::Kind::Literal:
        return Literal{t.value, LiteralType::String};
      case SparqlToken::Kind::Number:
        if (!text::is_decimal(t.value)) {
          throw ParseError("SPARQL: malformed number " + t.value, t.line, t.col);
        }
        return Literal{t.value, text::is_integer(t.value)
                                    ? LiteralType::Integer
                                    : LiteralType::Decimal};
      default:
        throw ParseError("SPARQL: unexpected end of query", t.line, t.col);
    }
  }

  Iri make_iri(const std::string& value, const SparqlToken& t) {
    try {
      return Iri(value);
    } catch (const DomainError& e) {
      throw ParseError(std::string("SPARQL: ") + e.what(), t.line, t.col);
    }
  }

  void expect_punct(std::string_view p) {
    SparqlToken t = lexer_.take();
    if (t.kind != SparqlToken::Kind::Punct || t.value != p) {
      throw ParseError("SPARQL: expected '" + std::string(p) + "'", t.line,
                       t.col);
    }
  }

  void validate() {
    if (query_.patterns.empty()) {
      throw ParseError("SPARQL: WHERE block has no triple patterns");
    }
    std::set<std::string> pattern_vars;
    for (const TriplePattern& p : query_.patterns) {
      for (const PatternTerm* term : {&p.subject, &p.predicate, &p.object}) {
        if (const auto* v = std::get_if<Var>(term)) pattern_vars.insert(v->name);
      }
    }
    for (const std::string& v : query_.select) {
      if (pattern_vars.count(v) == 0) {
        throw ParseError("SPARQL: selected variable ?" + v +
                         " appears in no pattern");
      }
    }
    for (const NumericFilter& f : query_.filters) {
      if (pattern_vars.count(f.var) == 0) {
        throw ParseError("SPARQL: filtered variable ?" + f.var +
                         " appears in no pattern");
      }
    }
  }

  Lexer lexer_;
  SparqlQuery query_;
};

}  // namespace

SparqlQuery parse_sparql(const std::string& query_text) {
  return Parser(query_text).parse();
}

namespace {

using Substitution = std::map<std::string, Node>;

bool unify_term(const PatternTerm& term, const Node& node, Substitution& sub,
                std::vector<std::string>& bound_here) {
  if (const auto* v = std::get_if<Var>(&term)) {
    auto it = sub.find(v->name);
    if (it != sub.end()) return it->second == node;
    sub[v->name] = node;
    bound_here.push_back(v->name);
    return true;
  }
  if (const auto* iri = std::get_if<Iri>(&term)) {
    return is_iri(node) && as_iri(node) == *iri;
  }
  const auto& lit = std::get<Literal>(term);
  return std::holds_alternative<Literal>(node) && as_literal(node) == lit;
}

bool unify(const TriplePattern& pattern, const RdfTriple& triple,
           Substitution& sub, std::vector<std::string>& bound_here) {
  if (!unify_term(pattern.subject, Node(triple.subject), sub, bound_here)) {
    return false;
  }
  if (!unify_term(pattern.predicate, Node(triple.predicate), sub, bound_here)) {
    return false;
  }
  return unify_term(pattern.object, triple.object, sub, bound_here);
}

int constant_count(const TriplePattern& p) {
  int n = 0;
  for (const PatternTerm* term : {&p.subject, &p.predicate, &p.object}) {
    if (!std::holds_alternative<Var>(*term)) ++n;
  }
  return n;
}

bool passes_filters(const Substitution& sub,
                    const std::vector<NumericFilter>& filters) {
  for (const NumericFilter& f : filters) {
    auto it = sub.find(f.var);
    if (it == sub.end()) return false;
    if (!std::holds_alternative<Literal>(it->second)) return false;
    const auto value = numeric_value(as_literal(it->second));
    if (!value) return false;
    bool ok = false;
    switch (f.op) {
      case FilterOp::Gt: ok = *value > f.constant; break;
      case FilterOp::Lt: ok = *value < f.constant; break;
      case FilterOp::Ge: ok = *value >= f.constant; break;
      case FilterOp::Le: ok = *value <= f.constant; break;
      case FilterOp::Eq: ok = *value == f.constant; break;
    }
    if (!ok) return false;
  }
  return true;
}

}  // namespace

std::vector<BindingRow> eval_sparql(const SparqlQuery& query,
                                    const GraphStore& store) {
  // Most-constrained-first pattern order keeps the join narrow.
  std::vector<const TriplePattern*> order;
  for (const TriplePattern& p : query.patterns) order.push_back(&p);
  std::stable_sort(order.begin(), order.end(),
                   [](const TriplePattern* a, const TriplePattern* b) {
                     return constant_count(*a) > constant_count(*b);
                   });

  std::vector<BindingRow> rows;
  Substitution sub;
  std::function<void(std::size_t)> join = [&](std::size_t index) {
    if (index == order.size()) {
      if (!passes_filters(sub, query.filters)) return;
      BindingRow row;
      row.reserve(query.select.size());
      for (const std::string& v : query.select) row.push_back(sub.at(v));
      rows.push_back(std::move(row));
      return;
    }
    for (const RdfTriple& t : store.triples()) {
      std::vector<std::string> bound_here;
      if (unify(*order[index], t, sub, bound_here)) {
        join(index + 1);
      }
      for (const std::string& name : bound_here) sub.erase(name);
    }
  };
  join(0);

  std::sort(rows.begin(), rows.end(),
            [](const BindingRow& a, const BindingRow& b) {
              for (std::size_t i = 0; i < a.size() && i < b.size(); ++i) {
                const std::string ra = render_term(a[i]);
                const std::string rb = render_term(b[i]);
                if (ra != rb) return ra < rb;
              }
              return a.size() < b.size();
            });
  return rows;
}

}  // namespace kgf::graph
