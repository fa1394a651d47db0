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

#include "kgf/graph/swrl.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "kgf/errors.hpp"
#include "kgf/text.hpp"

namespace kgf::graph {

namespace {

// Minimal s-expression reader.
struct Sexp {
  bool is_list = false;
  std::string atom;
  std::vector<Sexp> items;
};

class SexpReader {
 public:
  explicit SexpReader(std::string_view src) : src_(src) {}

  std::vector<Sexp> read_all() {
    std::vector<Sexp> out;
    skip_ws();
    while (pos_ < src_.size()) {
      out.push_back(read());
      skip_ws();
    }
    return out;
  }

 private:
  void skip_ws() {
    for (;;) {
      while (pos_ < src_.size() &&
             std::isspace(static_cast<unsigned char>(src_[pos_]))) {
        if (src_[pos_] == '\n') ++line_;
        ++pos_;
      }
      if (pos_ < src_.size() && src_[pos_] == '#') {
        while (pos_ < src_.size() && src_[pos_] != '\n') ++pos_;
        continue;
      }
      break;
    }
  }

  Sexp read() {
    skip_ws();
    if (pos_ >= src_.size()) throw ParseError("rules: unexpected end", line_);
    if (src_[pos_] == '(') {
      ++pos_;
      Sexp list;
      list.is_list = true;
      skip_ws();
      while (pos_ < src_.size() && src_[pos_] != ')') {
        list.items.push_back(read());
        skip_ws();
      }
      if (pos_ >= src_.size()) {
        throw ParseError("rules: unbalanced '('", line_);
      }
      ++pos_;  // ')'
      return list;
    }
    if (src_[pos_] == ')') throw ParseError("rules: stray ')'", line_);
    if (src_[pos_] == '"') {
      ++pos_;
      Sexp atom;
      while (pos_ < src_.size() && src_[pos_] != '"') {
        atom.atom += src_[pos_++];
      }
      if (pos_ >= src_.size()) {
        throw ParseError("rules: unterminated string", line_);
      }
      ++pos_;
      atom.atom = "\"" + atom.atom;  // mark as quoted
      return atom;
    }
    Sexp atom;
    while (pos_ < src_.size() && src_[pos_] != '(' && src_[pos_] != ')' &&
           !std::isspace(static_cast<unsigned char>(src_[pos_]))) {
      atom.atom += src_[pos_++];
    }
    return atom;
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  long line_ = 1;
};

struct RuleContext {
  std::map<std::string, std::string> prefixes;

  std::string resolve(const std::string& token) const {
    if (token.size() >= 2 && token.front() == '<' && token.back() == '>') {
      return token.substr(1, token.size() - 2);
    }
    const std::size_t colon = token.find(':');
    if (colon != std::string::npos) {
      auto it = prefixes.find(token.substr(0, colon));
      if (it != prefixes.end()) return it->second + token.substr(colon + 1);
      // Already a full IRI (has a scheme).
      return token;
    }
    throw ParseError("rules: unresolvable IRI token: " + token);
  }
};

bool is_var(const std::string& s) { return !s.empty() && s[0] == '?'; }

Atom parse_atom(const Sexp& sx, const RuleContext& ctx) {
  if (!sx.is_list || sx.items.empty() || sx.items[0].is_list) {
    throw ParseError("rules: malformed atom");
  }
  const std::string& kind = sx.items[0].atom;
  if (kind == "class") {
    if (sx.items.size() != 3 || !is_var(sx.items[2].atom)) {
      throw ParseError("rules: (class <iri> ?var) expected");
    }
    return ClassAtom{ctx.resolve(sx.items[1].atom), sx.items[2].atom};
  }
  if (kind == "prop") {
    if (sx.items.size() != 4 || !is_var(sx.items[2].atom)) {
      throw ParseError("rules: (prop <iri> ?subj <?var|literal>) expected");
    }
    PropertyAtom atom;
    atom.property_iri = ctx.resolve(sx.items[1].atom);
    atom.subject_var = sx.items[2].atom;
    const std::string& obj = sx.items[3].atom;
    if (is_var(obj)) {
      atom.object_is_var = true;
      atom.object_var = obj;
    } else {
      atom.object_is_var = false;
      if (!obj.empty() && obj[0] == '"') {
        atom.object_literal = Literal{obj.substr(1), LiteralType::String};
      } else if (text::is_decimal(obj)) {
        atom.object_literal = Literal{obj, LiteralType::Decimal};
      } else {
        atom.object_literal = Literal{obj, LiteralType::String};
      }
    }
    return atom;
  }
  if (kind == "gt" || kind == "lt" || kind == "eq") {
    if (sx.items.size() != 3 || !is_var(sx.items[1].atom) ||
        !text::is_decimal(sx.items[2].atom)) {
      throw ParseError("rules: (" + kind + " ?var <number>) expected");
    }
    BuiltinAtom atom;
    atom.op = kind == "gt"   ? BuiltinOp::GreaterThan
              : kind == "lt" ? BuiltinOp::LessThan
                             : BuiltinOp::Equal;
    atom.var = sx.items[1].atom;
    atom.constant = std::strtod(sx.items[2].atom.c_str(), nullptr);
    return atom;
  }
  throw ParseError("rules: unknown atom kind: " + kind);
}

void validate_rule(const SwrlRule& rule) {
  if (rule.body.empty()) throw ParseError("rules: empty body");
  std::set<std::string> body_vars;
  for (const Atom& atom : rule.body) {
    if (const auto* c = std::get_if<ClassAtom>(&atom)) {
      body_vars.insert(c->var);
    } else if (const auto* p = std::get_if<PropertyAtom>(&atom)) {
      body_vars.insert(p->subject_var);
      if (p->object_is_var) body_vars.insert(p->object_var);
    } else if (const auto* b = std::get_if<BuiltinAtom>(&atom)) {
      if (body_vars.count(b->var) == 0) {
        throw ParseError("rules: builtin variable " + b->var +
                         " unbound before use");
      }
    }
  }
  if (body_vars.count(rule.head.var) == 0) {
    throw ParseError("rules: head variable " + rule.head.var +
                     " does not appear in body");
  }
}

}  // namespace

std::vector<SwrlRule> parse_rules(const std::string& content) {
  SexpReader reader(content);
  RuleContext ctx;
  std::vector<SwrlRule> rules;
  for (const Sexp& form : reader.read_all()) {
    if (!form.is_list || form.items.empty()) {
      throw ParseError("rules: expected (prefix ...) or (rule ...)");
    }
    const std::string& head_kw = form.items[0].atom;
    if (head_kw == "prefix") {
      if (form.items.size() != 3) {
        throw ParseError("rules: (prefix name <iri>) expected");
      }
      ctx.prefixes[form.items[1].atom] = ctx.resolve(form.items[2].atom);
      continue;
    }
    if (head_kw != "rule" || form.items.size() != 3) {
      throw ParseError("rules: (rule (body ...) (head ...)) expected");
    }
    const Sexp& body_sx = form.items[1];
    const Sexp& head_sx = form.items[2];
    if (!body_sx.is_list || body_sx.items.empty() ||
        body_sx.items[0].atom != "body" || !head_sx.is_list ||
        head_sx.items.size() != 2 || head_sx.items[0].atom != "head") {
      throw ParseError("rules: (rule (body ...) (head ...)) expected");
    }
    SwrlRule rule;
    for (std::size_t i = 1; i < body_sx.items.size(); ++i) {
      rule.body.push_back(parse_atom(body_sx.items[i], ctx));
    }
    const Atom head_atom = parse_atom(head_sx.items[1], ctx);
    if (const auto* c = std::get_if<ClassAtom>(&head_atom)) {
      rule.head = *c;
    } else {
      throw ParseError("rules: head must be a class atom");
    }
    validate_rule(rule);
    rules.push_back(std::move(rule));
  }
  return rules;
}

std::vector<SwrlRule> load_rules(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open rules file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_rules(ss.str());
}

namespace {

using Binding = std::map<std::string, Node>;

// Enumerates bindings satisfying body atoms from `index` on; calls `emit`
// for each complete binding.
void enumerate(const std::vector<Atom>& body, std::size_t index,
               const GraphStore& store, const SubclassClosure& closure,
               const std::map<std::string, std::set<std::string>>& types,
               Binding& binding, const std::function<void(const Binding&)>& emit) {
  if (index == body.size()) {
    emit(binding);
    return;
  }
  const Atom& atom = body[index];

  if (const auto* c = std::get_if<ClassAtom>(&atom)) {
    auto member = [&](const std::string& node) {
      auto it = types.find(node);
      if (it == types.end()) return false;
      return std::any_of(it->second.begin(), it->second.end(),
                         [&](const std::string& t) {
                           return closure.is_subclass_of(t, c->class_iri);
                         });
    };
    auto bound = binding.find(c->var);
    if (bound != binding.end()) {
      if (is_iri(bound->second) && member(as_iri(bound->second).value)) {
        enumerate(body, index + 1, store, closure, types, binding, emit);
      }
      return;
    }
    for (const auto& [node, _] : types) {
      if (!member(node)) continue;
      binding[c->var] = Iri(node);
      enumerate(body, index + 1, store, closure, types, binding, emit);
      binding.erase(c->var);
    }
    return;
  }

  if (const auto* p = std::get_if<PropertyAtom>(&atom)) {
    for (const RdfTriple& t : store.triples()) {
      if (t.predicate.value != p->property_iri) continue;
      // Subject unification.
      auto s_bound = binding.find(p->subject_var);
      const bool subject_new = s_bound == binding.end();
      if (!subject_new &&
          (!is_iri(s_bound->second) || as_iri(s_bound->second) != t.subject)) {
        continue;
      }
      // Object unification.
      bool object_new = false;
      if (p->object_is_var) {
        auto o_bound = binding.find(p->object_var);
        object_new = o_bound == binding.end();
        if (!object_new && o_bound->second != t.object) continue;
      } else {
        if (!std::holds_alternative<Literal>(t.object) ||
            as_literal(t.object).lexical != p->object_literal.lexical) {
          continue;
        }
      }
      if (subject_new) binding[p->subject_var] = t.subject;
      if (object_new) binding[p->object_var] = t.object;
      enumerate(body, index + 1, store, closure, types, binding, emit);
      if (subject_new) binding.erase(p->subject_var);
      if (object_new) binding.erase(p->object_var);
    }
    return;
  }

  const auto& b = std::get<BuiltinAtom>(atom);
  auto bound = binding.find(b.var);
  if (bound == binding.end()) return;  // validated at parse; defensive
  if (!std::holds_alternative<Literal>(bound->second)) return;
  const auto value = numeric_value(as_literal(bound->second));
  if (!value) return;  // non-numeric literal: binding rejected
  bool ok = false;
  switch (b.op) {
    case BuiltinOp::GreaterThan: ok = *value > b.constant; break;
    case BuiltinOp::LessThan: ok = *value < b.constant; break;
    case BuiltinOp::Equal: ok = *value == b.constant; break;
  }
  if (ok) enumerate(body, index + 1, store, closure, types, binding, emit);
}

std::map<std::string, std::set<std::string>> type_index(const GraphStore& store) {
  std::map<std::string, std::set<std::string>> types;
  for (const RdfTriple& t : store.triples()) {
    if (t.predicate == rdf_type() && is_iri(t.object)) {
      types[t.subject.value].insert(as_iri(t.object).value);
    }
  }
  return types;
}

}  // namespace

std::vector<RdfTriple> apply_swrl(GraphStore& store,
                                  const std::vector<SwrlRule>& rules) {
  if (rules.empty()) return {};
  const SubclassClosure closure =
      SubclassClosure::build(store.schema, store.equivalences);

  std::vector<RdfTriple> inferred;
  bool changed = true;
  while (changed) {
    changed = false;
    const auto types = type_index(store);
    std::vector<RdfTriple> to_add;
    for (const SwrlRule& rule : rules) {
      Binding binding;
      enumerate(rule.body, 0, store, closure, types, binding,
                [&](const Binding& complete) {
                  const Node& head_node = complete.at(rule.head.var);
                  if (!is_iri(head_node)) return;
                  to_add.push_back({as_iri(head_node), rdf_type(),
                                    Iri(rule.head.class_iri)});
                });
    }
    for (const RdfTriple& t : to_add) {
      if (store.insert(t)) {
        inferred.push_back(t);
        changed = true;
      }
    }
  }
  std::sort(inferred.begin(), inferred.end());
  inferred.erase(std::unique(inferred.begin(), inferred.end()), inferred.end());
  return inferred;
}

}  // namespace kgf::graph
