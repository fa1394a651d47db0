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

#include "kgf/graph/serialize.hpp"

#include <algorithm>
#include <map>
#include <sstream>

#include "kgf/errors.hpp"
#include "kgf/text.hpp"

namespace kgf::graph {

std::string serialize_ntriples(const GraphStore& store) {
  std::vector<std::string> lines;
  lines.reserve(store.size());
  for (const RdfTriple& t : store.triples()) {
    lines.push_back(render_term(t.subject) + " " + render_term(t.predicate) +
                    " " + render_term(t.object) + " .");
  }
  std::sort(lines.begin(), lines.end());
  std::string out;
  for (const std::string& line : lines) {
    out += line;
    out += '\n';
  }
  return out;
}

namespace {

class LineParser {
 public:
  LineParser(std::string_view line, long lineno) : s_(line), lineno_(lineno) {}

  void skip_ws() {
    while (pos_ < s_.size() &&
           (s_[pos_] == ' ' || s_[pos_] == '\t')) {
      ++pos_;
    }
  }

  bool at_end() {
    skip_ws();
    return pos_ >= s_.size();
  }

  char peek() {
    skip_ws();
    if (pos_ >= s_.size()) fail("unexpected end of line");
    return s_[pos_];
  }

  Iri parse_iri() {
    if (peek() != '<') fail("expected '<'");
    const std::size_t close = s_.find('>', pos_);
    if (close == std::string_view::npos) fail("unterminated IRI");
    std::string value(s_.substr(pos_ + 1, close - pos_ - 1));
    pos_ = close + 1;
    try {
      return Iri(std::move(value));
    } catch (const DomainError& e) {
      fail(e.what());
    }
    return Iri();  // unreachable
  }

  Literal parse_literal() {
    if (peek() != '"') fail("expected '\"'");
    ++pos_;
    std::string lexical;
    bool closed = false;
    while (pos_ < s_.size()) {
      const char c = s_[pos_];
      if (c == '\\') {
        if (pos_ + 1 >= s_.size()) fail("dangling escape");
        const char e = s_[pos_ + 1];
        switch (e) {
          case '\\': lexical += '\\'; break;
          case '"': lexical += '"'; break;
          case 'n': lexical += '\n'; break;
          case 'r': lexical += '\r'; break;
          case 't': lexical += '\t'; break;
          default: fail(std::string("unknown escape \\") + e);
        }
        pos_ += 2;
      } else if (c == '"') {
        ++pos_;
        closed = true;
        break;
      } else {
        lexical += c;
        ++pos_;
      }
    }
    if (!closed) fail("unterminated literal");

    Literal lit;
    lit.lexical = std::move(lexical);
    if (pos_ + 1 < s_.size() && s_[pos_] == '^' && s_[pos_ + 1] == '^') {
      pos_ += 2;
      const Iri dt = parse_iri();
      const auto type = literal_type_from_iri(dt.value);
      if (!type) fail("unsupported literal datatype: " + dt.value);
      lit.datatype = *type;
    }
    return lit;
  }

  Node parse_object() {
    return peek() == '"' ? Node(parse_literal()) : Node(parse_iri());
  }

  void expect_dot() {
    if (peek() != '.') fail("expected terminating '.'");
    ++pos_;
    if (!at_end()) fail("trailing content after '.'");
  }

  [[noreturn]] void fail(const std::string& msg) {
    throw ParseError("N-Triples: " + msg, lineno_,
                     static_cast<long>(pos_) + 1);
  }

 private:
  std::string_view s_;
  std::size_t pos_ = 0;
  long lineno_;
};

}  // namespace

GraphStore parse_ntriples(const std::string& content) {
  GraphStore store;
  long lineno = 0;
  for (const std::string& line : text::split(content, '\n')) {
    ++lineno;
    if (text::trim(line).empty()) continue;
    LineParser p(line, lineno);
    RdfTriple t;
    t.subject = p.parse_iri();
    t.predicate = p.parse_iri();
    t.object = p.parse_object();
    p.expect_dot();
    store.insert(t);
  }
  return store;
}

std::string serialize_turtle(const GraphStore& store) {
  // Longest-base-first prefix compression.
  std::vector<std::pair<std::string, std::string>> bases;  // (base, prefix)
  for (const auto& [prefix, base] : store.prefixes) {
    bases.emplace_back(base, prefix);
  }
  std::sort(bases.begin(), bases.end(), [](const auto& a, const auto& b) {
    return a.first.size() > b.first.size();
  });
  auto compress = [&](const Iri& iri) -> std::string {
    for (const auto& [base, prefix] : bases) {
      if (text::starts_with(iri.value, base)) {
        const std::string local = iri.value.substr(base.size());
        if (local.find('/') == std::string::npos &&
            local.find('#') == std::string::npos && !local.empty()) {
          return prefix + ":" + local;
        }
      }
    }
    return render_term(iri);
  };
  auto render = [&](const Node& n) -> std::string {
    return is_iri(n) ? compress(as_iri(n)) : render_term(n);
  };

  std::ostringstream out;
  for (const auto& [prefix, base] : store.prefixes) {
    out << "@prefix " << prefix << ": <" << base << "> .\n";
  }
  if (!store.prefixes.empty()) out << "\n";

  std::map<Iri, std::vector<const RdfTriple*>> by_subject;
  for (const RdfTriple& t : store.triples()) {
    by_subject[t.subject].push_back(&t);
  }
  for (const auto& [subject, triples] : by_subject) {
    out << compress(subject);
    for (std::size_t i = 0; i < triples.size(); ++i) {
      out << (i == 0 ? " " : " ;\n    ") << compress(triples[i]->predicate)
          << " " << render(triples[i]->object);
    }
    out << " .\n";
  }
  return out.str();
}

}  // namespace kgf::graph
