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

#include "kgf/graph/store.hpp"

#include <algorithm>
#include <functional>

#include "kgf/errors.hpp"
#include "kgf/text.hpp"

namespace kgf::graph {

using ontology::SchemaDecl;
using ontology::SchemaDeclKind;

SubclassClosure SubclassClosure::build(
    const std::vector<SchemaDecl>& schema,
    const std::vector<std::pair<std::string, std::string>>& equivalences) {
  // Union equivalent classes into one closure node.
  std::map<std::string, std::string> parent;
  std::function<std::string(const std::string&)> find =
      [&](const std::string& x) -> std::string {
    auto it = parent.find(x);
    if (it == parent.end() || it->second == x) return x;
    const std::string root = find(it->second);
    parent[x] = root;
    return root;
  };
  auto unite = [&](const std::string& a, const std::string& b) {
    const std::string ra = find(a);
    const std::string rb = find(b);
    if (ra != rb) parent[std::max(ra, rb)] = std::min(ra, rb);
  };
  for (const auto& [a, b] : equivalences) unite(a, b);

  std::map<std::string, std::set<std::string>> edges;
  std::set<std::string> nodes;
  for (const SchemaDecl& d : schema) {
    if (d.kind != SchemaDeclKind::SubClassOf) continue;
    const std::string sub = find(d.subject);
    const std::string sup = find(d.object);
    nodes.insert(sub);
    nodes.insert(sup);
    if (sub != sup) edges[sub].insert(sup);
  }
  for (const auto& [a, b] : equivalences) {
    nodes.insert(find(a));
    nodes.insert(find(b));
  }

  // Cycle detection plus memoized ancestor sets.
  std::map<std::string, int> color;  // 0 white, 1 gray, 2 black
  std::map<std::string, std::set<std::string>> ancestors;
  std::vector<std::string> stack;
  std::function<void(const std::string&)> visit = [&](const std::string& node) {
    color[node] = 1;
    stack.push_back(node);
    auto& anc = ancestors[node];
    anc.insert(node);
    for (const std::string& next : edges[node]) {
      if (color[next] == 1) {
        auto it = std::find(stack.begin(), stack.end(), next);
        std::vector<std::string> cycle(it, stack.end());
        cycle.push_back(next);
        throw DomainError("SubClassOf cycle: " + text::join(cycle, " -> "));
      }
      if (color[next] == 0) visit(next);
      anc.insert(next);
      for (const std::string& a : ancestors[next]) anc.insert(a);
    }
    stack.pop_back();
    color[node] = 2;
  };
  for (const std::string& n : nodes) {
    if (color[n] == 0) visit(n);
  }

  SubclassClosure closure;
  // Expand back to the declared class names: every class in an
  // equivalence group carries the group's ancestors, and every ancestor
  // group expands to all of its members.
  std::map<std::string, std::set<std::string>> group_members;
  auto note_member = [&](const std::string& name) {
    group_members[find(name)].insert(name);
  };
  for (const SchemaDecl& d : schema) {
    if (d.kind != SchemaDeclKind::SubClassOf) continue;
    note_member(d.subject);
    note_member(d.object);
  }
  for (const auto& [a, b] : equivalences) {
    note_member(a);
    note_member(b);
  }
  for (const auto& [root, members] : group_members) {
    std::set<std::string> expanded;
    for (const std::string& anc_root : ancestors[root]) {
      const auto it = group_members.find(anc_root);
      if (it == group_members.end()) {
        expanded.insert(anc_root);
      } else {
        expanded.insert(it->second.begin(), it->second.end());
      }
    }
    for (const std::string& member : members) {
      closure.ancestors_[member] = expanded;
      closure.ancestors_[member].insert(member);
    }
  }
  return closure;
}

bool SubclassClosure::is_subclass_of(const std::string& sub,
                                     const std::string& sup) const {
  if (sub == sup) return true;
  auto it = ancestors_.find(sub);
  return it != ancestors_.end() && it->second.count(sup) > 0;
}

std::vector<std::pair<std::string, std::string>>
SubclassClosure::nonreflexive_pairs() const {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& [sub, sups] : ancestors_) {
    for (const std::string& sup : sups) {
      if (sub != sup) out.emplace_back(sub, sup);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

SubclassClosure subclass_closure(
    const std::vector<SchemaDecl>& schema,
    const std::vector<std::pair<std::string, std::string>>& equivalences) {
  return SubclassClosure::build(schema, equivalences);
}

namespace {

std::map<std::string, std::set<std::string>> type_index(const GraphStore& store) {
  std::map<std::string, std::set<std::string>> types;
  for (const RdfTriple& t : store.triples()) {
    if (t.predicate == rdf_type() && is_iri(t.object)) {
      types[t.subject.value].insert(as_iri(t.object).value);
    }
  }
  return types;
}

std::string join_types(const std::set<std::string>& types) {
  if (types.empty()) return "untyped";
  std::vector<std::string> v(types.begin(), types.end());
  return text::join(v, ",");
}

}  // namespace

std::vector<Inconsistency> validate_domain_range(const GraphStore& store) {
  std::map<std::string, std::pair<std::string, std::string>> domain_range;
  for (const SchemaDecl& d : store.schema) {
    if (d.kind == SchemaDeclKind::DomainRange) {
      domain_range.emplace(d.subject, std::make_pair(d.domain, d.range));
    }
  }
  if (domain_range.empty()) return {};

  const SubclassClosure closure =
      SubclassClosure::build(store.schema, store.equivalences);
  const auto types = type_index(store);

  auto conforms = [&](const std::string& node, const std::string& expected) {
    auto it = types.find(node);
    if (it == types.end()) return false;
    return std::any_of(it->second.begin(), it->second.end(),
                       [&](const std::string& t) {
                         return closure.is_subclass_of(t, expected);
                       });
  };
  auto found_types = [&](const std::string& node) {
    auto it = types.find(node);
    return it == types.end() ? std::string("untyped") : join_types(it->second);
  };

  std::vector<Inconsistency> out;
  for (const RdfTriple& t : store.triples()) {
    if (t.predicate == rdf_type()) continue;
    auto it = domain_range.find(t.predicate.value);
    if (it == domain_range.end()) continue;
    const auto& [domain, range] = it->second;

    if (!conforms(t.subject.value, domain)) {
      out.push_back({t, "domain", domain, found_types(t.subject.value)});
    }
    if (is_iri(t.object)) {
      if (!conforms(as_iri(t.object).value, range)) {
        out.push_back({t, "range", range, found_types(as_iri(t.object).value)});
      }
    } else {
      out.push_back({t, "range", range, "literal"});
    }
  }
  return out;
}

std::vector<RdfTriple> apply_restrictions(
    GraphStore& store, const std::vector<ontology::RestrictionAxiom>& axioms) {
  if (axioms.empty()) return {};
  const SubclassClosure closure =
      SubclassClosure::build(store.schema, store.equivalences);

  std::vector<RdfTriple> inferred;
  bool changed = true;
  while (changed) {
    changed = false;
    const auto types = type_index(store);
    auto has_type = [&](const std::string& node, const std::string& cls) {
      auto it = types.find(node);
      if (it == types.end()) return false;
      return std::any_of(it->second.begin(), it->second.end(),
                         [&](const std::string& t) {
                           return closure.is_subclass_of(t, cls);
                         });
    };
    std::vector<RdfTriple> to_add;
    for (const ontology::RestrictionAxiom& ax : axioms) {
      for (const RdfTriple& t : store.triples()) {
        if (t.predicate.value != ax.property || !is_iri(t.object)) continue;
        if (!has_type(t.subject.value, ax.on_class)) continue;
        if (!has_type(as_iri(t.object).value, ax.filler)) continue;
        to_add.push_back({t.subject, rdf_type(), Iri(ax.superclass)});
      }
    }
    for (const RdfTriple& t : to_add) {
      if (store.insert(t)) {
        inferred.push_back(t);
        changed = true;
      }
    }
  }
  std::sort(inferred.begin(), inferred.end());
  return inferred;
}

}  // namespace kgf::graph
