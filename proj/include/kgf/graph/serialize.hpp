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

#include "kgf/graph/store.hpp"

namespace kgf::graph {

// Canonical bit-exact form: one triple per line, lexicographically sorted
// lines, absolute IRIs in angle brackets, escaped literals with datatype
// suffixes (plain strings carry no suffix).
std::string serialize_ntriples(const GraphStore& store);

// Exact inverse of serialize_ntriples on its own output; throws ParseError
// with a line number on malformed input.
GraphStore parse_ntriples(const std::string& content);

// Readable convenience form: prefix header, subject grouping. Not
// canonical; nothing round-trips through it.
std::string serialize_turtle(const GraphStore& store);

}  // namespace kgf::graph
