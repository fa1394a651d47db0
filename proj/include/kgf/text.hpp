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

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace kgf::text {

// ASCII lowercasing; bytes >= 0x80 pass through untouched.
std::string casefold(std::string_view s);

std::string_view trim(std::string_view s);

std::vector<std::string> split(std::string_view s, char delim);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

bool starts_with(std::string_view s, std::string_view prefix);

// A word-like token with its character span in the source text.
struct Token {
  std::string text;
  std::size_t start = 0;  // inclusive
  std::size_t end = 0;    // exclusive
};

// Splits on non-word characters. Word characters are alnum plus - / . _ '
// so clinical forms like "19-9", "mg/dL" and "1.2" survive; leading and
// trailing punctuation is stripped from each token ("qd." -> "qd").
std::vector<Token> tokenize(std::string_view s);

// tokenize + casefold, dropping spans. Convenience for matching code.
std::vector<std::string> tokenize_casefold(std::string_view s);

// Full-string numeric forms. is_decimal accepts an optional sign,
// digits, and at most one fractional part; is_integer has no fraction.
bool is_integer(std::string_view s);
bool is_decimal(std::string_view s);

// FNV-1a 64-bit over raw bytes; the project-wide stable hash.
std::uint64_t fnv1a(std::string_view bytes);
std::string to_hex(std::uint64_t value);

}  // namespace kgf::text
