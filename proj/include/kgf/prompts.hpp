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
#include <string>
#include <vector>

namespace kgf::prompts {

// Built-in template ids:
//   extract_eav      {doc}
//   relate           {doc} {entities} {attributes}
//   relate_refine    {doc} {entities} {attributes}
//   relate_conservative {doc} {entities} {attributes}
//   relate_variant   {doc} {entities} {attributes} {variant}
//   judge            {head} {predicate} {tail} {context}
//   adversary        {head} {predicate} {tail} {context} {index}
//   entail           {head} {predicate} {tail} {sentence}
std::vector<std::string> template_ids();

const std::string& template_text(const std::string& template_id);

// Substitutes every {placeholder} with context.at(placeholder).
// Throws ContentError naming the first unbound placeholder.
std::string render_prompt(const std::string& template_id,
                          const std::map<std::string, std::string>& context);

}  // namespace kgf::prompts
