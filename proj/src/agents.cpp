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

#include "kgf/agents.hpp"

#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <memory>
#include <mutex>
#include <sstream>
#include <thread>

#include "kgf/errors.hpp"
#include "kgf/text.hpp"

namespace kgf::agents {

std::string to_string(AgentRole role) {
  switch (role) {
    case AgentRole::Extractor: return "extractor";
    case AgentRole::Refiner: return "refiner";
    case AgentRole::Judge: return "judge";
    case AgentRole::Adversary: return "adversary";
  }
  return "extractor";
}

double cosine(const EmbeddingVector& a, const EmbeddingVector& b) {
  if (a.values.size() != b.values.size()) {
    throw DomainError("cosine: dimension mismatch");
  }
  double dot = 0.0;
  double na = 0.0;
  double nb = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    dot += a.values[i] * b.values[i];
    na += a.values[i] * a.values[i];
    nb += b.values[i] * b.values[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

std::string request_hash(AgentRole role, const std::string& prompt) {
  return text::to_hex(text::fnv1a(to_string(role) + "\n" + prompt));
}

std::string MockCompletionProvider::fixture_filename(AgentRole role,
                                                     const std::string& prompt) {
  return request_hash(role, prompt) + ".txt";
}

std::string MockCompletionProvider::render_fixture(
    const std::string& response_text,
    const std::optional<std::vector<std::pair<std::string, double>>>& probs) {
  std::string out = response_text;
  if (probs) {
    if (!out.empty() && out.back() != '\n') out += '\n';
    out += "##probs";
    std::ostringstream ss;
    for (const auto& [token, p] : *probs) {
      ss << ' ' << token << ':' << p;
    }
    out += ss.str();
    out += '\n';
  }
  return out;
}

AgentResponse MockCompletionProvider::complete(const AgentRequest& request) {
  if (request.prompt.empty()) throw ContentError("empty prompt");
  const std::filesystem::path file =
      std::filesystem::path(fixtures_dir_) /
      fixture_filename(request.role, request.prompt);
  std::ifstream in(file, std::ios::binary);
  if (!in) {
    throw ConfigError("no mock fixture for request " +
                      request_hash(request.role, request.prompt) + " (role " +
                      to_string(request.role) + ") in " + fixtures_dir_);
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  std::string content = ss.str();

  AgentResponse response;
  response.provider_id = id();

  // Peel off an optional "##probs token:p ..." trailer line.
  std::size_t marker = content.rfind("##probs");
  if (marker != std::string::npos &&
      (marker == 0 || content[marker - 1] == '\n')) {
    std::string trailer = content.substr(marker + 7);
    content.erase(marker);
    if (!content.empty() && content.back() == '\n') content.pop_back();
    std::vector<std::pair<std::string, double>> probs;
    std::istringstream ts{trailer};
    std::string item;
    while (ts >> item) {
      const std::size_t colon = item.rfind(':');
      if (colon == std::string::npos) continue;
      const std::string token = item.substr(0, colon);
      const double p = std::strtod(item.c_str() + colon + 1, nullptr);
      if (p > 0.0 && p <= 1.0) probs.emplace_back(token, p);
    }
    if (request.want_token_probs && !probs.empty()) {
      response.token_probs = std::move(probs);
    }
  }
  response.text = std::move(content);
  return response;
}

AgentResponse complete(const AgentRequest& request, CompletionProvider& provider,
                       const RetryPolicy& policy) {
  if (request.prompt.empty()) throw ContentError("empty prompt");
  int backoff_ms = policy.initial_backoff_ms;
  int attempt = 0;
  for (;;) {
    try {
      return provider.complete(request);
    } catch (const TransportError&) {
      if (attempt >= policy.max_retries) throw;
      ++attempt;
      std::this_thread::sleep_for(std::chrono::milliseconds(backoff_ms));
      backoff_ms = static_cast<int>(backoff_ms * policy.multiplier);
    }
  }
}

EmbeddingVector TrigramEmbeddingProvider::embed(const std::string& input) {
  if (text::trim(input).empty()) {
    throw ContentError("cannot embed empty text");
  }
  EmbeddingVector v;
  v.values.assign(dim_, 0.0);
  auto bump = [&](std::string_view feature, double weight) {
    v.values[text::fnv1a(feature) % dim_] += weight;
  };
  for (const std::string& tok : text::tokenize_casefold(input)) {
    bump("W:" + tok, 2.0);
    const std::string padded = "^" + tok + "$";
    for (std::size_t n = 2; n <= 3; ++n) {
      if (padded.size() < n) continue;
      for (std::size_t i = 0; i + n <= padded.size(); ++i) {
        bump(std::string_view(padded).substr(i, n), 1.0);
      }
    }
  }
  double norm = 0.0;
  for (double x : v.values) norm += x * x;
  norm = std::sqrt(norm);
  if (norm == 0.0) throw ContentError("text produced no embeddable tokens");
  for (double& x : v.values) x /= norm;
  return v;
}

std::string HttpCompletionProvider::key_env_var(const std::string& provider_id) {
  std::string name = "KGF_";
  for (char c : provider_id) {
    name += std::isalnum(static_cast<unsigned char>(c))
                ? static_cast<char>(std::toupper(static_cast<unsigned char>(c)))
                : '_';
  }
  return name + "_KEY";
}

}  // namespace kgf::agents
