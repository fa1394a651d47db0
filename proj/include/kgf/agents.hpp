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
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace kgf::agents {

enum class AgentRole { Extractor, Refiner, Judge, Adversary };

std::string to_string(AgentRole role);

struct AgentRequest {
  AgentRole role = AgentRole::Extractor;
  std::string prompt;
  double temperature = 0.0;
  int max_tokens = 1024;
  bool want_token_probs = false;
};

struct AgentResponse {
  std::string text;
  // Each probability must lie in (0, 1]; top-k truncation means a token's
  // alternatives need not sum to 1.
  std::optional<std::vector<std::pair<std::string, double>>> token_probs;
  std::string provider_id;
};

struct EmbeddingVector {
  std::vector<double> values;
};

double cosine(const EmbeddingVector& a, const EmbeddingVector& b);

class CompletionProvider {
 public:
  virtual ~CompletionProvider() = default;
  virtual AgentResponse complete(const AgentRequest& request) = 0;
  virtual std::string id() const = 0;
};

class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  // Throws ContentError on empty text.
  virtual EmbeddingVector embed(const std::string& text) = 0;
  virtual std::size_t dimension() const = 0;
};

// Stable fixture key: fnv1a over "<role>\n<prompt>", hex-encoded.
std::string request_hash(AgentRole role, const std::string& prompt);

// Scripted provider reading `<fixtures_dir>/<request_hash>.txt`. A file may
// carry an optional token-probability trailer: a final line of the form
// `##probs token:p token:p ...` (the trailer line is stripped from text).
class MockCompletionProvider : public CompletionProvider {
 public:
  explicit MockCompletionProvider(std::string fixtures_dir)
      : fixtures_dir_(std::move(fixtures_dir)) {}

  AgentResponse complete(const AgentRequest& request) override;
  std::string id() const override { return "mock"; }

  static std::string fixture_filename(AgentRole role, const std::string& prompt);
  // Serializes a response into fixture-file form.
  static std::string render_fixture(
      const std::string& text,
      const std::optional<std::vector<std::pair<std::string, double>>>& probs);

 private:
  std::string fixtures_dir_;
};

struct RetryPolicy {
  int max_retries = 2;
  int initial_backoff_ms = 100;
  double multiplier = 2.0;
};

// Retries transient TransportError failures with exponential backoff;
// ContentError and ConfigError are never retried.
AgentResponse complete(const AgentRequest& request, CompletionProvider& provider,
                       const RetryPolicy& policy = {});

// Generic HTTP adapter for remote completion endpoints. Sends a JSON body
// {model, prompt, temperature, max_tokens, logprobs} and expects a JSON
// response {text, token_logprobs?: [[token, logprob], ...]}. The bearer key
// is read from the environment variable KGF_<PROVIDER>_KEY where PROVIDER
// is the uppercased provider id with non-alphanumerics mapped to '_'.
class HttpCompletionProvider : public CompletionProvider {
 public:
  struct Options {
    std::string provider_id;   // also selects the key env var
    std::string host;          // e.g. "localhost"
    int port = 443;
    std::string path = "/v1/complete";
    std::string model;
    int timeout_seconds = 30;
    int max_inflight = 4;
  };

  explicit HttpCompletionProvider(Options options);
  ~HttpCompletionProvider() override;

  AgentResponse complete(const AgentRequest& request) override;
  std::string id() const override;

  static std::string key_env_var(const std::string& provider_id);

 private:
  struct Impl;
  Impl* impl_;
};

// Offline deterministic embedding: per-token hashed character 2-/3-grams
// (with ^ $ boundary padding) plus a whole-token feature, L2-normalized.
class TrigramEmbeddingProvider : public EmbeddingProvider {
 public:
  explicit TrigramEmbeddingProvider(std::size_t dim = 512) : dim_(dim) {}

  EmbeddingVector embed(const std::string& text) override;
  std::size_t dimension() const override { return dim_; }

 private:
  std::size_t dim_;
};

}  // namespace kgf::agents
