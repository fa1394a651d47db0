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

#include <cmath>
#include <cstdlib>
#include <memory>
#include <semaphore>

#include "httplib.h"
#include "json.hpp"
#include "kgf/agents.hpp"
#include "kgf/errors.hpp"

namespace kgf::agents {

using nlohmann::json;

struct HttpCompletionProvider::Impl {
  Options options;
  std::counting_semaphore<64> inflight;

  explicit Impl(Options opts)
      : options(std::move(opts)),
        inflight(std::max(1, std::min(64, options.max_inflight))) {}
};

HttpCompletionProvider::HttpCompletionProvider(Options options)
    : impl_(new Impl(std::move(options))) {}

HttpCompletionProvider::~HttpCompletionProvider() { delete impl_; }

std::string HttpCompletionProvider::id() const {
  return impl_->options.provider_id;
}

AgentResponse HttpCompletionProvider::complete(const AgentRequest& request) {
  const Options& opts = impl_->options;

  json body;
  body["model"] = opts.model;
  body["prompt"] = request.prompt;
  body["temperature"] = request.temperature;
  body["max_tokens"] = request.max_tokens;
  body["logprobs"] = request.want_token_probs;

  impl_->inflight.acquire();
  struct Release {
    std::counting_semaphore<64>* sem;
    ~Release() { sem->release(); }
  } release{&impl_->inflight};

  httplib::Client client(opts.host, opts.port);
  client.set_connection_timeout(opts.timeout_seconds, 0);
  client.set_read_timeout(opts.timeout_seconds, 0);

  httplib::Headers headers;
  if (const char* key = std::getenv(key_env_var(opts.provider_id).c_str())) {
    headers.emplace("Authorization", std::string("Bearer ") + key);
  }

  auto result =
      client.Post(opts.path, headers, body.dump(), "application/json");
  if (!result) {
    throw TransportError("provider " + opts.provider_id +
                         " unreachable: " + httplib::to_string(result.error()));
  }
  if (result->status >= 500) {
    throw TransportError("provider " + opts.provider_id + " returned " +
                         std::to_string(result->status));
  }
  if (result->status >= 400) {
    // Client-side problem (bad request, refused content): not retryable.
    throw ContentError("provider " + opts.provider_id + " rejected request (" +
                       std::to_string(result->status) + "): " + result->body);
  }

  json parsed;
  try {
    parsed = json::parse(result->body);
  } catch (const json::exception& e) {
    throw ContentError("provider " + opts.provider_id +
                       " sent unparseable JSON: " + e.what());
  }
  if (!parsed.contains("text") || !parsed["text"].is_string()) {
    throw ContentError("provider " + opts.provider_id +
                       " response lacks a text field");
  }

  AgentResponse response;
  response.text = parsed["text"].get<std::string>();
  response.provider_id = opts.provider_id;
  if (request.want_token_probs && parsed.contains("token_logprobs") &&
      parsed["token_logprobs"].is_array()) {
    std::vector<std::pair<std::string, double>> probs;
    for (const auto& item : parsed["token_logprobs"]) {
      if (!item.is_array() || item.size() != 2) continue;
      const double p = std::exp(item[1].get<double>());
      if (p > 0.0 && p <= 1.0) {
        probs.emplace_back(item[0].get<std::string>(), p);
      }
    }
    if (!probs.empty()) response.token_probs = std::move(probs);
  }
  return response;
}

}  // namespace kgf::agents
