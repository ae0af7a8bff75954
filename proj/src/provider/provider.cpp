// Copyright 2026 The specbridge Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "specbridge/provider/provider.h"

#include "json.hpp"

#include <algorithm>
#include <random>
#include <thread>

#include "specbridge/core/errors.h"
#include "specbridge/core/text.h"

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "httplib.h"

namespace specbridge {

using nlohmann::json;

std::string_view to_string(Role r) { return r == Role::System ? "system" : "user"; }

std::string_view to_string(RequestTag t) {
  switch (t) {
    case RequestTag::SpecGen: return "specgen";
    case RequestTag::CodeGen: return "codegen";
    case RequestTag::Translate: return "translate";
    case RequestTag::Repair: return "repair";
  }
  return "?";
}

RequestTag parse_request_tag(std::string_view s) {
  for (RequestTag t : {RequestTag::SpecGen, RequestTag::CodeGen, RequestTag::Translate,
                       RequestTag::Repair}) {
    if (to_string(t) == s) return t;
  }
  throw FormatError("unknown request tag: " + std::string(s));
}

const std::string& ChatRequest::user_text() const {
  static const std::string kEmpty;
  for (auto it = messages.rbegin(); it != messages.rend(); ++it) {
    if (it->role == Role::User) return it->text;
  }
  return kEmpty;
}

std::string render_request(const ChatRequest& request) {
  json j;
  j["tag"] = to_string(request.tag);
  // Fixed-point so the digest never depends on float printing quirks.
  j["temperature_milli"] = static_cast<long>(request.temperature * 1000.0 + 0.5);
  j["max_tokens"] = request.max_tokens;
  j["seed"] = request.seed;
  json msgs = json::array();
  for (const auto& m : request.messages) {
    msgs.push_back({{"role", to_string(m.role)}, {"content", m.text}});
  }
  j["messages"] = std::move(msgs);
  return j.dump();
}

std::string prompt_digest(const ChatRequest& request) {
  return sha256_hex(render_request(request));
}

// ---- replay ---------------------------------------------------------------

ReplayProvider::ReplayProvider(std::filesystem::path dir) : dir_(std::move(dir)) {
  if (!std::filesystem::is_directory(dir_)) {
    throw EnvironmentError("replay directory does not exist: " + dir_.string());
  }
}

ModelResponse ReplayProvider::complete(const ChatRequest& request) {
  const std::string digest = prompt_digest(request);
  const auto path = dir_ / (digest + ".txt");
  if (!std::filesystem::exists(path)) throw ReplayMiss(digest);
  return ModelResponse{read_file(path), id(), digest};
}

void ReplayProvider::write_fixture(const std::filesystem::path& dir, const ChatRequest& request,
                                   std::string_view text) {
  write_file(dir / (prompt_digest(request) + ".txt"), text);
}

// ---- scripted -------------------------------------------------------------

void ScriptedProvider::add(Rule rule) {
  std::lock_guard lock(mu_);
  rules_.push_back(std::move(rule));
}

ScriptedProvider ScriptedProvider::from_json_file(const std::filesystem::path& path) {
  const json j = json::parse(read_file(path));
  std::vector<Rule> rules;
  for (const auto& r : j) {
    Rule rule;
    rule.tag = parse_request_tag(r.at("tag").get<std::string>());
    rule.contains = r.value("contains", std::vector<std::string>{});
    rule.excludes = r.value("excludes", std::vector<std::string>{});
    rule.seed = r.value("seed", -1);
    rule.response = r.at("response").get<std::string>();
    rules.push_back(std::move(rule));
  }
  return ScriptedProvider(std::move(rules));
}

ModelResponse ScriptedProvider::complete(const ChatRequest& request) {
  const std::string digest = prompt_digest(request);
  const std::string& text = request.user_text();
  std::lock_guard lock(mu_);
  for (const auto& rule : rules_) {
    if (rule.tag != request.tag) continue;
    if (rule.seed >= 0 && rule.seed != request.seed) continue;
    const bool all = std::all_of(rule.contains.begin(), rule.contains.end(),
                                 [&](const std::string& n) { return text.find(n) != std::string::npos; });
    const bool none = std::none_of(rule.excludes.begin(), rule.excludes.end(),
                                   [&](const std::string& n) { return text.find(n) != std::string::npos; });
    if (all && none) return ModelResponse{rule.response, id(), digest};
  }
  throw ReplayMiss(digest);
}

// ---- recording ------------------------------------------------------------

RecordingProvider::RecordingProvider(Provider& inner, std::filesystem::path tee_dir)
    : inner_(inner), tee_dir_(std::move(tee_dir)) {}

ModelResponse RecordingProvider::complete(const ChatRequest& request) {
  LoggedExchange entry{request, prompt_digest(request), {}, false};
  try {
    ModelResponse resp = inner_.complete(request);
    entry.response = resp.text;
    if (!tee_dir_.empty()) ReplayProvider::write_fixture(tee_dir_, request, resp.text);
    std::lock_guard lock(mu_);
    log_.push_back(std::move(entry));
    return resp;
  } catch (...) {
    entry.failed = true;
    std::lock_guard lock(mu_);
    log_.push_back(std::move(entry));
    throw;
  }
}

std::vector<LoggedExchange> RecordingProvider::log() const {
  std::lock_guard lock(mu_);
  return log_;
}

std::size_t RecordingProvider::count(RequestTag tag) const {
  std::lock_guard lock(mu_);
  return static_cast<std::size_t>(std::count_if(
      log_.begin(), log_.end(), [&](const LoggedExchange& e) { return e.request.tag == tag; }));
}

void RecordingProvider::clear() {
  std::lock_guard lock(mu_);
  log_.clear();
}

// ---- live -----------------------------------------------------------------

LiveProvider::LiveProvider(LiveConfig config) : config_(std::move(config)) {
  if (config_.max_attempts < 1) config_.max_attempts = 1;
  if (config_.max_in_flight < 1) config_.max_in_flight = 1;
}

std::string LiveProvider::request_body(const ChatRequest& request) const {
  json msgs = json::array();
  for (const auto& m : request.messages) {
    msgs.push_back({{"role", to_string(m.role)}, {"content", m.text}});
  }
  json body = {{"model", config_.model},
               {"messages", std::move(msgs)},
               {"temperature", request.temperature},
               {"max_tokens", request.max_tokens},
               {"seed", request.seed}};
  return body.dump();
}

std::string LiveProvider::parse_completion(std::string_view body) {
  const json j = json::parse(body, nullptr, false);
  if (j.is_discarded()) throw ProviderError("provider returned non-JSON body");
  if (!j.contains("choices") || j["choices"].empty()) {
    throw ProviderError("provider response has no choices: " + std::string(body.substr(0, 200)));
  }
  const auto& msg = j["choices"][0]["message"];
  if (!msg.contains("content") || !msg["content"].is_string()) {
    throw ProviderError("provider response has no message content");
  }
  return msg["content"].get<std::string>();
}

ModelResponse LiveProvider::complete(const ChatRequest& request) {
  {
    std::unique_lock lock(mu_);
    cv_.wait(lock, [&] { return in_flight_ < config_.max_in_flight; });
    ++in_flight_;
  }
  struct Release {
    LiveProvider* self;
    ~Release() {
      {
        std::lock_guard lock(self->mu_);
        --self->in_flight_;
      }
      self->cv_.notify_one();
    }
  } release{this};

  const std::string body = request_body(request);
  std::mt19937_64 rng(std::random_device{}());
  std::string last_error;
  auto backoff = config_.initial_backoff;
  for (int attempt = 1; attempt <= config_.max_attempts; ++attempt) {
    httplib::Client client(config_.base_url);
    client.set_read_timeout(config_.timeout);
    client.set_write_timeout(config_.timeout);
    httplib::Headers headers;
    if (!config_.api_key.empty()) {
      headers.emplace("Authorization", "Bearer " + config_.api_key);
    }
    auto res = client.Post(config_.path, headers, body, "application/json");
    if (res && res->status == 200) {
      return ModelResponse{parse_completion(res->body), id(), prompt_digest(request)};
    }
    last_error = res ? "HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 200)
                     : "transport error: " + httplib::to_string(res.error());
    // Client errors other than rate limiting will not improve with retries.
    if (res && res->status >= 400 && res->status < 500 && res->status != 429) break;
    if (attempt == config_.max_attempts) break;
    std::uniform_int_distribution<long> jitter(0, backoff.count() / 2);
    std::this_thread::sleep_for(backoff + std::chrono::milliseconds(jitter(rng)));
    backoff *= 2;
  }
  throw ProviderError("provider request failed after retries: " + last_error);
}

}  // namespace specbridge
