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

#pragma once

#include <chrono>
#include <condition_variable>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

namespace specbridge {

enum class Role { System, User };
enum class RequestTag { SpecGen, CodeGen, Translate, Repair };

std::string_view to_string(Role r);
std::string_view to_string(RequestTag t);
RequestTag parse_request_tag(std::string_view s);

struct Message {
  Role role = Role::User;
  std::string text;
  friend bool operator==(const Message&, const Message&) = default;
};

struct ChatRequest {
  std::vector<Message> messages;
  double temperature = 0.0;
  int max_tokens = 4096;
  RequestTag tag = RequestTag::Translate;
  // Sample index. Part of the digest so repeated samples of the same prompt
  // resolve to distinct replay fixtures; forwarded to live endpoints as "seed".
  int seed = 0;

  const std::string& user_text() const;
  friend bool operator==(const ChatRequest&, const ChatRequest&) = default;
};

// Canonical serialization of a request; the prompt digest is its SHA-256.
std::string render_request(const ChatRequest& request);
std::string prompt_digest(const ChatRequest& request);

struct ModelResponse {
  std::string text;
  std::string provider_id;
  std::string prompt_digest;
};

// A completion backend. Implementations must tolerate concurrent calls.
class Provider {
 public:
  virtual ~Provider() = default;
  virtual ModelResponse complete(const ChatRequest& request) = 0;
  virtual std::string id() const = 0;
};

// Answers each request from <dir>/<prompt_digest>.txt, verbatim.
class ReplayProvider final : public Provider {
 public:
  explicit ReplayProvider(std::filesystem::path dir);
  ModelResponse complete(const ChatRequest& request) override;
  std::string id() const override { return "replay"; }

  static void write_fixture(const std::filesystem::path& dir, const ChatRequest& request,
                            std::string_view text);

 private:
  std::filesystem::path dir_;
};

// Rule-based backend: the first rule whose tag matches and whose every
// `contains` needle occurs in the user message answers. Used to author
// replay fixtures and in tests.
class ScriptedProvider final : public Provider {
 public:
  struct Rule {
    RequestTag tag = RequestTag::Translate;
    std::vector<std::string> contains;
    std::vector<std::string> excludes;
    // Matches only this sample index when set (>= 0).
    int seed = -1;
    std::string response;
  };

  ScriptedProvider() = default;
  explicit ScriptedProvider(std::vector<Rule> rules) : rules_(std::move(rules)) {}
  ScriptedProvider(ScriptedProvider&& other) noexcept : rules_(std::move(other.rules_)) {}

  void add(Rule rule);
  // JSON array of {"tag","contains","excludes","seed","response"} objects.
  static ScriptedProvider from_json_file(const std::filesystem::path& path);

  ModelResponse complete(const ChatRequest& request) override;
  std::string id() const override { return "scripted"; }

 private:
  mutable std::mutex mu_;
  std::vector<Rule> rules_;
};

struct LoggedExchange {
  ChatRequest request;
  std::string digest;
  std::string response;
  bool failed = false;
};

// Decorator that keeps the full request/response stream for audit and can
// tee every exchange into a replay directory.
class RecordingProvider final : public Provider {
 public:
  explicit RecordingProvider(Provider& inner, std::filesystem::path tee_dir = {});
  ModelResponse complete(const ChatRequest& request) override;
  std::string id() const override { return inner_.id(); }

  std::vector<LoggedExchange> log() const;
  std::size_t count(RequestTag tag) const;
  void clear();

 private:
  Provider& inner_;
  std::filesystem::path tee_dir_;
  mutable std::mutex mu_;
  std::vector<LoggedExchange> log_;
};

struct LiveConfig {
  std::string base_url = "https://api.openai.com";
  std::string path = "/v1/chat/completions";
  std::string model = "gpt-4o";
  std::string api_key;  // from SPECTRA_API_KEY
  int max_attempts = 5;
  std::chrono::milliseconds initial_backoff{500};
  int max_in_flight = 4;
  std::chrono::seconds timeout{120};
};

// OpenAI-style chat-completions client with bounded retries and an in-flight cap.
class LiveProvider final : public Provider {
 public:
  explicit LiveProvider(LiveConfig config);
  ModelResponse complete(const ChatRequest& request) override;
  std::string id() const override { return "live:" + config_.model; }

  // Exposed for tests: the JSON body sent for `request`.
  std::string request_body(const ChatRequest& request) const;
  static std::string parse_completion(std::string_view body);

 private:
  LiveConfig config_;
  std::mutex mu_;
  std::condition_variable cv_;
  int in_flight_ = 0;
};

}  // namespace specbridge
