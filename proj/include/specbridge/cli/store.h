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

// Persistent records. Everything is JSON with a "schema" and "version" field
// at the top of each file:
//
//   <store>/specs/<program>/<modality>/outcome.json     search summary
//   <store>/specs/<program>/<modality>/candidate-N.json one per provider call
//   <store>/specs/<program>/<modality>/candidate-N.regen.<ext>
//   <store>/runs/<run id>/run.json                      append-only
//
// Byte strings that are not valid UTF-8 are stored as {"hex": "..."}.

#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "specbridge/core/model.h"
#include "specbridge/specgen/specgen.h"
#include "specbridge/translate/translate.h"

namespace specbridge {

inline constexpr int kStoreVersion = 1;

nlohmann::json bytes_to_json(const Bytes& b);
Bytes bytes_from_json(const nlohmann::json& j);

nlohmann::json to_json(const Specification& s);
Specification spec_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Stage& s);
Stage stage_from_json(const nlohmann::json& j);
nlohmann::json to_json(const StageResult& r);
StageResult stage_result_from_json(const nlohmann::json& j);
nlohmann::json to_json(const PassAtKReport& r);
PassAtKReport report_from_json(const nlohmann::json& j);

class SpecStore {
 public:
  explicit SpecStore(std::filesystem::path root);

  // Replaces whatever was stored for (program, outcome.modality).
  void save(const std::string& program, const GenOutcome& outcome, Language language);

  std::optional<Specification> accepted(const std::string& program, Modality m) const;
  // Lowest-index candidate that parsed, validated or not.
  std::optional<Specification> first_candidate(const std::string& program, Modality m) const;
  // Regenerated program of the accepted candidate, if any.
  std::optional<std::string> accepted_artifact(const std::string& program, Modality m) const;
  SpecSet spec_set(const std::string& program) const;
  std::vector<std::string> programs() const;

  std::filesystem::path dir(const std::string& program, Modality m) const;

 private:
  std::filesystem::path root_;
  mutable std::mutex mu_;
};

struct ExchangeRef {
  std::string tag;
  std::string digest;
  bool failed = false;
  friend bool operator==(const ExchangeRef&, const ExchangeRef&) = default;
};

struct StoredRun {
  std::string run_id;
  std::string kind = "corpus";  // corpus | project
  std::string created;          // UTC, ISO 8601
  nlohmann::json config;
  std::string mode;
  int k_max = 3;
  Language source = Language::C;
  Language target = Language::Rust;
  std::vector<StageResult> results;
  // Project runs: function name -> status (see project.h).
  std::map<std::string, std::string> function_status;
  // program -> modality -> stored spec file used by the run.
  std::map<std::string, std::map<std::string, std::string>> spec_refs;
  std::vector<ExchangeRef> exchanges;
  std::vector<std::string> warnings;

  friend bool operator==(const StoredRun&, const StoredRun&) = default;
};

nlohmann::json to_json(const StoredRun& r);
StoredRun stored_run_from_json(const nlohmann::json& j);

class RunStore {
 public:
  explicit RunStore(std::filesystem::path root);

  // Throws ContractViolation if the run id already exists.
  void write(const StoredRun& run);
  StoredRun read(const std::string& run_id) const;
  std::vector<std::string> list() const;
  // "<UTC timestamp>-<label>", suffixed until unused.
  std::string new_run_id(const std::string& label) const;

 private:
  std::filesystem::path root_;
  mutable std::mutex mu_;
};

std::string utc_timestamp();

}  // namespace specbridge
