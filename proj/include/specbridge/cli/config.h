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

#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include "json.hpp"
#include "specbridge/core/model.h"
#include "specbridge/provider/prompts.h"
#include "specbridge/specgen/specgen.h"
#include "specbridge/translate/translate.h"

namespace specbridge {

// Resolved settings of one CLI invocation. Layers, lowest first: built-in
// defaults, the JSON config file, SPECTRA_PROVIDER_URL, command-line flags.
// Every layer is a partial JSON object with the keys of to_json().
struct AppConfig {
  std::string provider = "replay";  // replay | scripted | live
  std::filesystem::path replay_dir;
  std::filesystem::path scripted_rules;
  std::filesystem::path record_dir;  // tee every exchange into a replay dir
  std::string provider_url = "https://api.openai.com";
  std::string model = "gpt-4o";
  int max_in_flight = 4;

  std::string mode = "spectra";
  Language target = Language::Rust;
  int k = 3;
  int repair_rounds = 0;
  int project_repair_rounds = 3;
  std::size_t token_budget = 32000;
  GenBudget budget;
  TemperaturePolicy temperatures;

  int workers = 4;
  int timeout_ms = 10000;
  bool bit_exact = false;
  std::filesystem::path store = "specbridge-store";
  std::filesystem::path scratch;
  bool keep_scratch = false;
  std::filesystem::path templates;
  std::size_t trace_cap = 20;
  bool accumulate = false;
  bool static_specs = true;

  nlohmann::json to_json() const;
  // Throws ConfigError on unknown keys or ill-typed values.
  static AppConfig from_json(const nlohmann::json& j);

  PipelineConfig pipeline(bool project_mode = false) const;
};

// Applies the layers in order with JSON merge-patch semantics, then env, then
// flags. `file` and `flags` may be null.
AppConfig resolve_config(const nlohmann::json& file, const nlohmann::json& flags,
                         const std::map<std::string, std::string>& env = {});

nlohmann::json load_config_file(const std::filesystem::path& path);

}  // namespace specbridge
