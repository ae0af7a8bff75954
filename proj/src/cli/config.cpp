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

#include "specbridge/cli/config.h"

#include "specbridge/core/errors.h"
#include "specbridge/core/text.h"

namespace specbridge {

using nlohmann::json;

namespace {

template <typename T>
void take(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("config key '") + key + "' has the wrong type");
  }
}

void take_path(const json& j, const char* key, std::filesystem::path& out) {
  std::string s = out.string();
  take(j, key, s);
  out = s;
}

void reject_unknown(const json& j, const json& known, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be a JSON object");
  for (const auto& [k, v] : j.items()) {
    if (!known.contains(k)) throw ConfigError("unknown config key '" + where + k + "'");
    if (known.at(k).is_object() && !v.is_null()) reject_unknown(v, known.at(k), where + k + ".");
  }
}

}  // namespace

json AppConfig::to_json() const {
  return {
      {"provider", provider},
      {"replay_dir", replay_dir.string()},
      {"scripted_rules", scripted_rules.string()},
      {"record_dir", record_dir.string()},
      {"provider_url", provider_url},
      {"model", model},
      {"max_in_flight", max_in_flight},
      {"mode", mode},
      {"target", std::string(to_string(target))},
      {"k", k},
      {"repair_rounds", repair_rounds},
      {"project_repair_rounds", project_repair_rounds},
      {"token_budget", token_budget},
      {"budget",
       {{"static", budget.static_max},
        {"desc", budget.desc_max},
        {"io", budget.io_max},
        {"batch", budget.batch_k}}},
      {"temperatures",
       {{"spec_gen", temperatures.spec_gen},
        {"codegen", temperatures.codegen},
        {"first_translate", temperatures.first_translate},
        {"later_translate", temperatures.later_translate},
        {"repair", temperatures.repair}}},
      {"workers", workers},
      {"timeout_ms", timeout_ms},
      {"bit_exact", bit_exact},
      {"store", store.string()},
      {"scratch", scratch.string()},
      {"keep_scratch", keep_scratch},
      {"templates", templates.string()},
      {"trace_cap", trace_cap},
      {"accumulate", accumulate},
      {"static_specs", static_specs},
  };
}

AppConfig AppConfig::from_json(const json& j) {
  AppConfig c;
  reject_unknown(j, c.to_json(), "");
  take(j, "provider", c.provider);
  take_path(j, "replay_dir", c.replay_dir);
  take_path(j, "scripted_rules", c.scripted_rules);
  take_path(j, "record_dir", c.record_dir);
  take(j, "provider_url", c.provider_url);
  take(j, "model", c.model);
  take(j, "max_in_flight", c.max_in_flight);
  take(j, "mode", c.mode);
  if (j.contains("target")) {
    std::string t;
    take(j, "target", t);
    try {
      c.target = parse_language(t);
    } catch (const Error& e) {
      throw ConfigError(e.what());
    }
  }
  take(j, "k", c.k);
  take(j, "repair_rounds", c.repair_rounds);
  take(j, "project_repair_rounds", c.project_repair_rounds);
  take(j, "token_budget", c.token_budget);
  if (j.contains("budget")) {
    const json& b = j.at("budget");
    take(b, "static", c.budget.static_max);
    take(b, "desc", c.budget.desc_max);
    take(b, "io", c.budget.io_max);
    take(b, "batch", c.budget.batch_k);
  }
  if (j.contains("temperatures")) {
    const json& t = j.at("temperatures");
    take(t, "spec_gen", c.temperatures.spec_gen);
    take(t, "codegen", c.temperatures.codegen);
    take(t, "first_translate", c.temperatures.first_translate);
    take(t, "later_translate", c.temperatures.later_translate);
    take(t, "repair", c.temperatures.repair);
  }
  take(j, "workers", c.workers);
  take(j, "timeout_ms", c.timeout_ms);
  take(j, "bit_exact", c.bit_exact);
  take_path(j, "store", c.store);
  take_path(j, "scratch", c.scratch);
  take(j, "keep_scratch", c.keep_scratch);
  take_path(j, "templates", c.templates);
  take(j, "trace_cap", c.trace_cap);
  take(j, "accumulate", c.accumulate);
  take(j, "static_specs", c.static_specs);

  if (c.provider != "replay" && c.provider != "scripted" && c.provider != "live") {
    throw ConfigError("provider must be replay, scripted or live");
  }
  if (c.workers < 1) throw ConfigError("workers must be >= 1");
  if (c.timeout_ms < 1) throw ConfigError("timeout_ms must be >= 1");
  if (c.trace_cap < 1) throw ConfigError("trace_cap must be >= 1");
  c.budget.validate();
  c.pipeline().validate();
  c.pipeline(true).validate();
  return c;
}

PipelineConfig AppConfig::pipeline(bool project_mode) const {
  PipelineConfig p;
  parse_mode(mode, p);
  p.k_max = k;
  p.repair_rounds = project_mode ? project_repair_rounds : repair_rounds;
  p.target = target;
  p.token_budget = token_budget;
  return p;
}

AppConfig resolve_config(const json& file, const json& flags,
                         const std::map<std::string, std::string>& env) {
  json merged = AppConfig{}.to_json();
  if (!file.is_null()) {
    reject_unknown(file, merged, "");
    merged.merge_patch(file);
  }
  if (const auto it = env.find("SPECTRA_PROVIDER_URL"); it != env.end() && !it->second.empty()) {
    merged["provider_url"] = it->second;
  }
  if (!flags.is_null()) {
    reject_unknown(flags, merged, "");
    merged.merge_patch(flags);
  }
  return AppConfig::from_json(merged);
}

json load_config_file(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw ConfigError("config file not found: " + path.string());
  try {
    return json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw ConfigError("config file " + path.string() + ": " + e.what());
  }
}

}  // namespace specbridge
