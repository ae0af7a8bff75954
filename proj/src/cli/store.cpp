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

#include "specbridge/cli/store.h"

#include <algorithm>
#include <chrono>
#include <ctime>

#include "specbridge/core/errors.h"
#include "specbridge/core/text.h"

namespace specbridge {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kRunSchema = "specbridge.run";
constexpr const char* kCandidateSchema = "specbridge.candidate";
constexpr const char* kOutcomeSchema = "specbridge.spec-outcome";

bool valid_utf8(std::string_view s) {
  std::size_t i = 0;
  while (i < s.size()) {
    const auto c = static_cast<unsigned char>(s[i]);
    int extra = 0;
    unsigned min = 0;
    if (c < 0x80) { ++i; continue; }
    if ((c & 0xE0) == 0xC0) { extra = 1; min = 0x80; }
    else if ((c & 0xF0) == 0xE0) { extra = 2; min = 0x800; }
    else if ((c & 0xF8) == 0xF0) { extra = 3; min = 0x10000; }
    else return false;
    if (i + extra >= s.size()) return false;
    unsigned cp = c & (0x3F >> extra);
    for (int k = 1; k <= extra; ++k) {
      const auto d = static_cast<unsigned char>(s[i + k]);
      if ((d & 0xC0) != 0x80) return false;
      cp = (cp << 6) | (d & 0x3F);
    }
    if (cp < min || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) return false;
    i += extra + 1;
  }
  return true;
}

IoOrigin parse_origin(const std::string& s) {
  if (s == "model") return IoOrigin::ModelGenerated;
  if (s == "patched") return IoOrigin::Patched;
  if (s == "traced") return IoOrigin::Traced;
  throw FormatError("unknown I/O origin '" + s + "'");
}

void check_header(const json& j, const char* schema) {
  if (j.value("schema", "") != schema) {
    throw FormatError(std::string("expected a ") + schema + " record");
  }
  if (j.value("version", 0) != kStoreVersion) {
    throw FormatError(std::string(schema) + " version " + j.value("version", json(0)).dump() +
                      " is not supported");
  }
}

json read_json(const fs::path& p) {
  try {
    return json::parse(read_file(p));
  } catch (const json::exception& e) {
    throw FormatError(p.string() + ": " + e.what());
  }
}

// Wraps json type errors of a whole decode in FormatError.
template <typename F>
auto decode(const char* what, F&& f) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed ") + what + ": " + e.what());
  }
}

}  // namespace

json bytes_to_json(const Bytes& b) {
  if (valid_utf8(b)) return b;
  static const char hex[] = "0123456789abcdef";
  std::string h;
  for (unsigned char c : b) {
    h.push_back(hex[c >> 4]);
    h.push_back(hex[c & 15]);
  }
  return json{{"hex", h}};
}

Bytes bytes_from_json(const json& j) {
  if (j.is_string()) return j.get<std::string>();
  const std::string h = j.at("hex").get<std::string>();
  if (h.size() % 2) throw FormatError("odd-length hex string");
  Bytes out;
  for (std::size_t i = 0; i < h.size(); i += 2) {
    out.push_back(static_cast<char>(std::stoi(h.substr(i, 2), nullptr, 16)));
  }
  return out;
}

json to_json(const Specification& s) {
  json j = {{"modality", to_string(s.modality)},
            {"status", to_string(s.status)},
            {"candidate_index", s.candidate_index},
            {"provenance",
             {{"temperature", s.provenance.temperature},
              {"provider_id", s.provenance.provider_id},
              {"prompt_digest", s.provenance.prompt_digest}}}};
  switch (s.modality) {
    case Modality::Static: {
      const auto& st = s.static_spec();
      json fns = json::object();
      for (const auto& [name, c] : st.per_function) {
        fns[name] = {{"precondition", c.precondition}, {"postcondition", c.postcondition}};
      }
      j["payload"] = {{"input_format", st.input_format},
                      {"output_format", st.output_format},
                      {"functions", fns}};
      break;
    }
    case Modality::IO: {
      json pairs = json::array();
      for (const auto& p : s.io_spec().pairs) {
        pairs.push_back({{"input", bytes_to_json(p.input)},
                         {"output", bytes_to_json(p.output)},
                         {"origin", to_string(p.origin)},
                         {"comparable", p.comparable}});
      }
      j["payload"] = {{"pairs", pairs}};
      break;
    }
    case Modality::Desc:
      j["payload"] = {{"text", s.desc_spec().text},
                      {"source", s.desc_spec().source == DescSource::Docstring ? "docstring" : "model"}};
      break;
    case Modality::None: throw ContractViolation("spec with modality none");
  }
  return j;
}

Specification spec_from_json(const json& j) {
  return decode("specification", [&] {
    Specification s;
    const Modality m = parse_modality(j.at("modality").get<std::string>());
    const json& p = j.at("payload");
    switch (m) {
      case Modality::Static: {
        StaticSpec st;
        st.input_format = p.at("input_format").get<std::string>();
        st.output_format = p.at("output_format").get<std::string>();
        for (const auto& [name, c] : p.at("functions").items()) {
          st.per_function[name] = {c.at("precondition").get<std::string>(),
                                   c.at("postcondition").get<std::string>()};
        }
        s = make_spec(std::move(st));
        break;
      }
      case Modality::IO: {
        IoSpec io;
        for (const auto& e : p.at("pairs")) {
          io.pairs.push_back({bytes_from_json(e.at("input")), bytes_from_json(e.at("output")),
                              parse_origin(e.at("origin").get<std::string>()),
                              e.at("comparable").get<bool>()});
        }
        s = make_spec(std::move(io));
        break;
      }
      case Modality::Desc:
        s = make_spec(DescSpec{p.at("text").get<std::string>(),
                               p.at("source").get<std::string>() == "docstring"
                                   ? DescSource::Docstring
                                   : DescSource::ModelGenerated});
        break;
      case Modality::None: throw FormatError("spec with modality none");
    }
    s.status = parse_spec_status(j.at("status").get<std::string>());
    s.candidate_index = j.at("candidate_index").get<int>();
    const json& pv = j.at("provenance");
    s.provenance = {pv.at("temperature").get<double>(), pv.at("provider_id").get<std::string>(),
                    pv.at("prompt_digest").get<std::string>()};
    return s;
  });
}

json to_json(const Stage& s) {
  return {{"modality", to_string(s.modality_used)},
          {"candidate", bytes_to_json(s.candidate)},
          {"verdict", s.verdict == Verdict::Pass ? "pass" : "fail"},
          {"failure_kind", to_string(s.failure_kind)},
          {"temperature", s.temperature},
          {"repair_calls", s.repair_calls},
          {"note", bytes_to_json(s.note)}};
}

Stage stage_from_json(const json& j) {
  return decode("stage", [&] {
    Stage s;
    s.modality_used = parse_modality(j.at("modality").get<std::string>());
    s.candidate = bytes_from_json(j.at("candidate"));
    const std::string v = j.at("verdict").get<std::string>();
    if (v != "pass" && v != "fail") throw FormatError("verdict must be pass or fail");
    s.verdict = v == "pass" ? Verdict::Pass : Verdict::Fail;
    s.failure_kind = parse_failure_kind(j.at("failure_kind").get<std::string>());
    s.temperature = j.at("temperature").get<double>();
    s.repair_calls = j.at("repair_calls").get<int>();
    s.note = bytes_from_json(j.at("note"));
    return s;
  });
}

json to_json(const StageResult& r) {
  json stages = json::array();
  for (const auto& s : r.stages) stages.push_back(to_json(s));
  return {{"program_id", r.program_id},
          {"complete", r.complete},
          {"note", bytes_to_json(r.note)},
          {"stages", stages}};
}

StageResult stage_result_from_json(const json& j) {
  return decode("stage result", [&] {
    StageResult r;
    r.program_id = j.at("program_id").get<std::string>();
    r.complete = j.at("complete").get<bool>();
    r.note = bytes_from_json(j.at("note"));
    for (const auto& s : j.at("stages")) r.stages.push_back(stage_from_json(s));
    return r;
  });
}

json to_json(const PassAtKReport& r) {
  json rows = json::array();
  for (const auto& row : r.rows) {
    json e = {{"k", row.k}, {"correct", row.correct_count}, {"total", row.total}};
    e["baseline"] = row.baseline_count ? json(*row.baseline_count) : json(nullptr);
    e["improvement_tenths"] =
        row.improvement_tenths ? json(*row.improvement_tenths) : json(nullptr);
    rows.push_back(e);
  }
  return {{"total", r.total}, {"excluded_incomplete", r.excluded_incomplete}, {"rows", rows}};
}

PassAtKReport report_from_json(const json& j) {
  return decode("report", [&] {
    PassAtKReport r;
    r.total = j.at("total").get<int>();
    r.excluded_incomplete = j.at("excluded_incomplete").get<int>();
    for (const auto& e : j.at("rows")) {
      PassAtKRow row;
      row.k = e.at("k").get<int>();
      row.correct_count = e.at("correct").get<int>();
      row.total = e.at("total").get<int>();
      if (!e.at("baseline").is_null()) row.baseline_count = e.at("baseline").get<int>();
      if (!e.at("improvement_tenths").is_null()) {
        row.improvement_tenths = e.at("improvement_tenths").get<std::int64_t>();
      }
      r.rows.push_back(row);
    }
    return r;
  });
}

// ------------------------------------------------------------------ specs

SpecStore::SpecStore(fs::path root) : root_(std::move(root)) {}

fs::path SpecStore::dir(const std::string& program, Modality m) const {
  return root_ / "specs" / program / std::string(to_string(m));
}

void SpecStore::save(const std::string& program, const GenOutcome& outcome, Language language) {
  std::lock_guard lock(mu_);
  const fs::path d = dir(program, outcome.modality);
  fs::remove_all(d);
  fs::create_directories(d);
  for (const auto& c : outcome.candidates) {
    json j = {{"schema", kCandidateSchema},
              {"version", kStoreVersion},
              {"index", c.index},
              {"prompt_digest", c.prompt_digest},
              {"response", bytes_to_json(c.response)},
              {"parse_error", c.parse_error}};
    j["spec"] = c.spec ? to_json(*c.spec) : json(nullptr);
    if (c.validation) {
      j["validation"] = {{"accept", c.validation->accept},
                         {"reason", bytes_to_json(c.validation->reason)},
                         {"spec", to_json(c.validation->spec)}};
      if (c.validation->artifact) {
        const std::string name = "candidate-" + std::to_string(c.index) + ".regen" +
                                 std::string(source_extension(language));
        write_file(d / name, *c.validation->artifact);
        j["validation"]["artifact"] = name;
      }
    } else {
      j["validation"] = nullptr;
    }
    write_file(d / ("candidate-" + std::to_string(c.index) + ".json"), j.dump(2) + "\n");
  }
  json o = {{"schema", kOutcomeSchema},
            {"version", kStoreVersion},
            {"program", program},
            {"modality", to_string(outcome.modality)},
            {"provider_calls", outcome.provider_calls}};
  o["aborted_error"] = outcome.aborted_error ? json(*outcome.aborted_error) : json(nullptr);
  o["accepted"] = outcome.accepted ? to_json(*outcome.accepted) : json(nullptr);
  write_file(d / "outcome.json", o.dump(2) + "\n");
}

std::optional<Specification> SpecStore::accepted(const std::string& program, Modality m) const {
  const fs::path f = dir(program, m) / "outcome.json";
  if (!fs::exists(f)) return std::nullopt;
  const json o = read_json(f);
  check_header(o, kOutcomeSchema);
  if (o.at("accepted").is_null()) return std::nullopt;
  return spec_from_json(o.at("accepted"));
}

std::optional<Specification> SpecStore::first_candidate(const std::string& program,
                                                        Modality m) const {
  const fs::path d = dir(program, m);
  if (!fs::exists(d)) return std::nullopt;
  std::optional<std::pair<int, Specification>> best;
  for (const auto& e : fs::directory_iterator(d)) {
    const std::string name = e.path().filename().string();
    if (name.rfind("candidate-", 0) != 0 || e.path().extension() != ".json") continue;
    const json j = read_json(e.path());
    check_header(j, kCandidateSchema);
    if (j.at("spec").is_null()) continue;
    const int idx = j.at("index").get<int>();
    if (!best || idx < best->first) best.emplace(idx, spec_from_json(j.at("spec")));
  }
  if (!best) return std::nullopt;
  return best->second;
}

std::optional<std::string> SpecStore::accepted_artifact(const std::string& program,
                                                        Modality m) const {
  const auto acc = accepted(program, m);
  if (!acc) return std::nullopt;
  const fs::path f = dir(program, m) / ("candidate-" + std::to_string(acc->candidate_index) + ".json");
  if (!fs::exists(f)) return std::nullopt;
  const json j = read_json(f);
  if (j.at("validation").is_null() || !j.at("validation").contains("artifact")) return std::nullopt;
  return read_file(dir(program, m) / j.at("validation").at("artifact").get<std::string>());
}

SpecSet SpecStore::spec_set(const std::string& program) const {
  SpecSet s;
  for (Modality m : {Modality::Static, Modality::IO, Modality::Desc}) {
    if (auto a = accepted(program, m)) s.validated.emplace(m, std::move(*a));
    if (auto f = first_candidate(program, m)) s.first_candidates.emplace(m, std::move(*f));
  }
  return s;
}

std::vector<std::string> SpecStore::programs() const {
  std::vector<std::string> out;
  const fs::path d = root_ / "specs";
  if (!fs::exists(d)) return out;
  for (const auto& e : fs::directory_iterator(d)) {
    if (e.is_directory()) out.push_back(e.path().filename().string());
  }
  std::sort(out.begin(), out.end());
  return out;
}

// ------------------------------------------------------------------- runs

json to_json(const StoredRun& r) {
  json results = json::array();
  for (const auto& s : r.results) results.push_back(to_json(s));
  json exchanges = json::array();
  for (const auto& e : r.exchanges) {
    exchanges.push_back({{"tag", e.tag}, {"digest", e.digest}, {"failed", e.failed}});
  }
  return {{"schema", kRunSchema},
          {"version", kStoreVersion},
          {"run_id", r.run_id},
          {"kind", r.kind},
          {"created", r.created},
          {"config", r.config},
          {"mode", r.mode},
          {"k_max", r.k_max},
          {"source", to_string(r.source)},
          {"target", to_string(r.target)},
          {"results", results},
          {"function_status", r.function_status},
          {"spec_refs", r.spec_refs},
          {"exchanges", exchanges},
          {"warnings", r.warnings}};
}

StoredRun stored_run_from_json(const json& j) {
  check_header(j, kRunSchema);
  return decode("run record", [&] {
    StoredRun r;
    r.run_id = j.at("run_id").get<std::string>();
    r.kind = j.at("kind").get<std::string>();
    r.created = j.at("created").get<std::string>();
    r.config = j.at("config");
    r.mode = j.at("mode").get<std::string>();
    r.k_max = j.at("k_max").get<int>();
    r.source = parse_language(j.at("source").get<std::string>());
    r.target = parse_language(j.at("target").get<std::string>());
    for (const auto& s : j.at("results")) r.results.push_back(stage_result_from_json(s));
    r.function_status = j.at("function_status").get<std::map<std::string, std::string>>();
    r.spec_refs =
        j.at("spec_refs").get<std::map<std::string, std::map<std::string, std::string>>>();
    for (const auto& e : j.at("exchanges")) {
      r.exchanges.push_back({e.at("tag").get<std::string>(), e.at("digest").get<std::string>(),
                             e.at("failed").get<bool>()});
    }
    r.warnings = j.at("warnings").get<std::vector<std::string>>();
    return r;
  });
}

RunStore::RunStore(fs::path root) : root_(std::move(root)) {}

void RunStore::write(const StoredRun& run) {
  std::lock_guard lock(mu_);
  if (run.run_id.empty() || run.run_id.find('/') != std::string::npos) {
    throw ContractViolation("invalid run id '" + run.run_id + "'");
  }
  const fs::path d = root_ / "runs" / run.run_id;
  if (fs::exists(d)) throw ContractViolation("run " + run.run_id + " already exists");
  fs::create_directories(d);
  // Write-then-rename so readers never see a partial record.
  const fs::path tmp = d / "run.json.tmp";
  write_file(tmp, to_json(run).dump(2) + "\n");
  fs::rename(tmp, d / "run.json");
}

StoredRun RunStore::read(const std::string& run_id) const {
  const fs::path f = root_ / "runs" / run_id / "run.json";
  if (!fs::exists(f)) throw ConfigError("no run '" + run_id + "' in " + root_.string());
  return stored_run_from_json(read_json(f));
}

std::vector<std::string> RunStore::list() const {
  std::vector<std::string> out;
  const fs::path d = root_ / "runs";
  if (!fs::exists(d)) return out;
  for (const auto& e : fs::directory_iterator(d)) {
    if (fs::exists(e.path() / "run.json")) out.push_back(e.path().filename().string());
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::string RunStore::new_run_id(const std::string& label) const {
  std::lock_guard lock(mu_);
  std::string stamp = utc_timestamp();
  std::erase_if(stamp, [](char c) { return c == ':' || c == '-'; });
  std::string clean;
  for (char c : label) clean.push_back(std::isalnum(static_cast<unsigned char>(c)) ? c : '-');
  const std::string base = stamp + "-" + clean;
  std::string id = base;
  for (int n = 2; fs::exists(root_ / "runs" / id); ++n) id = base + "-" + std::to_string(n);
  return id;
}

std::string utc_timestamp() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace specbridge
