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

#include "specbridge/core/model.h"

#include <algorithm>
#include <array>
#include <cctype>

#include "specbridge/core/errors.h"

namespace specbridge {

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

}  // namespace

std::string_view to_string(Language lang) {
  switch (lang) {
    case Language::C: return "c";
    case Language::Rust: return "rust";
    case Language::Go: return "go";
    case Language::JavaScript: return "javascript";
    case Language::TypeScript: return "typescript";
  }
  return "?";
}

Language parse_language(std::string_view name) {
  const std::string n = lower(name);
  if (n == "c") return Language::C;
  if (n == "rust" || n == "rs") return Language::Rust;
  if (n == "go" || n == "golang") return Language::Go;
  if (n == "javascript" || n == "js") return Language::JavaScript;
  if (n == "typescript" || n == "ts") return Language::TypeScript;
  throw ConfigError("unknown language: " + std::string(name));
}

std::string_view source_extension(Language lang) {
  switch (lang) {
    case Language::C: return ".c";
    case Language::Rust: return ".rs";
    case Language::Go: return ".go";
    case Language::JavaScript: return ".js";
    case Language::TypeScript: return ".ts";
  }
  return "";
}

std::optional<Language> language_from_extension(std::string_view ext) {
  for (Language l : {Language::C, Language::Rust, Language::Go, Language::JavaScript,
                     Language::TypeScript}) {
    if (source_extension(l) == ext) return l;
  }
  return std::nullopt;
}

bool is_supported_pair(Language source, Language target) {
  return (source == Language::C && target == Language::Rust) ||
         (source == Language::C && target == Language::Go) ||
         (source == Language::JavaScript && target == Language::TypeScript);
}

void require_supported_pair(Language source, Language target) {
  if (!is_supported_pair(source, target)) {
    throw ConfigError("unsupported translation pair " + std::string(to_string(source)) +
                      " -> " + std::string(to_string(target)) +
                      " (supported: c->rust, c->go, javascript->typescript)");
  }
}

const FunctionUnit* SourceProgram::find_function(std::string_view name) const {
  for (const auto& f : functions) {
    if (f.name == name) return &f;
  }
  return nullptr;
}

std::string_view to_string(Modality m) {
  switch (m) {
    case Modality::Static: return "static";
    case Modality::IO: return "io";
    case Modality::Desc: return "desc";
    case Modality::None: return "none";
  }
  return "?";
}

Modality parse_modality(std::string_view name) {
  const std::string n = lower(name);
  if (n == "static" || n == "stat") return Modality::Static;
  if (n == "io" || n == "i/o") return Modality::IO;
  if (n == "desc" || n == "description") return Modality::Desc;
  if (n == "none") return Modality::None;
  throw ConfigError("unknown modality: " + std::string(name));
}

std::string_view to_string(IoOrigin o) {
  switch (o) {
    case IoOrigin::ModelGenerated: return "model";
    case IoOrigin::Patched: return "patched";
    case IoOrigin::Traced: return "traced";
  }
  return "?";
}

std::string_view to_string(SpecStatus s) {
  switch (s) {
    case SpecStatus::Candidate: return "candidate";
    case SpecStatus::SelfConsistent: return "self-consistent";
    case SpecStatus::Patched: return "patched";
    case SpecStatus::Rejected: return "rejected";
  }
  return "?";
}

SpecStatus parse_spec_status(std::string_view s) {
  for (SpecStatus v : {SpecStatus::Candidate, SpecStatus::SelfConsistent, SpecStatus::Patched,
                       SpecStatus::Rejected}) {
    if (to_string(v) == s) return v;
  }
  throw FormatError("unknown spec status: " + std::string(s));
}

Specification make_spec(StaticSpec s) {
  Specification spec;
  spec.modality = Modality::Static;
  spec.payload = std::move(s);
  return spec;
}

Specification make_spec(IoSpec s) {
  Specification spec;
  spec.modality = Modality::IO;
  spec.payload = std::move(s);
  return spec;
}

Specification make_spec(DescSpec s) {
  Specification spec;
  spec.modality = Modality::Desc;
  spec.payload = std::move(s);
  return spec;
}

std::string_view to_string(FailureKind k) {
  switch (k) {
    case FailureKind::None: return "none";
    case FailureKind::Compile: return "compile";
    case FailureKind::Runtime: return "runtime";
    case FailureKind::WrongOutput: return "wrong_output";
    case FailureKind::Timeout: return "timeout";
  }
  return "?";
}

FailureKind parse_failure_kind(std::string_view s) {
  for (FailureKind k : {FailureKind::None, FailureKind::Compile, FailureKind::Runtime,
                        FailureKind::WrongOutput, FailureKind::Timeout}) {
    if (to_string(k) == s) return k;
  }
  throw FormatError("unknown failure kind: " + std::string(s));
}

std::optional<std::size_t> StageResult::first_pass() const {
  for (std::size_t i = 0; i < stages.size(); ++i) {
    if (stages[i].verdict == Verdict::Pass) return i;
  }
  return std::nullopt;
}

int PassAtKReport::correct_at(int k) const {
  if (k < 1 || static_cast<std::size_t>(k) > rows.size()) {
    throw ContractViolation("pass@k row out of range: k=" + std::to_string(k));
  }
  return rows[static_cast<std::size_t>(k - 1)].correct_count;
}

std::vector<Modality> modality_order(const std::set<Modality>& available) {
  std::vector<Modality> order;
  for (Modality m : {Modality::Static, Modality::IO, Modality::Desc}) {
    if (available.contains(m)) order.push_back(m);
  }
  order.push_back(Modality::None);
  return order;
}

PassAtKReport compute_pass_at_k(const StageResult& result, int k_max) {
  return compute_pass_at_k(std::vector<StageResult>{result}, k_max);
}

PassAtKReport compute_pass_at_k(const std::vector<StageResult>& results, int k_max) {
  if (k_max < 1) throw ContractViolation("k_max must be >= 1");
  PassAtKReport report;
  report.rows.resize(static_cast<std::size_t>(k_max));
  for (int k = 1; k <= k_max; ++k) report.rows[static_cast<std::size_t>(k - 1)].k = k;

  for (const auto& r : results) {
    if (!r.complete) {
      ++report.excluded_incomplete;
      continue;
    }
    ++report.total;
    const auto first = r.first_pass();
    if (!first) continue;
    // Correct at k iff one of the first min(k, |stages|) verdicts passed.
    for (int k = static_cast<int>(*first) + 1; k <= k_max; ++k) {
      ++report.rows[static_cast<std::size_t>(k - 1)].correct_count;
    }
  }
  for (auto& row : report.rows) row.total = report.total;
  return report;
}

std::int64_t div_round_half_away(std::int64_t num, std::int64_t den) {
  const bool negative = num < 0;
  const std::int64_t mag = negative ? -num : num;
  const std::int64_t q = (2 * mag + den) / (2 * den);
  return negative ? -q : q;
}

Improvement::Improvement(std::int64_t baseline, std::int64_t treated) {
  if (baseline <= 0) {
    throw UndefinedImprovement("improvement undefined for baseline " + std::to_string(baseline));
  }
  const std::int64_t delta = treated - baseline;
  sign_ = delta > 0 ? 1 : (delta < 0 ? -1 : 0);
  whole_ = div_round_half_away(100 * delta, baseline);
  tenths_ = div_round_half_away(1000 * delta, baseline);
}

std::string Improvement::formatted() const {
  // A single decimal only where the whole percent would round to zero:
  // -0.34 prints "-0.3%", but 0.70 prints "1%".
  const std::int64_t mag = tenths_ < 0 ? -tenths_ : tenths_;
  if (whole_ == 0 && mag != 0) {
    std::string s = tenths_ < 0 ? "-" : "";
    s += "0." + std::to_string(mag) + "%";
    return s;
  }
  return std::to_string(whole_) + "%";
}

Improvement improvement_percent(std::int64_t baseline, std::int64_t treated) {
  return Improvement(baseline, treated);
}

}  // namespace specbridge
