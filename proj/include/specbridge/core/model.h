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

// Shared domain types. Everything here is a plain value: copyable, comparable
// by structure and safe to hand across threads.

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace specbridge {

// Test and program I/O is carried as raw bytes; std::string is the byte
// container, no encoding is implied.
using Bytes = std::string;

enum class Language : std::uint8_t { C, Rust, Go, JavaScript, TypeScript };

std::string_view to_string(Language lang);
// Accepts canonical names plus common aliases ("c", "rust", "rs", "js", "ts").
Language parse_language(std::string_view name);
std::string_view source_extension(Language lang);
std::optional<Language> language_from_extension(std::string_view ext);

bool is_supported_pair(Language source, Language target);
// Throws ConfigError for anything other than C->Rust, C->Go, JavaScript->TypeScript.
void require_supported_pair(Language source, Language target);

struct TestCase {
  std::string id;
  Bytes stdin_data;
  Bytes expected_stdout;

  friend bool operator==(const TestCase&, const TestCase&) = default;
};

struct ByteRange {
  std::size_t start = 0;
  std::size_t end = 0;  // exclusive

  std::size_t size() const { return end - start; }
  bool overlaps(const ByteRange& other) const {
    return start < other.end && other.start < end;
  }
  friend bool operator==(const ByteRange&, const ByteRange&) = default;
};

struct FunctionUnit {
  std::string name;
  std::string signature;
  std::string body;
  std::optional<std::string> docstring;
  ByteRange byte_range;
  std::set<std::string> callees;
  // Subset of callees that are not defined in the same program.
  std::set<std::string> external_callees;
  // Source file the unit came from; empty for single-file programs.
  std::string file;

  friend bool operator==(const FunctionUnit&, const FunctionUnit&) = default;
};

struct SourceProgram {
  std::string program_id;
  Language language = Language::C;
  std::string source;
  std::vector<FunctionUnit> functions;
  std::vector<TestCase> tests;

  const FunctionUnit* find_function(std::string_view name) const;
  friend bool operator==(const SourceProgram&, const SourceProgram&) = default;
};

// Translation stages are tagged with the modality that produced them; None is
// the spec-free fallback.
enum class Modality : std::uint8_t { Static, IO, Desc, None };

std::string_view to_string(Modality m);
Modality parse_modality(std::string_view name);

struct FunctionContract {
  std::string precondition;
  std::string postcondition;
  friend bool operator==(const FunctionContract&, const FunctionContract&) = default;
};

struct StaticSpec {
  std::map<std::string, FunctionContract> per_function;
  std::string input_format;
  std::string output_format;
  friend bool operator==(const StaticSpec&, const StaticSpec&) = default;
};

enum class IoOrigin : std::uint8_t { ModelGenerated, Patched, Traced };
std::string_view to_string(IoOrigin o);

struct IoPair {
  Bytes input;
  Bytes output;
  IoOrigin origin = IoOrigin::ModelGenerated;
  // Traced pairs holding raw pointer addresses cannot be compared for equality.
  bool comparable = true;
  friend bool operator==(const IoPair&, const IoPair&) = default;
};

struct IoSpec {
  std::vector<IoPair> pairs;
  friend bool operator==(const IoSpec&, const IoSpec&) = default;
};

enum class DescSource : std::uint8_t { ModelGenerated, Docstring };

struct DescSpec {
  std::string text;
  DescSource source = DescSource::ModelGenerated;
  friend bool operator==(const DescSpec&, const DescSpec&) = default;
};

enum class SpecStatus : std::uint8_t { Candidate, SelfConsistent, Patched, Rejected };
std::string_view to_string(SpecStatus s);
SpecStatus parse_spec_status(std::string_view s);

struct Provenance {
  double temperature = 0.0;
  std::string provider_id;
  std::string prompt_digest;
  friend bool operator==(const Provenance&, const Provenance&) = default;
};

struct Specification {
  Modality modality = Modality::Static;
  std::variant<StaticSpec, IoSpec, DescSpec> payload;
  SpecStatus status = SpecStatus::Candidate;
  int candidate_index = 1;
  Provenance provenance;

  const StaticSpec& static_spec() const { return std::get<StaticSpec>(payload); }
  const IoSpec& io_spec() const { return std::get<IoSpec>(payload); }
  const DescSpec& desc_spec() const { return std::get<DescSpec>(payload); }

  friend bool operator==(const Specification&, const Specification&) = default;
};

Specification make_spec(StaticSpec s);
Specification make_spec(IoSpec s);
Specification make_spec(DescSpec s);

enum class Verdict : std::uint8_t { Pass, Fail };
enum class FailureKind : std::uint8_t { None, Compile, Runtime, WrongOutput, Timeout };
std::string_view to_string(FailureKind k);
FailureKind parse_failure_kind(std::string_view s);

struct Stage {
  Modality modality_used = Modality::None;
  std::string candidate;
  Verdict verdict = Verdict::Fail;
  FailureKind failure_kind = FailureKind::None;
  double temperature = 0.0;
  int repair_calls = 0;
  // Free-form event notes (degraded modality, extraction failure, ...).
  std::string note;
  friend bool operator==(const Stage&, const Stage&) = default;
};

struct StageResult {
  std::string program_id;
  std::vector<Stage> stages;
  // False when an environment error aborted the run; such programs are
  // excluded from report denominators with an explicit note.
  bool complete = true;
  std::string note;

  std::optional<std::size_t> first_pass() const;
  friend bool operator==(const StageResult&, const StageResult&) = default;
};

struct PassAtKRow {
  int k = 1;
  int correct_count = 0;
  std::optional<int> baseline_count;
  std::optional<std::int64_t> improvement_tenths;
  int total = 0;
  friend bool operator==(const PassAtKRow&, const PassAtKRow&) = default;
};

struct PassAtKReport {
  std::vector<PassAtKRow> rows;  // rows[k-1]
  int total = 0;
  int excluded_incomplete = 0;

  int correct_at(int k) const;
  friend bool operator==(const PassAtKReport&, const PassAtKReport&) = default;
};

// Orders the available modalities as [Static, IO, Desc] and appends None.
// None inside `available` is ignored.
std::vector<Modality> modality_order(const std::set<Modality>& available);

PassAtKReport compute_pass_at_k(const StageResult& result, int k_max);
PassAtKReport compute_pass_at_k(const std::vector<StageResult>& results, int k_max);

// Relative change of `treated` over `baseline`, in percent.
class Improvement {
 public:
  Improvement(std::int64_t baseline, std::int64_t treated);

  // Integer percent, rounded half away from zero.
  std::int64_t percent() const { return whole_; }
  // Percent in tenths, rounded half away from zero.
  std::int64_t tenths() const { return tenths_; }
  int sign() const { return sign_; }
  // "11%", "-2%", "-0.3%": one decimal only when the whole percent rounds to 0.
  std::string formatted() const;

 private:
  std::int64_t whole_ = 0;
  std::int64_t tenths_ = 0;
  int sign_ = 0;
};

// Throws UndefinedImprovement when baseline == 0.
Improvement improvement_percent(std::int64_t baseline, std::int64_t treated);

// Integer division of num/den rounded half away from zero; den > 0.
std::int64_t div_round_half_away(std::int64_t num, std::int64_t den);

}  // namespace specbridge
