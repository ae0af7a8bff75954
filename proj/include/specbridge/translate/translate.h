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

#include <array>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "specbridge/core/model.h"
#include "specbridge/provider/prompts.h"
#include "specbridge/provider/provider.h"
#include "specbridge/sandbox/sandbox.h"

namespace specbridge {

enum class PipelineMode { SpecTra, Baseline, AllSpecsTogether, SingleModality, OneShotSpec };

struct PipelineConfig {
  PipelineMode mode = PipelineMode::SpecTra;
  // For SingleModality / OneShotSpec.
  Modality modality = Modality::None;
  int k_max = 3;
  int repair_rounds = 0;
  Language target = Language::Rust;
  // Estimated tokens (bytes / 4) a spec-bearing prompt may use before the
  // stage falls through to the next modality.
  std::size_t token_budget = 32000;

  // "spectra", "baseline", "all-together", "one-shot:io", "single:static".
  std::string mode_label() const;
  void validate() const;
};

// Parses a mode label into `config` (mode and modality).
void parse_mode(std::string_view label, PipelineConfig& config);

// Specs available for one program: validated ones drive SpecTra modes, the
// first raw candidates drive OneShotSpec.
struct SpecSet {
  std::map<Modality, Specification> validated;
  std::map<Modality, Specification> first_candidates;

  std::set<Modality> available() const;
};

struct PipelineContext {
  Provider& provider;
  const PromptComposer& composer;
  Sandbox& sandbox;
};

// Modalities used by stages 1..k_max (None = spec-free prompt). For
// AllSpecsTogether every stage is None-tagged; the combined prompt is noted.
std::vector<Modality> stage_plan(const SpecSet& specs, const PipelineConfig& config);

std::size_t estimate_tokens(const ChatRequest& request);

// One provider call and code-block extraction. Throws ExtractionFailed.
std::string translate_once(const SourceProgram& program, const Specification* spec,
                           Language target, double temperature, int seed,
                           const PipelineContext& ctx);

double stage_temperature(const TemperaturePolicy& policy, int stage_index);

StageResult run_pipeline(const SourceProgram& program, const SpecSet& specs,
                         const PipelineConfig& config, const PipelineContext& ctx);

// Per-program attribution: modalities whose candidate passed.
struct Attribution {
  std::string program_id;
  std::optional<Modality> first_passing;
  std::set<Modality> solved_by;
};
Attribution attribute(const StageResult& result);

// Three-set partition of solved programs over {Static, IO, Desc}; `only_none`
// counts programs solved exclusively by spec-free stages.
struct VennRegions {
  std::array<int, 8> regions{};  // index = bitmask S=1, IO=2, Desc=4; [0] = only_none
  int total_solved() const;
  int region(bool s, bool io, bool desc) const;
};
VennRegions partition(const std::vector<Attribution>& attributions);

struct CorpusRun {
  PassAtKReport report;
  std::vector<StageResult> results;
  std::vector<Attribution> attributions;
};

// Programs run concurrently (up to `workers`); results keep input order.
CorpusRun run_corpus(const std::vector<SourceProgram>& programs,
                     const std::map<std::string, SpecSet>& specs, const PipelineConfig& config,
                     const PipelineContext& ctx, int workers = 1);

}  // namespace specbridge
