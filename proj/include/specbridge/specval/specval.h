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

#include <optional>
#include <string>

#include "specbridge/core/model.h"
#include "specbridge/provider/prompts.h"
#include "specbridge/provider/provider.h"
#include "specbridge/sandbox/sandbox.h"
#include "specbridge/specgen/specgen.h"

namespace specbridge {

struct ValidationContext {
  Provider& provider;
  const PromptComposer& composer;
  Sandbox& sandbox;
};

// Regenerates a program in `language` from a static or description spec
// alone. Throws ExtractionFailed when the response has no code.
std::string back_translate(const Specification& spec, Language language, Provider& provider,
                           const PromptComposer& composer);

struct ConsistencyResult {
  bool accept = false;
  FailureKind reason = FailureKind::None;
  std::string detail;
  std::optional<std::string> regenerated;
  ExecOutcome outcome;
  Specification spec;
};

// Accepts iff the back-translation passes every test of `program`.
ConsistencyResult check_self_consistency(const Specification& spec,
                                         const SourceProgram& program,
                                         const ValidationContext& ctx);

// Re-checks a stored regeneration artifact against the suite.
bool replay_consistency(const std::string& regenerated, const SourceProgram& program,
                        Sandbox& sandbox);

struct IoValidationResult {
  std::optional<Specification> spec;  // SelfConsistent or Patched; absent on reject
  int kept = 0;
  int mismatched = 0;
  int unusable = 0;  // crashed or timed out on the original program
  std::string reason;
};

// Runs the original program on every generated input. Matching pairs are
// kept; when none match, the usable inputs are re-paired with the actual
// outputs (Patched). Rejects when no input runs cleanly.
IoValidationResult validate_io_spec(const SourceProgram& program, const Specification& spec,
                                    Sandbox& sandbox);

// The specval check appropriate for `modality`, shaped for specgen.
Validator make_validator(Modality modality, const SourceProgram& program,
                         const ValidationContext& ctx);

}  // namespace specbridge
