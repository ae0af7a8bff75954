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

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "specbridge/core/model.h"
#include "specbridge/provider/extract.h"
#include "specbridge/provider/prompts.h"
#include "specbridge/provider/provider.h"

namespace specbridge {

// Candidate budgets: batch_k candidates form a batch, the per-modality
// maxima are hard ceilings on provider calls.
struct GenBudget {
  int static_max = 6;
  int desc_max = 6;
  int io_max = 10;
  int batch_k = 3;

  int max_for(Modality m) const;
  // Throws ConfigError unless all >= 1 and batch_k <= every maximum.
  void validate() const;
};

// What a validator says about one candidate.
struct ValidationVerdict {
  bool accept = false;
  Specification spec;  // status updated (SelfConsistent / Patched / Rejected)
  std::string reason;
  // Regenerated program for static/desc specs; kept for audit and replay.
  std::optional<std::string> artifact;
};

using Validator = std::function<ValidationVerdict(const Specification&)>;

// Audit record for one provider call of a stream.
struct CandidateRecord {
  int index = 0;
  std::string prompt_digest;
  std::string response;
  std::optional<Specification> spec;  // absent when parsing failed
  std::string parse_error;
  std::optional<ValidationVerdict> validation;
};

// Lazily requests candidates for one (program, modality); each provider call
// consumes one index whether or not its response parses.
class CandidateStream {
 public:
  CandidateStream(Provider& provider, const PromptComposer& composer,
                  const SourceProgram& program, Modality modality, GenBudget budget,
                  ExtractOptions extract = {});

  // Next parsed candidate, or nullopt once the budget is spent or the
  // provider failed (see aborted()).
  std::optional<Specification> next();
  // Up to budget.batch_k further candidates.
  std::vector<Specification> next_batch();

  int calls() const { return calls_; }
  bool exhausted() const { return calls_ >= max_ || aborted_error_.has_value(); }
  const std::optional<std::string>& aborted() const { return aborted_error_; }
  std::vector<CandidateRecord>& records() { return records_; }
  const std::vector<CandidateRecord>& records() const { return records_; }

 private:
  Provider& provider_;
  const PromptComposer& composer_;
  const SourceProgram& program_;
  Modality modality_;
  GenBudget budget_;
  ExtractOptions extract_;
  int max_ = 0;
  int calls_ = 0;
  std::optional<std::string> aborted_error_;
  std::vector<CandidateRecord> records_;
};

ExtractOptions extract_options_for(const SourceProgram& program);

// Drains a full stream.
std::vector<Specification> generate_candidates(Provider& provider, const PromptComposer& composer,
                                               const SourceProgram& program, Modality modality,
                                               const GenBudget& budget);

struct GenOutcome {
  Modality modality = Modality::Static;
  std::optional<Specification> accepted;
  std::vector<CandidateRecord> candidates;
  int provider_calls = 0;
  std::optional<std::string> aborted_error;

  bool found() const { return accepted.has_value(); }
};

// Stops at the first SelfConsistent candidate. A Patched acceptance is held
// as a fallback while the search continues; it is returned only when the
// budget runs out without a SelfConsistent one.
GenOutcome generate_until_valid(Provider& provider, const PromptComposer& composer,
                                const SourceProgram& program, Modality modality,
                                const GenBudget& budget, const Validator& validator);

// Same loop over an arbitrary candidate source (project mode reuses it for
// per-function specs).
GenOutcome search_until_valid(Modality modality, int max_calls,
                              const std::function<CandidateRecord(int index)>& produce,
                              const Validator& validator);

}  // namespace specbridge
