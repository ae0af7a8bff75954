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

#include "specbridge/specgen/specgen.h"

#include "specbridge/core/errors.h"

namespace specbridge {

int GenBudget::max_for(Modality m) const {
  switch (m) {
    case Modality::Static: return static_max;
    case Modality::IO: return io_max;
    case Modality::Desc: return desc_max;
    case Modality::None: break;
  }
  throw ContractViolation("no budget for modality none");
}

void GenBudget::validate() const {
  if (static_max < 1 || desc_max < 1 || io_max < 1 || batch_k < 1) {
    throw ConfigError("candidate budgets must be >= 1");
  }
  if (batch_k > static_max || batch_k > desc_max || batch_k > io_max) {
    throw ConfigError("batch size exceeds a per-modality maximum");
  }
}

ExtractOptions extract_options_for(const SourceProgram& program) {
  ExtractOptions opts;
  for (const auto& f : program.functions) opts.function_names.push_back(f.name);
  return opts;
}

CandidateStream::CandidateStream(Provider& provider, const PromptComposer& composer,
                                 const SourceProgram& program, Modality modality,
                                 GenBudget budget, ExtractOptions extract)
    : provider_(provider),
      composer_(composer),
      program_(program),
      modality_(modality),
      budget_(budget),
      extract_(std::move(extract)) {
  budget_.validate();
  max_ = budget_.max_for(modality);
  if (extract_.function_names.empty()) extract_ = extract_options_for(program);
}

std::optional<Specification> CandidateStream::next() {
  while (!exhausted()) {
    const int index = ++calls_;
    const ChatRequest req = composer_.spec_request(modality_, program_, index);
    CandidateRecord rec;
    rec.index = index;
    rec.prompt_digest = prompt_digest(req);
    ModelResponse resp;
    try {
      resp = provider_.complete(req);
    } catch (const ProviderError& e) {
      // Partial results stay in records_.
      aborted_error_ = e.what();
      --calls_;
      return std::nullopt;
    }
    rec.response = resp.text;
    try {
      Specification spec = extract_spec(resp, modality_, extract_);
      spec.candidate_index = index;
      spec.provenance.temperature = req.temperature;
      rec.spec = spec;
      records_.push_back(std::move(rec));
      return spec;
    } catch (const SpecParseFailed& e) {
      rec.parse_error = e.what();
      records_.push_back(std::move(rec));
    }
  }
  return std::nullopt;
}

std::vector<Specification> CandidateStream::next_batch() {
  std::vector<Specification> out;
  while (static_cast<int>(out.size()) < budget_.batch_k) {
    auto s = next();
    if (!s) break;
    out.push_back(std::move(*s));
  }
  return out;
}

std::vector<Specification> generate_candidates(Provider& provider, const PromptComposer& composer,
                                               const SourceProgram& program, Modality modality,
                                               const GenBudget& budget) {
  CandidateStream stream(provider, composer, program, modality, budget);
  std::vector<Specification> out;
  while (auto s = stream.next()) out.push_back(std::move(*s));
  return out;
}

GenOutcome search_until_valid(Modality modality, int max_calls,
                              const std::function<CandidateRecord(int index)>& produce,
                              const Validator& validator) {
  GenOutcome out;
  out.modality = modality;
  std::optional<Specification> patched;
  for (int index = 1; index <= max_calls; ++index) {
    CandidateRecord rec;
    try {
      rec = produce(index);
    } catch (const ProviderError& e) {
      out.aborted_error = e.what();
      break;
    }
    out.provider_calls = index;
    if (rec.spec) {
      ValidationVerdict v = validator(*rec.spec);
      rec.validation = v;
      if (v.accept && v.spec.status == SpecStatus::SelfConsistent) {
        out.accepted = v.spec;
        out.candidates.push_back(std::move(rec));
        return out;
      }
      if (v.accept && !patched) patched = v.spec;
    }
    out.candidates.push_back(std::move(rec));
  }
  out.accepted = patched;
  return out;
}

GenOutcome generate_until_valid(Provider& provider, const PromptComposer& composer,
                                const SourceProgram& program, Modality modality,
                                const GenBudget& budget, const Validator& validator) {
  budget.validate();
  const ExtractOptions extract = extract_options_for(program);
  auto produce = [&](int index) {
    const ChatRequest req = composer.spec_request(modality, program, index);
    CandidateRecord rec;
    rec.index = index;
    rec.prompt_digest = prompt_digest(req);
    const ModelResponse resp = provider.complete(req);
    rec.response = resp.text;
    try {
      Specification spec = extract_spec(resp, modality, extract);
      spec.candidate_index = index;
      spec.provenance.temperature = req.temperature;
      rec.spec = std::move(spec);
    } catch (const SpecParseFailed& e) {
      rec.parse_error = e.what();
    }
    return rec;
  };
  return search_until_valid(modality, budget.max_for(modality), produce, validator);
}

}  // namespace specbridge
