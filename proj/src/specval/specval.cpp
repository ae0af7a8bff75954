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

#include "specbridge/specval/specval.h"

#include "specbridge/core/errors.h"
#include "specbridge/provider/extract.h"

namespace specbridge {

std::string back_translate(const Specification& spec, Language language, Provider& provider,
                           const PromptComposer& composer) {
  if (spec.status != SpecStatus::Candidate) {
    throw ContractViolation("back-translation expects a candidate spec");
  }
  const ModelResponse resp = provider.complete(composer.codegen(spec, language));
  return extract_code_block(resp, language);
}

ConsistencyResult check_self_consistency(const Specification& spec,
                                         const SourceProgram& program,
                                         const ValidationContext& ctx) {
  if (program.tests.empty()) {
    throw ContractViolation("self-consistency needs the program's tests");
  }
  ConsistencyResult result;
  result.spec = spec;
  try {
    result.regenerated = back_translate(spec, program.language, ctx.provider, ctx.composer);
  } catch (const ExtractionFailed& e) {
    result.reason = FailureKind::Compile;
    result.detail = std::string("extraction failed: ") + e.what();
    result.spec.status = SpecStatus::Rejected;
    return result;
  }
  result.outcome = ctx.sandbox.evaluate(*result.regenerated, program.language, program.tests);
  result.accept = result.outcome.passed();
  result.reason = result.outcome.failure_kind();
  result.spec.status = result.accept ? SpecStatus::SelfConsistent : SpecStatus::Rejected;
  if (!result.accept) {
    for (const auto& r : result.outcome.runs) {
      if (r.verdict != RunVerdict::Pass) {
        result.detail = "test " + r.test_id + ": " + std::string(to_string(r.verdict));
        break;
      }
    }
    if (!result.outcome.compile_ok) result.detail = "regenerated program does not compile";
  }
  return result;
}

bool replay_consistency(const std::string& regenerated, const SourceProgram& program,
                        Sandbox& sandbox) {
  return sandbox.evaluate(regenerated, program.language, program.tests).passed();
}

IoValidationResult validate_io_spec(const SourceProgram& program, const Specification& spec,
                                    Sandbox& sandbox) {
  if (spec.modality != Modality::IO) throw ContractViolation("validate_io_spec takes IO specs");
  if (program.tests.empty()) throw ContractViolation("program has no tests");

  BuildResult built = sandbox.build(program.source, program.language);
  if (!built.ok) throw ContractViolation("original program " + program.program_id +
                                         " does not build:\n" + built.log);
  for (const auto& t : program.tests) {
    if (sandbox.run_one(*built.artifact, t).verdict != RunVerdict::Pass) {
      throw ContractViolation("original program " + program.program_id + " fails its test " +
                              t.id);
    }
  }

  IoValidationResult result;
  std::vector<IoPair> kept;
  std::vector<IoPair> patchable;
  const auto& pairs = spec.io_spec().pairs;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const TestCase probe{"io-" + std::to_string(i + 1), pairs[i].input, pairs[i].output};
    const RunRecord r = sandbox.run_one(*built.artifact, probe);
    switch (r.verdict) {
      case RunVerdict::Pass:
        kept.push_back(pairs[i]);
        ++result.kept;
        break;
      case RunVerdict::WrongOutput:
        patchable.push_back(IoPair{pairs[i].input, r.stdout_data, IoOrigin::Patched, true});
        ++result.mismatched;
        break;
      case RunVerdict::RuntimeError:
      case RunVerdict::Timeout:
        ++result.unusable;
        break;
    }
  }

  Specification out = spec;
  if (!kept.empty()) {
    out.payload = IoSpec{std::move(kept)};
    out.status = SpecStatus::SelfConsistent;
    result.spec = std::move(out);
  } else if (!patchable.empty()) {
    out.payload = IoSpec{std::move(patchable)};
    out.status = SpecStatus::Patched;
    result.spec = std::move(out);
    result.reason = "no generated output matched; outputs patched";
  } else {
    result.reason = "no generated input runs cleanly on the original program";
  }
  return result;
}

Validator make_validator(Modality modality, const SourceProgram& program,
                         const ValidationContext& ctx) {
  if (modality == Modality::IO) {
    return [&program, ctx](const Specification& spec) {
      ValidationVerdict v;
      IoValidationResult r = validate_io_spec(program, spec, ctx.sandbox);
      v.accept = r.spec.has_value();
      v.spec = r.spec ? *r.spec : spec;
      if (!v.accept) v.spec.status = SpecStatus::Rejected;
      v.reason = r.reason;
      return v;
    };
  }
  return [&program, ctx](const Specification& spec) {
    ConsistencyResult r = check_self_consistency(spec, program, ctx);
    ValidationVerdict v;
    v.accept = r.accept;
    v.spec = r.spec;
    v.reason = r.accept ? "" : std::string(to_string(r.reason)) + ": " + r.detail;
    v.artifact = r.regenerated;
    return v;
  };
}

}  // namespace specbridge
