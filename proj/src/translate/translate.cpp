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

#include "specbridge/translate/translate.h"

#include <algorithm>
#include <atomic>
#include <exception>
#include <thread>

#include "specbridge/core/errors.h"
#include "specbridge/provider/extract.h"

namespace specbridge {

namespace {

std::set<Modality> restrict_to(const std::set<Modality>& available, Modality m) {
  return available.contains(m) ? std::set<Modality>{m} : std::set<Modality>{};
}

// Order the degradation rule walks: modality_order of what this mode may use.
std::vector<Modality> mode_order(const SpecSet& specs, const PipelineConfig& config) {
  switch (config.mode) {
    case PipelineMode::SpecTra: return modality_order(specs.available());
    case PipelineMode::Baseline:
    case PipelineMode::AllSpecsTogether: return {Modality::None};
    case PipelineMode::SingleModality:
      return modality_order(restrict_to(specs.available(), config.modality));
    case PipelineMode::OneShotSpec: {
      std::set<Modality> firsts;
      for (const auto& [m, s] : specs.first_candidates) firsts.insert(m);
      return modality_order(restrict_to(firsts, config.modality));
    }
  }
  return {Modality::None};
}

const Specification* spec_for(const SpecSet& specs, const PipelineConfig& config, Modality m) {
  if (m == Modality::None) return nullptr;
  const auto& pool =
      config.mode == PipelineMode::OneShotSpec ? specs.first_candidates : specs.validated;
  const auto it = pool.find(m);
  return it == pool.end() ? nullptr : &it->second;
}

struct Evaluated {
  std::string candidate;
  ExecOutcome outcome;
  int repair_calls = 0;
  std::string note;
};

// Builds the candidate, repairing compile failures up to `rounds` times, and
// runs the suite on whatever finally compiles.
Evaluated build_and_test(std::string candidate, const SourceProgram& program,
                         const PipelineConfig& config, const PipelineContext& ctx) {
  Evaluated ev;
  BuildResult built = ctx.sandbox.build(candidate, config.target);
  while (!built.ok && ev.repair_calls < config.repair_rounds) {
    ++ev.repair_calls;
    const ChatRequest req =
        ctx.composer.repair(candidate, built.log, config.target, ev.repair_calls);
    const ModelResponse resp = ctx.provider.complete(req);
    try {
      candidate = extract_code_block(resp, config.target);
    } catch (const ExtractionFailed&) {
      ev.note += "repair " + std::to_string(ev.repair_calls) + " returned no code; ";
      continue;
    }
    built = ctx.sandbox.build(candidate, config.target);
  }
  ev.candidate = std::move(candidate);
  if (!built.ok) ev.note += "compile failed: " + truncate_log(built.log, 2000);
  ev.outcome.compile_ok = built.ok;
  ev.outcome.compile_log = built.log;
  if (built.ok) {
    for (const auto& t : program.tests) ev.outcome.runs.push_back(ctx.sandbox.run_one(*built.artifact, t));
  }
  return ev;
}

}  // namespace

std::string PipelineConfig::mode_label() const {
  switch (mode) {
    case PipelineMode::SpecTra: return "spectra";
    case PipelineMode::Baseline: return "baseline";
    case PipelineMode::AllSpecsTogether: return "all-together";
    case PipelineMode::SingleModality: return "single:" + std::string(to_string(modality));
    case PipelineMode::OneShotSpec: return "one-shot:" + std::string(to_string(modality));
  }
  return "?";
}

void PipelineConfig::validate() const {
  if (k_max < 1) throw ConfigError("k_max must be >= 1");
  if (repair_rounds < 0 || repair_rounds > 3) throw ConfigError("repair_rounds must be in 0..3");
  if ((mode == PipelineMode::SingleModality || mode == PipelineMode::OneShotSpec) &&
      modality == Modality::None) {
    throw ConfigError("mode " + mode_label() + " needs a modality");
  }
}

void parse_mode(std::string_view label, PipelineConfig& config) {
  const auto colon = label.find(':');
  const std::string_view head = label.substr(0, colon);
  if (colon == std::string_view::npos) {
    if (head == "spectra") config.mode = PipelineMode::SpecTra;
    else if (head == "baseline") config.mode = PipelineMode::Baseline;
    else if (head == "all-together") config.mode = PipelineMode::AllSpecsTogether;
    else throw ConfigError("unknown mode '" + std::string(label) + "'");
    config.modality = Modality::None;
    return;
  }
  if (head == "single") config.mode = PipelineMode::SingleModality;
  else if (head == "one-shot") config.mode = PipelineMode::OneShotSpec;
  else throw ConfigError("unknown mode '" + std::string(label) + "'");
  config.modality = parse_modality(label.substr(colon + 1));
  if (config.modality == Modality::None) throw ConfigError("mode needs static, io or desc");
}

std::set<Modality> SpecSet::available() const {
  std::set<Modality> out;
  for (const auto& [m, s] : validated) out.insert(m);
  return out;
}

std::vector<Modality> stage_plan(const SpecSet& specs, const PipelineConfig& config) {
  std::vector<Modality> plan = mode_order(specs, config);
  plan.resize(static_cast<std::size_t>(config.k_max), Modality::None);
  return plan;
}

std::size_t estimate_tokens(const ChatRequest& request) {
  std::size_t bytes = 0;
  for (const auto& m : request.messages) bytes += m.text.size();
  return (bytes + 3) / 4;
}

double stage_temperature(const TemperaturePolicy& policy, int stage_index) {
  return stage_index == 0 ? policy.first_translate : policy.later_translate;
}

std::string translate_once(const SourceProgram& program, const Specification* spec,
                           Language target, double temperature, int seed,
                           const PipelineContext& ctx) {
  const ChatRequest req = ctx.composer.translation(program, spec, target, temperature, seed);
  return extract_code_block(ctx.provider.complete(req), target);
}

StageResult run_pipeline(const SourceProgram& program, const SpecSet& specs,
                         const PipelineConfig& config, const PipelineContext& ctx) {
  config.validate();
  require_supported_pair(program.language, config.target);
  if (program.tests.empty()) {
    throw ContractViolation("program " + program.program_id + " has no tests");
  }
  StageResult result;
  result.program_id = program.program_id;
  const std::vector<Modality> order = mode_order(specs, config);
  const std::vector<Modality> plan = stage_plan(specs, config);

  std::vector<Specification> all_specs;
  for (Modality m : modality_order(specs.available())) {
    if (m != Modality::None) all_specs.push_back(specs.validated.at(m));
  }

  for (std::size_t i = 0; i < plan.size(); ++i) {
    Stage stage;
    stage.temperature = stage_temperature(ctx.composer.options().temperatures, static_cast<int>(i));
    const int seed = static_cast<int>(i) + 1;
    try {
      ChatRequest req;
      Modality used = plan[i];
      if (config.mode == PipelineMode::AllSpecsTogether) {
        req = ctx.composer.translation_all_specs(program, all_specs, config.target,
                                                 stage.temperature, seed);
        stage.note = "all specs together (" + std::to_string(all_specs.size()) + ")";
      } else {
        req = ctx.composer.translation(program, spec_for(specs, config, used), config.target,
                                       stage.temperature, seed);
        // Oversized spec prompts fall through to the next modality in order.
        while (used != Modality::None && estimate_tokens(req) > config.token_budget) {
          const auto pos = std::find(order.begin(), order.end(), used);
          const Modality next =
              pos == order.end() || pos + 1 == order.end() ? Modality::None : *(pos + 1);
          stage.note += std::string(to_string(used)) + " prompt over token budget (" +
                        std::to_string(estimate_tokens(req)) + " > " +
                        std::to_string(config.token_budget) + "), degraded to " +
                        std::string(to_string(next)) + "; ";
          used = next;
          req = ctx.composer.translation(program, spec_for(specs, config, used), config.target,
                                         stage.temperature, seed);
        }
      }
      stage.modality_used = used;

      std::string candidate;
      try {
        candidate = extract_code_block(ctx.provider.complete(req), config.target);
      } catch (const ExtractionFailed& e) {
        stage.verdict = Verdict::Fail;
        stage.failure_kind = FailureKind::Compile;
        stage.note += std::string("extraction failed: ") + e.what();
        result.stages.push_back(std::move(stage));
        continue;
      }
      Evaluated ev = build_and_test(std::move(candidate), program, config, ctx);
      stage.candidate = std::move(ev.candidate);
      stage.repair_calls = ev.repair_calls;
      stage.note += ev.note;
      stage.verdict = ev.outcome.passed() ? Verdict::Pass : Verdict::Fail;
      stage.failure_kind = ev.outcome.failure_kind();
    } catch (const EnvironmentError& e) {
      result.complete = false;
      result.note = std::string("environment error at stage ") + std::to_string(i + 1) + ": " +
                    e.what();
      return result;
    } catch (const ReplayMiss& e) {
      result.complete = false;
      result.note = std::string("stage ") + std::to_string(i + 1) + ": " + e.what();
      return result;
    }
    result.stages.push_back(std::move(stage));
  }
  return result;
}

Attribution attribute(const StageResult& result) {
  Attribution a;
  a.program_id = result.program_id;
  for (const auto& s : result.stages) {
    if (s.verdict != Verdict::Pass) continue;
    if (!a.first_passing) a.first_passing = s.modality_used;
    a.solved_by.insert(s.modality_used);
  }
  return a;
}

int VennRegions::total_solved() const {
  int n = 0;
  for (int r : regions) n += r;
  return n;
}

int VennRegions::region(bool s, bool io, bool desc) const {
  return regions[(s ? 1 : 0) | (io ? 2 : 0) | (desc ? 4 : 0)];
}

VennRegions partition(const std::vector<Attribution>& attributions) {
  VennRegions v;
  for (const auto& a : attributions) {
    if (a.solved_by.empty()) continue;
    const int mask = (a.solved_by.contains(Modality::Static) ? 1 : 0) |
                     (a.solved_by.contains(Modality::IO) ? 2 : 0) |
                     (a.solved_by.contains(Modality::Desc) ? 4 : 0);
    ++v.regions[static_cast<std::size_t>(mask)];
  }
  return v;
}

CorpusRun run_corpus(const std::vector<SourceProgram>& programs,
                     const std::map<std::string, SpecSet>& specs, const PipelineConfig& config,
                     const PipelineContext& ctx, int workers) {
  config.validate();
  CorpusRun run;
  run.results.resize(programs.size());
  std::vector<std::exception_ptr> errors(programs.size());
  const SpecSet empty;
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < programs.size(); i = next++) {
      try {
        const auto it = specs.find(programs[i].program_id);
        run.results[i] =
            run_pipeline(programs[i], it == specs.end() ? empty : it->second, config, ctx);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  {
    std::vector<std::jthread> threads;
    const auto n = std::min<std::size_t>(static_cast<std::size_t>(std::max(workers, 1)),
                                         programs.size());
    for (std::size_t t = 0; t < n; ++t) threads.emplace_back(worker);
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  run.report = compute_pass_at_k(run.results, config.k_max);
  for (const auto& r : run.results) run.attributions.push_back(attribute(r));
  return run;
}

}  // namespace specbridge
