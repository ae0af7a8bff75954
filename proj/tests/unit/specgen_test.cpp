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

#include "doctest.h"
#include "specbridge/core/errors.h"
#include "specbridge/specgen/specgen.h"
#include "specbridge/specval/specval.h"
#include "support.h"

using namespace specbridge;
using testing::fenced;
using testing::rule;
using testing::tc;

namespace {

const char* kDouble = R"(#include <stdio.h>
#include <stdlib.h>

int main(void) {
  long x;
  if (scanf("%ld", &x) != 1) return 2;
  if (x < 0) abort();
  printf("%ld\n", 2 * x);
  return 0;
}
)";

SourceProgram doubler() {
  return testing::c_program("double", kDouble, {tc("1", "3\n", "6\n"), tc("2", "0\n", "0\n")});
}

const char* kStaticText =
    "Input Format: one integer x.\nOutput Format: 2x on one line.\n"
    "Precondition: x >= 0.\nPostcondition: prints twice x.\n";

std::string io_block(const std::vector<std::pair<std::string, std::string>>& pairs) {
  std::string body;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (i) body += "---\n";
    body += "Input:\n" + pairs[i].first + "Output:\n" + pairs[i].second;
  }
  return fenced("io", body);
}

const char* kGoodRegen = R"(#include <stdio.h>
int main(void) { long x; if (scanf("%ld", &x) != 1) return 2; printf("%ld\n", x * 2); return 0; }
)";
const char* kOffByOneRegen = R"(#include <stdio.h>
int main(void) { long x; if (scanf("%ld", &x) != 1) return 2; printf("%ld\n", x ? x * 2 : 1); return 0; }
)";

struct Harness {
  PromptComposer composer = testing::default_composer();
  Sandbox sandbox{testing::sandbox_options()};
  ScriptedProvider scripted;
  RecordingProvider rec{scripted};
  ValidationContext ctx() { return {rec, composer, sandbox}; }
};

}  // namespace

TEST_SUITE("specgen") {
  TEST_CASE("budget validation and per-modality ceilings") {
    GenBudget b;
    CHECK(b.max_for(Modality::Static) == 6);
    CHECK(b.max_for(Modality::Desc) == 6);
    CHECK(b.max_for(Modality::IO) == 10);
    CHECK(b.batch_k == 3);
    CHECK_NOTHROW(b.validate());
    b.batch_k = 7;
    CHECK_THROWS_AS(b.validate(), ConfigError);
    b = GenBudget{};
    b.io_max = 0;
    CHECK_THROWS_AS(b.validate(), ConfigError);
    CHECK_THROWS_AS(GenBudget{}.max_for(Modality::None), ContractViolation);
  }

  TEST_CASE("candidate stream never exceeds the modality ceiling") {
    Harness h;
    h.scripted.add(rule(RequestTag::SpecGen, {}, "garbage without headings"));
    const auto p = doubler();
    for (auto m : {Modality::Static, Modality::IO}) {
      h.rec.clear();
      CandidateStream s(h.rec, h.composer, p, m, GenBudget{});
      CHECK_FALSE(s.next().has_value());
      CHECK(s.exhausted());
      CHECK(s.calls() == GenBudget{}.max_for(m));
      CHECK(h.rec.count(RequestTag::SpecGen) == static_cast<std::size_t>(GenBudget{}.max_for(m)));
      // Parse failures still consume an index and are recorded.
      REQUIRE(s.records().size() == static_cast<std::size_t>(s.calls()));
      CHECK(s.records().back().index == s.calls());
      CHECK_FALSE(s.records().back().parse_error.empty());
    }
  }

  TEST_CASE("batches, indices and sampling temperature") {
    Harness h;
    h.scripted.add(rule(RequestTag::SpecGen, {}, "garbage", 2));
    h.scripted.add(rule(RequestTag::SpecGen, {}, kStaticText));
    const auto p = doubler();
    CandidateStream s(h.rec, h.composer, p, Modality::Static, GenBudget{});
    const auto batch = s.next_batch();
    REQUIRE(batch.size() == 3);
    CHECK(batch[0].candidate_index == 1);
    CHECK(batch[1].candidate_index == 3);  // index 2 failed to parse
    CHECK(batch[2].candidate_index == 4);
    CHECK(batch[0].status == SpecStatus::Candidate);
    CHECK(batch[0].provenance.temperature == 0.6);
    CHECK(s.calls() == 4);
    for (const auto& ex : h.rec.log()) CHECK(ex.request.temperature == 0.6);
    CHECK(generate_candidates(h.rec, h.composer, p, Modality::Static, GenBudget{}).size() == 5);
  }

  TEST_CASE("provider failure aborts with partial records") {
    struct Failing : Provider {
      int calls = 0;
      ModelResponse complete(const ChatRequest& r) override {
        if (++calls == 3) throw ProviderError("unreachable");
        return {kStaticText, "f", prompt_digest(r)};
      }
      std::string id() const override { return "f"; }
    } failing;
    const auto composer = testing::default_composer();
    const auto p = doubler();
    CandidateStream s(failing, composer, p, Modality::Static, GenBudget{});
    CHECK(s.next().has_value());
    CHECK(s.next().has_value());
    CHECK_FALSE(s.next().has_value());
    CHECK(s.aborted().has_value());
    CHECK(s.records().size() == 2);
  }

  TEST_CASE("search keeps a patched fallback but prefers self-consistent") {
    auto produce = [](int index) {
      CandidateRecord r;
      r.index = index;
      Specification s = make_spec(IoSpec{{{std::to_string(index), "x", IoOrigin::ModelGenerated, true}}});
      s.candidate_index = index;
      r.spec = s;
      return r;
    };
    auto validator_for = [](int self_consistent_at) {
      return [self_consistent_at](const Specification& s) {
        ValidationVerdict v;
        v.spec = s;
        v.accept = true;
        v.spec.status = s.candidate_index == self_consistent_at ? SpecStatus::SelfConsistent
                                                                : SpecStatus::Patched;
        return v;
      };
    };
    auto out = search_until_valid(Modality::IO, 10, produce, validator_for(4));
    CHECK(out.provider_calls == 4);
    REQUIRE(out.found());
    CHECK(out.accepted->status == SpecStatus::SelfConsistent);
    CHECK(out.accepted->candidate_index == 4);

    out = search_until_valid(Modality::IO, 10, produce, validator_for(-1));
    CHECK(out.provider_calls == 10);
    REQUIRE(out.found());
    CHECK(out.accepted->status == SpecStatus::Patched);
    CHECK(out.accepted->candidate_index == 1);
    CHECK(out.candidates.size() == 10);
  }
}

TEST_SUITE("specval") {
  TEST_CASE("self-consistency accepts a passing regeneration and rejects a failing one") {
    Harness h;
    h.scripted.add(rule(RequestTag::CodeGen, {"twice x"}, fenced("c", kGoodRegen)));
    h.scripted.add(rule(RequestTag::CodeGen, {"double of x"}, fenced("c", kOffByOneRegen)));
    h.scripted.add(rule(RequestTag::CodeGen, {"no code"}, "I cannot."));
    const auto p = doubler();
    auto spec_with = [](std::string post) {
      StaticSpec s;
      s.input_format = "x";
      s.output_format = "2x";
      s.per_function["main"] = {"x >= 0", std::move(post)};
      return make_spec(s);
    };
    auto good = check_self_consistency(spec_with("prints twice x"), p, h.ctx());
    CHECK(good.accept);
    CHECK(good.spec.status == SpecStatus::SelfConsistent);
    REQUIRE(good.regenerated.has_value());

    auto bad = check_self_consistency(spec_with("prints the double of x"), p, h.ctx());
    CHECK_FALSE(bad.accept);
    CHECK(bad.spec.status == SpecStatus::Rejected);
    CHECK(bad.reason == FailureKind::WrongOutput);
    CHECK(bad.detail.find("test 2") != std::string::npos);
    CHECK(replay_consistency(*good.regenerated, p, h.sandbox));
    CHECK_FALSE(replay_consistency(*bad.regenerated, p, h.sandbox));

    auto none = check_self_consistency(spec_with("no code"), p, h.ctx());
    CHECK_FALSE(none.accept);
    CHECK(none.reason == FailureKind::Compile);

    SourceProgram untested = p;
    untested.tests.clear();
    CHECK_THROWS_AS(check_self_consistency(spec_with("x"), untested, h.ctx()), ContractViolation);
    auto validated = spec_with("prints twice x");
    validated.status = SpecStatus::SelfConsistent;
    CHECK_THROWS_AS(back_translate(validated, Language::C, h.rec, h.composer), ContractViolation);
  }

  TEST_CASE("io validation: keep, patch, reject") {
    Sandbox sb(testing::sandbox_options());
    const auto p = doubler();
    auto io = [](std::vector<IoPair> pairs) { return make_spec(IoSpec{std::move(pairs)}); };
    const IoPair correct{"5\n", "10\n", IoOrigin::ModelGenerated, true};
    const IoPair wrong{"7\n", "15\n", IoOrigin::ModelGenerated, true};
    const IoPair crashing{"-1\n", "-2\n", IoOrigin::ModelGenerated, true};

    auto mixed = validate_io_spec(p, io({correct, wrong, crashing}), sb);
    REQUIRE(mixed.spec.has_value());
    CHECK(mixed.spec->status == SpecStatus::SelfConsistent);
    CHECK(mixed.spec->io_spec().pairs == std::vector<IoPair>{correct});
    CHECK(mixed.kept == 1);
    CHECK(mixed.mismatched == 1);
    CHECK(mixed.unusable == 1);

    auto patched = validate_io_spec(p, io({wrong, crashing}), sb);
    REQUIRE(patched.spec.has_value());
    CHECK(patched.spec->status == SpecStatus::Patched);
    REQUIRE(patched.spec->io_spec().pairs.size() == 1);
    const auto& fixed = patched.spec->io_spec().pairs[0];
    CHECK(fixed.input == "7\n");
    CHECK(fixed.output == "14\n");
    CHECK(fixed.origin == IoOrigin::Patched);
    // Re-executing the original on a patched input reproduces the stored output.
    CHECK(sb.evaluate(p.source, p.language, {tc("re", fixed.input, fixed.output)}).passed());

    auto rejected = validate_io_spec(p, io({crashing}), sb);
    CHECK_FALSE(rejected.spec.has_value());
    CHECK(rejected.unusable == 1);

    CHECK_THROWS_AS(validate_io_spec(p, make_spec(DescSpec{}), sb), ContractViolation);
    SourceProgram failing = p;
    failing.tests.push_back(tc("3", "1\n", "3\n"));
    CHECK_THROWS_AS(validate_io_spec(failing, io({correct}), sb), ContractViolation);
  }

  TEST_CASE("generate_until_valid over the io validator regenerates until the budget") {
    Harness h;
    h.scripted.add(rule(RequestTag::SpecGen, {"test cases"}, io_block({{"-4\n", "-8\n"}})));
    const auto p = doubler();
    const auto out = generate_until_valid(h.rec, h.composer, p, Modality::IO, GenBudget{},
                                          make_validator(Modality::IO, p, h.ctx()));
    CHECK_FALSE(out.found());
    CHECK(out.provider_calls == 10);
    CHECK(h.rec.count(RequestTag::SpecGen) == 10);
    for (const auto& c : out.candidates) {
      REQUIRE(c.validation.has_value());
      CHECK(c.validation->spec.status == SpecStatus::Rejected);
    }
  }

  TEST_CASE("generate_until_valid stops at the first self-consistent static spec") {
    Harness h;
    h.scripted.add(rule(RequestTag::SpecGen, {"static specification"},
                        "Input Format: x\nOutput Format: y\nPrecondition: a\nPostcondition: prints the double of x\n", 1));
    h.scripted.add(rule(RequestTag::SpecGen, {"static specification"}, kStaticText, 2));
    h.scripted.add(rule(RequestTag::CodeGen, {"twice x"}, fenced("c", kGoodRegen)));
    h.scripted.add(rule(RequestTag::CodeGen, {"double of x"}, fenced("c", kOffByOneRegen)));
    const auto p = doubler();
    const auto out = generate_until_valid(h.rec, h.composer, p, Modality::Static, GenBudget{},
                                          make_validator(Modality::Static, p, h.ctx()));
    REQUIRE(out.found());
    CHECK(out.accepted->candidate_index == 2);
    CHECK(out.accepted->status == SpecStatus::SelfConsistent);
    CHECK(out.provider_calls == 2);
    CHECK(h.rec.count(RequestTag::SpecGen) == 2);
    CHECK(h.rec.count(RequestTag::CodeGen) == 2);
    REQUIRE(out.candidates.size() == 2);
    CHECK(out.candidates[1].validation->artifact.has_value());
  }
}
