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

#include <random>

#include "doctest.h"
#include "specbridge/core/errors.h"
#include "specbridge/sandbox/process.h"
#include "specbridge/sandbox/sandbox.h"
#include "support.h"

using namespace specbridge;
using testing::tc;

namespace {

const char* kEcho = R"(#include <stdio.h>
int main(void) { int c; while ((c = getchar()) != EOF) putchar(c); return 0; }
)";

const char* kUpper = R"(#include <stdio.h>
#include <ctype.h>
int main(void) { int c; while ((c = getchar()) != EOF) putchar(toupper(c)); return 0; }
)";

}  // namespace

TEST_SUITE("sandbox") {
  TEST_CASE("run_process captures output, exit codes and signals") {
    ProcessOptions o;
    o.stdin_data = "hi";
    auto r = run_process({"cat"}, o);
    CHECK(r.ok());
    CHECK(r.stdout_data == "hi");

    r = run_process({"sh", "-c", "echo err >&2; exit 7"}, {});
    CHECK(r.exit_code == 7);
    CHECK(r.stderr_data == "err\n");
    CHECK_FALSE(r.ok());

    r = run_process({"sh", "-c", "kill -9 $$"}, {});
    CHECK(r.signal == 9);

    r = run_process({"definitely-not-a-command-xyz"}, {});
    CHECK(r.spawn_failed);
  }

  TEST_CASE("run_process timeout kills the whole process group") {
    ProcessOptions o;
    o.timeout = std::chrono::milliseconds(300);
    const auto t0 = std::chrono::steady_clock::now();
    const auto r = run_process({"sh", "-c", "sleep 30 & sleep 30; echo never"}, o);
    const auto elapsed = std::chrono::steady_clock::now() - t0;
    CHECK(r.timed_out);
    CHECK(r.stdout_data.empty());
    CHECK(elapsed < std::chrono::seconds(5));
  }

  TEST_CASE("run_process output cap drains without blocking") {
    ProcessOptions o;
    o.max_output_bytes = 1000;
    o.timeout = std::chrono::seconds(10);
    const auto r = run_process({"sh", "-c", "head -c 5000000 /dev/zero; echo done >&2"}, o);
    CHECK_FALSE(r.timed_out);
    CHECK(r.stdout_data.size() == 1000);
    CHECK(r.stdout_truncated);
    CHECK(r.stderr_data == "done\n");
  }

  TEST_CASE("run_process cwd and env") {
    testing::TempDir d;
    ProcessOptions o;
    o.cwd = d.path();
    o.env["SPECBRIDGE_X"] = "42";
    const auto r = run_process({"sh", "-c", "pwd; echo $SPECBRIDGE_X"}, o);
    CHECK(r.stdout_data == d.path().string() + "\n42\n");
  }

  TEST_CASE("normalization") {
    CHECK(normalize("a  \r\nb\t\n\n\n") == "a\nb\n");
    CHECK(normalize("") == "");
    CHECK(normalize("x") == "x\n");
    CHECK(normalize("\xff") == "\xEF\xBF\xBD\n");
    CHECK(outputs_match("5\n", "5", false));
    CHECK_FALSE(outputs_match("5\n", "5", true));
    CHECK_FALSE(outputs_match("5\n", "6\n", false));
  }

  TEST_CASE("normalize is idempotent and bit-exact implies normalized equality") {
    std::mt19937 rng(3);
    for (int i = 0; i < 500; ++i) {
      std::string s;
      const int n = static_cast<int>(rng() % 40);
      for (int j = 0; j < n; ++j) {
        static const char alphabet[] = "ab \t\r\n\xc3\xa9\xff";
        s.push_back(alphabet[rng() % (sizeof(alphabet) - 1)]);
      }
      const Bytes once = normalize(s);
      CHECK(normalize(once) == once);
      CHECK(outputs_match(s, s, true));
      CHECK(outputs_match(s, s, false));
      if (!once.empty()) CHECK(once.back() == '\n');
    }
  }

  TEST_CASE("expand_command") {
    CHECK(expand_command({"cc", "-o", "{out}", "{src}", "{dir}/x"},
                         {{"out", "/a"}, {"src", "/b.c"}, {"dir", "/d"}}) ==
          std::vector<std::string>{"cc", "-o", "/a", "/b.c", "/d/x"});
  }

  TEST_CASE("scratch paths are scrubbed from tool logs") {
    CHECK(scrub_scratch_paths("/s/job-1/main.c:3: error\nsee /s/job-2/lib.rs and /s/job-1/x\n", "/s",
                              "/s/job-1") == "main.c:3: error\nsee <scratch>/lib.rs and x\n");
    CHECK(scrub_scratch_paths("no paths here", "/s") == "no paths here");
    // Two builds of the same broken source produce the same log.
    Sandbox sb(testing::sandbox_options());
    const auto a = sb.build("int main( {", Language::C);
    const auto b = sb.build("int main( {", Language::C);
    CHECK_FALSE(a.ok);
    CHECK(a.log == b.log);
    CHECK(a.log.find(sb.scratch_root().string()) == std::string::npos);
  }

  TEST_CASE("configuration errors") {
    auto o = testing::sandbox_options();
    o.workers = 0;
    CHECK_THROWS_AS(Sandbox{o}, ConfigError);
    o = testing::sandbox_options();
    o.limits.wall_timeout = std::chrono::milliseconds(0);
    CHECK_THROWS_AS(Sandbox{o}, ConfigError);
  }

  TEST_CASE("toolchain probing") {
    Sandbox sb(testing::sandbox_options());
    CHECK(sb.available(Language::C));
    auto o = testing::sandbox_options();
    Toolchain missing = default_toolchain(Language::Go);
    missing.probe_command = {"no-such-go-binary-xyz", "version"};
    missing.remediation = "install the thing";
    o.toolchains[Language::Go] = missing;
    Sandbox sb2(o);
    CHECK_FALSE(sb2.available(Language::Go));
    try {
      sb2.require(Language::Go);
      FAIL("expected EnvironmentError");
    } catch (const EnvironmentError& e) {
      CHECK(std::string(e.what()).find("install the thing") != std::string::npos);
    }
  }

  TEST_CASE("C evaluation verdicts") {
    Sandbox sb(testing::sandbox_options());
    auto ok = sb.evaluate(kEcho, Language::C, {tc("1", "abc\n", "abc\n"), tc("2", "", "")});
    CHECK(ok.passed());
    CHECK(ok.failure_kind() == FailureKind::None);

    auto wrong = sb.evaluate(kUpper, Language::C, {tc("1", "A\n", "A\n"), tc("2", "b\n", "b\n")});
    CHECK_FALSE(wrong.passed());
    CHECK(wrong.runs[0].verdict == RunVerdict::Pass);
    CHECK(wrong.runs[1].verdict == RunVerdict::WrongOutput);
    CHECK(wrong.failure_kind() == FailureKind::WrongOutput);

    auto broken = sb.evaluate("int main( {", Language::C, {tc("1", "", "")});
    CHECK_FALSE(broken.compile_ok);
    CHECK(broken.failure_kind() == FailureKind::Compile);
    CHECK_FALSE(broken.compile_log.empty());
    CHECK(broken.runs.empty());

    auto crash = sb.evaluate("#include <stdlib.h>\nint main(void){ abort(); }\n", Language::C,
                             {tc("1", "", "")});
    CHECK(crash.runs[0].verdict == RunVerdict::RuntimeError);
    CHECK(crash.runs[0].signal != 0);
  }

  TEST_CASE("an artifact runs the same test repeatedly with identical results") {
    Sandbox sb(testing::sandbox_options());
    const auto built = sb.build(kEcho, Language::C);
    REQUIRE(built.ok);
    const auto a = sb.run_one(*built.artifact, tc("x", "same\n", "same\n"));
    const auto b = sb.run_one(*built.artifact, tc("x", "same\n", "same\n"));
    CHECK(a.verdict == RunVerdict::Pass);
    CHECK(a.stdout_data == b.stdout_data);
    CHECK(a.test_id == "x");
  }

  TEST_CASE("bit-exact comparison is opt-in") {
    auto o = testing::sandbox_options();
    Sandbox loose(o);
    o.bit_exact = true;
    Sandbox strict(o);
    const char* src = "#include <stdio.h>\nint main(void){ printf(\"5  \\n\\n\"); return 0; }\n";
    CHECK(loose.evaluate(src, Language::C, {tc("1", "", "5\n")}).passed());
    CHECK_FALSE(strict.evaluate(src, Language::C, {tc("1", "", "5\n")}).passed());
  }

  TEST_CASE("Rust builds when rustc is present") {
    if (!testing::have_tool("rustc")) return;
    Sandbox sb(testing::sandbox_options());
    const auto out = sb.evaluate(
        "use std::io::Read;\nfn main(){ let mut s=String::new(); std::io::stdin().read_to_string(&mut s).unwrap(); print!(\"{}\", s.len()); }\n",
        Language::Rust, {tc("1", "abcd", "4")});
    CHECK(out.passed());
  }

  TEST_CASE("JavaScript runs under node when present") {
    if (!testing::have_tool("node")) return;
    Sandbox sb(testing::sandbox_options());
    const auto out = sb.evaluate(
        "const s = require('fs').readFileSync(0, 'utf8'); console.log(s.trim().split('').reverse().join(''));\n",
        Language::JavaScript, {tc("1", "abc\n", "cba\n")});
    CHECK(out.passed());
  }

  TEST_CASE("TypeScript compiles with tsc when present") {
    if (!testing::have_tool("tsc")) return;
    Sandbox sb(testing::sandbox_options());
    const auto out = sb.evaluate(
        "import * as fs from 'fs';\nconst s: string = fs.readFileSync(0, 'utf8');\nconsole.log(s.trim().length);\n",
        Language::TypeScript, {tc("1", "hello\n", "5\n")});
    CHECK(out.compile_ok);
    CHECK(out.passed());
  }
}
