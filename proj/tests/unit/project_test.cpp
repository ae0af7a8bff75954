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
#include "specbridge/core/text.h"
#include "specbridge/project/cparse.h"
#include "specbridge/project/ffi.h"
#include "specbridge/project/instrument.h"
#include "specbridge/project/project.h"
#include "specbridge/project/trace.h"
#include "support.h"

using namespace specbridge;

namespace {

std::string minicat_source() { return read_file(testing::fixture("minicat/cat.c")); }

// Independent oracle: a definition starts at the column-0 line naming the
// function and ends at the first column-0 closing brace after it.
ByteRange oracle_range(const std::string& src, const std::string& name) {
  std::size_t pos = 0;
  while (true) {
    pos = src.find(name + "(", pos);
    REQUIRE(pos != std::string::npos);
    const std::size_t line = src.rfind('\n', pos) + 1;
    if (src[line] != ' ' && src[line] != '#' && src[line] != '/') {
      const std::size_t end = src.find("\n}", pos) + 2;
      return {line, end};
    }
    ++pos;
  }
}

}  // namespace

TEST_SUITE("cparse") {
  TEST_CASE("lexer handles comments, literals and directives") {
    const std::string src = "#define X(a) \\\n  (a)\n/* c */ int f(void) { return '}' + \"{\"[0]; } // tail\n";
    const auto l = c::lex(src);
    CHECK(l.directives.size() == 1);
    CHECK(src.substr(l.directives[0].start, l.directives[0].size()).find("(a)") != std::string::npos);
    CHECK(l.comments.size() == 2);
    CHECK(l.tokens.front().text == "int");
    CHECK_THROWS_AS(c::lex("int x = \"unterminated;\n"), FormatError);
    CHECK_THROWS_AS(c::lex("/* never closed"), FormatError);
  }

  TEST_CASE("minicat decomposes into four units with exact byte ranges") {
    const std::string src = minicat_source();
    const auto defs = c::find_functions(src, "cat.c");
    REQUIRE(defs.size() == 4);
    const std::vector<std::string> names{"safe_write", "full_write", "cat_stream", "main"};
    for (std::size_t i = 0; i < 4; ++i) {
      const auto& u = defs[i].unit;
      CAPTURE(u.name);
      CHECK(u.name == names[i]);
      CHECK(u.byte_range == oracle_range(src, u.name));
      CHECK(u.file == "cat.c");
      const std::string text = src.substr(u.byte_range.start, u.byte_range.size());
      CHECK(text.rfind(u.signature, 0) == 0);
      CHECK(text.back() == '}');
      CHECK(src.substr(defs[i].body_range.start, defs[i].body_range.size()) == u.body);
    }
    // Ranges are disjoint and ordered.
    for (std::size_t i = 1; i < 4; ++i) {
      CHECK(defs[i - 1].unit.byte_range.end <= defs[i].unit.byte_range.start);
    }
    CHECK_FALSE(defs[0].unit.docstring.has_value());
    REQUIRE(defs[1].unit.docstring.has_value());
    CHECK(defs[1].unit.docstring->rfind("Write all N bytes", 0) == 0);
    REQUIRE(defs[2].unit.docstring.has_value());
    CHECK(defs[2].unit.docstring->find("as cat -n does") != std::string::npos);
    CHECK_FALSE(defs[3].unit.docstring.has_value());

    CHECK(defs[1].unit.callees == std::set<std::string>{"safe_write"});
    CHECK(defs[2].unit.callees.contains("full_write"));
    CHECK(defs[2].unit.callees.contains("fgets"));
    // IS_FLAG is a macro, never a unit, and sizeof is not a call.
    CHECK_FALSE(defs[2].unit.callees.contains("sizeof"));
    CHECK(defs[0].sig.is_static);
    CHECK(defs[0].sig.return_type == "size_t");
  }

  TEST_CASE("signature parsing") {
    auto s = c::parse_signature("static inline const char *pick(const char *a, int n[], ...)");
    CHECK(s.is_static);
    CHECK(s.name == "pick");
    CHECK(s.return_type == "const char *");
    REQUIRE(s.params.size() == 2);
    CHECK(s.params[0].name == "a");
    CHECK(s.params[0].type == "const char *");
    CHECK(s.params[1].array);
    CHECK(s.variadic);
    CHECK(c::parse_signature("int main(void)").params.empty());
  }

  TEST_CASE("structs and type classification") {
    const auto structs = c::find_structs(
        "struct point { int x; int y; };\n"
        "typedef struct { char name[16]; double w; } item;\n");
    REQUIRE(structs.contains("struct point"));
    REQUIRE(structs.contains("item"));
    CHECK(structs.at("struct point").fields.size() == 2);
    CHECK(structs.at("item").fields[0].array_len == "16");
    CHECK(c::classify("struct point", structs).cls == c::TypeClass::Struct);
    CHECK(c::classify("const char *").cls == c::TypeClass::CharPtr);
    CHECK(c::classify("FILE *").cls == c::TypeClass::Pointer);
    CHECK(c::classify("unsigned long").cls == c::TypeClass::UnsignedInt);
    CHECK(c::classify("size_t").cls == c::TypeClass::UnsignedInt);
    CHECK(c::classify("double").cls == c::TypeClass::Floating);
    CHECK(c::classify("void").cls == c::TypeClass::Void);
    CHECK(c::classify("int **").pointer_depth == 2);
  }

  TEST_CASE("clean_comment strips decoration") {
    CHECK(c::clean_comment("/* a\n * b\n */") == "a\nb");
    CHECK(c::clean_comment("// x") == "x");
  }
}

TEST_SUITE("trace") {
  TEST_CASE("escaping round-trips arbitrary bytes") {
    std::mt19937 rng(11);
    for (int i = 0; i < 1000; ++i) {
      std::string raw;
      const int n = static_cast<int>(rng() % 64);
      for (int j = 0; j < n; ++j) raw.push_back(static_cast<char>(rng() % 256));
      const std::string esc = escape_trace_value(raw);
      CHECK(unescape_trace_value(esc) == raw);
      CHECK(esc.find('\n') == std::string::npos);
      CHECK(esc.find(" | ") == std::string::npos);
    }
    CHECK_THROWS_AS(unescape_trace_value("\\q"), FormatError);
    CHECK_THROWS_AS(unescape_trace_value("\\x4"), FormatError);
  }

  TEST_CASE("records round-trip") {
    IoTracePair p{"f", 3, {{"s", "\"a|b;c=d\\\n\""}, {"n", "-4"}}, "ptr(0x10)", ""};
    const auto line = format_trace_record(p);
    CHECK(line.rfind("f | 3 | ", 0) == 0);
    CHECK(parse_trace_record(line) == p);
    CHECK_FALSE(p.comparable());
    IoTracePair q{"g", 1, {}, "void", ""};
    CHECK(parse_trace_record(format_trace_record(q)) == q);
    CHECK(q.comparable());
    const auto io = to_io_pair(IoTracePair{"h", 1, {{"a", "1"}, {"b", "\"x\""}}, "2", ""});
    CHECK(io.input == "a=1, b=\"x\"");
    CHECK(io.output == "2");
    CHECK(io.origin == IoOrigin::Traced);
  }

  TEST_CASE("log parsing checks the schema header") {
    CHECK(parse_trace_log("# specbridge-trace v1\nf | 1 |  | ret=0\n").size() == 1);
    CHECK_THROWS_AS(parse_trace_log("# specbridge-trace v2\n"), FormatError);
    CHECK_THROWS_AS(parse_trace_log("garbage\n"), FormatError);
    CHECK_THROWS_AS(parse_trace_log("f | x |  | ret=0\n"), FormatError);
    CHECK_THROWS_AS(parse_trace_log("f | 1 | a | ret=0\n"), FormatError);
  }

  TEST_CASE("even sampling respects the cap and keeps order") {
    std::mt19937 rng(5);
    for (int trial = 0; trial < 200; ++trial) {
      std::vector<IoTracePair> recs;
      const int n = static_cast<int>(rng() % 80);
      for (int i = 0; i < n; ++i) {
        recs.push_back({"f", i, {}, std::to_string(i), "t" + std::to_string(rng() % 4)});
      }
      const std::size_t cap = rng() % 30;
      const auto kept = sample_evenly(recs, cap);
      CHECK(kept.size() == std::min<std::size_t>(cap, recs.size()));
      for (std::size_t i = 1; i < kept.size(); ++i) CHECK(kept[i - 1].call_index < kept[i].call_index);
      // Every test that produced records keeps at least one when the cap allows.
      std::set<std::string> tests, kept_tests;
      for (const auto& r : recs) tests.insert(r.test_id);
      for (const auto& r : kept) kept_tests.insert(r.test_id);
      if (cap >= tests.size()) CHECK(kept_tests == tests);
    }
  }
}

TEST_SUITE("instrument") {
  TEST_CASE("instrumented minicat traces calls and keeps stdout") {
    const std::string src = minicat_source();
    InstrumentReport report;
    const std::string out = instrument_source(src, {"safe_write", "full_write", "cat_stream", "main"},
                                              c::find_structs(src), report);
    CHECK(report.instrumented.size() == 4);
    CHECK(report.skipped.empty());
    testing::TempDir d;
    write_file(d.path() / "cat.c", out);
    ProcessOptions o;
    o.cwd = d.path();
    REQUIRE(run_process({"gcc", "-w", "-o", "cat", "cat.c"}, o).ok());
    o.stdin_data = "one\ntwo\n";
    o.env[kTraceFileEnv] = (d.path() / "t.trace").string();
    const auto r = run_process({(d.path() / "cat").string(), "-n"}, o);
    CHECK(r.stdout_data == "     1\tone\n     2\ttwo\n");
    const auto recs = parse_trace_log(read_file(d.path() / "t.trace"));
    std::map<std::string, int> per;
    for (const auto& rec : recs) ++per[rec.function];
    CHECK(per["cat_stream"] == 1);
    CHECK(per["main"] == 1);
    CHECK(per["full_write"] == 4);
    CHECK(per["safe_write"] == 4);
    const auto& cs = *std::find_if(recs.begin(), recs.end(),
                                   [](const IoTracePair& p) { return p.function == "cat_stream"; });
    CHECK(cs.return_value == "2");
    REQUIRE(cs.args.size() == 2);
    CHECK(cs.args[0].value.rfind("ptr(0x", 0) == 0);
    CHECK(cs.args[1].value == "1");

    // Without the variable nothing is written and output is unchanged.
    o.env.clear();
    CHECK(run_process({(d.path() / "cat").string()}, o).stdout_data == "one\ntwo\n");
  }

  TEST_CASE("struct arguments render one level deep") {
    const std::string src =
        "#include <stdio.h>\nstruct pt { int x; int y; };\n"
        "int sum(struct pt p) { return p.x + p.y; }\n"
        "int main(void) { struct pt p = {2, 5}; printf(\"%d\\n\", sum(p)); return 0; }\n";
    InstrumentReport report;
    const auto out = instrument_source(src, {"sum"}, c::find_structs(src), report);
    testing::TempDir d;
    write_file(d.path() / "s.c", out);
    ProcessOptions o;
    o.cwd = d.path();
    REQUIRE(run_process({"gcc", "-w", "-o", "s", "s.c"}, o).ok());
    o.env[kTraceFileEnv] = (d.path() / "t").string();
    CHECK(run_process({(d.path() / "s").string()}, o).stdout_data == "7\n");
    const auto recs = parse_trace_log(read_file(d.path() / "t"));
    REQUIRE(recs.size() == 1);
    CHECK(recs[0].args[0].value == "{x=2, y=5}");
    CHECK(recs[0].return_value == "7");
  }
}

TEST_SUITE("ffi") {
  TEST_CASE("C types map onto Rust FFI types") {
    CHECK(rust_ffi_type("int") == "c_int");
    CHECK(rust_ffi_type("size_t") == "usize");
    CHECK(rust_ffi_type("const char *") == "*const c_char");
    CHECK(rust_ffi_type("char *") == "*mut c_char");
    CHECK(rust_ffi_type("FILE *") == "*mut c_void");
    CHECK(rust_ffi_type("void") == "()");
    CHECK_FALSE(rust_ffi_type("struct pt").has_value());
  }

  TEST_CASE("glue for full_write declares safe_write and exports full_write") {
    const std::string src = minicat_source();
    std::map<std::string, c::FunctionDef> fns;
    for (auto& d : c::find_functions(src)) fns[d.unit.name] = d;
    const auto glue = generate_ffi_glue(fns.at("full_write"), fns, {});
    REQUIRE(glue.ok);
    CHECK(glue.target_export.find("pub unsafe extern \"C\" fn full_write(fd: c_int, buf: *const c_char, n: usize) -> usize") !=
          std::string::npos);
    CHECK(glue.extern_decls.find("pub fn safe_write(") != std::string::npos);
    CHECK(glue.c_callees == std::vector<std::string>{"safe_write"});
    // Already-translated callees are imported instead of declared.
    const auto accumulated = generate_ffi_glue(fns.at("full_write"), fns, {"safe_write"});
    CHECK(accumulated.peer_uses.find("safe_write") != std::string::npos);
    CHECK(accumulated.extern_decls.find("safe_write") == std::string::npos);
  }

  TEST_CASE("linkage stripping and prototypes") {
    const std::string src = minicat_source();
    const auto stripped = strip_internal_linkage(src, {"safe_write"});
    CHECK(stripped.find("static size_t safe_write") == std::string::npos);
    CHECK(stripped.find("size_t safe_write(int fd") != std::string::npos);
    const auto defs = c::find_functions(stripped);
    const auto proto = definition_to_prototype(stripped, defs[1]);
    CHECK(proto.find("size_t full_write(int fd, const char *buf, size_t n);") != std::string::npos);
    CHECK(proto.find("size_t done = 0;") == std::string::npos);
    CHECK(c::find_functions(proto).size() == 3);
  }
}

TEST_SUITE("project") {
  TEST_CASE("manifest loading") {
    const auto m = ProjectManifest::load(testing::fixture("minicat/project.json"));
    CHECK(m.name == "minicat");
    CHECK(m.entry_sources == std::vector<std::string>{"cat.c"});
    CHECK(m.e2e_tests.size() == 3);
    CHECK(m.bit_exact);
    CHECK(m.e2e_tests[1].args == std::vector<std::string>{"-n"});
    testing::TempDir d;
    write_file(d.path() / "bad.json", R"({"name":"x","sources":[],"build":["cc"],"tests":[]})");
    CHECK_THROWS(ProjectManifest::load(d.path() / "bad.json"));
  }

  TEST_CASE("working tree copy, pristine e2e run and hashing") {
    Sandbox sb(testing::sandbox_options());
    Project project(ProjectManifest::load(testing::fixture("minicat/project.json")), sb);
    const std::string h0 = project.tree().hash();
    CHECK(project.decompose().size() == 4);
    const auto run = project.build_and_test();
    CHECK(run.build_ok);
    CHECK(run.passed());
    const std::string original = project.tree().read("cat.c");
    project.tree().write("cat.c", original + "\n");
    CHECK(project.tree().hash() != h0);
    project.tree().write("cat.c", original);
    CHECK(project.tree().hash() == h0);
    // The user's tree is never touched.
    CHECK(read_file(testing::fixture("minicat/cat.c")) == original);
  }

  TEST_CASE("leaves-first order") {
    Sandbox sb(testing::sandbox_options());
    Project project(ProjectManifest::load(testing::fixture("minicat/project.json")), sb);
    CHECK(leaves_first(project.decompose()) ==
          std::vector<std::string>{"safe_write", "full_write", "cat_stream", "main"});
  }

  TEST_CASE("docstring specs come from comments") {
    Sandbox sb(testing::sandbox_options());
    Project project(ProjectManifest::load(testing::fixture("minicat/project.json")), sb);
    const auto docs = docstring_specs(project.decompose());
    CHECK(docs.size() == 2);
    CHECK(docs.at("full_write").source == DescSource::Docstring);
  }
}
