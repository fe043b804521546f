#include <doctest.h>

#include <chrono>
#include <fstream>

#include "helpers.hpp"
#include "slicefuzz/gauntlet.hpp"
#include "slicefuzz/tracer.hpp"

using namespace testing;

namespace {

const Subject& cjson() {
  fs::path dir = default_gauntlet_root() / "cjson-mini" / "src";
  return subject({(dir / "cjson.c").string()},
                 {"-O0", "-w", "-include", (dir / "cjson_prelude.h").string()});
}

std::vector<std::string> read_lines(const fs::path& p) {
  std::ifstream f(p);
  std::vector<std::string> out;
  for (std::string l; std::getline(f, l);)
    if (!l.empty()) out.push_back(l);
  return out;
}

}  // namespace

TEST_SUITE("tracer") {

TEST_CASE("straight-line main gives one record per statement") {
  const auto& s = subject("straight3.c");
  auto t = run_traced(s.program, {});
  CHECK(t.exit_status == ExitStatus::Normal);
  CHECK(lines_of(s.index, t.records) ==
        std::vector<std::string>{"straight3.c:2:0", "straight3.c:3:0", "straight3.c:4:0"});
}

TEST_CASE("backslash-u input enters the callee") {
  const auto& s = cjson();
  auto in = read_bytes(fixture("cjson_u.input"));
  REQUIRE(in);
  auto t = run_traced(s.program, *in);
  CHECK(lines_of(s.index, t.records) == read_lines(fixture("cjson_u.trace")));
}

TEST_CASE("trace cap") {
  const auto& s = subject("loop1000.c");
  RunOptions ro;
  ro.trace_cap = 100;
  auto t = run_traced(s.program, {}, ro);
  CHECK(t.exit_status == ExitStatus::TraceCap);
  CHECK(t.records.size() == 100);
}

TEST_CASE("timeout") {
  const auto& s = subject("spin.c");
  RunOptions ro;
  ro.timeout = std::chrono::milliseconds(50);
  ro.trace_cap = std::uint64_t(1) << 40;
  auto start = std::chrono::steady_clock::now();
  auto t = run_traced(s.program, {}, ro);
  double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
                  .count();
  CHECK(t.exit_status == ExitStatus::Timeout);
  CAPTURE(ms);
  CHECK(ms < 100.0);
}

TEST_CASE("crash keeps the partial trace") {
  const auto& s = subject("crash.c");
  auto t = run_traced(s.program, bytes("X"));
  CHECK(t.exit_status == ExitStatus::Crash);
  CHECK(t.signal != 0);
  CHECK(lines_of(s.index, t.records) ==
        std::vector<std::string>{"crash.c:4:0", "crash.c:5:0", "crash.c:6:0", "crash.c:7:0"});
  auto ok = run_traced(s.program, bytes("a"));
  CHECK(ok.exit_status == ExitStatus::Normal);
}

TEST_CASE("stop_at cuts at the guard") {
  const auto& s = cjson();
  auto seed = read_bytes(default_gauntlet_root() / "cjson-mini" / "seeds" / "seed1");
  REQUIRE(seed);
  CondId c24 = cond_at(s.index, "cjson.c", 24);
  RunOptions ro;
  ro.stop_at = c24;
  auto t = run_traced(s.program, *seed, ro);
  REQUIRE(t.truncated_at);
  CHECK(*t.truncated_at == c24);
  REQUIRE_FALSE(t.records.empty());
  CHECK(lines_of(s.index, {t.records.back()}).front() == "cjson.c:24:0");

  auto full = run_traced(s.program, bytes("no escapes"), ro);
  CHECK_FALSE(full.truncated_at);
  CHECK(lines_of(s.index, {full.records.back()}).front() == "cjson.c:17:0");
}

TEST_CASE("arm events only") {
  const auto& s = subject("two_branch.c");
  RunOptions ro;
  ro.record_statements = false;
  auto t = run_traced(s.program, bytes("a"), ro);
  CHECK(t.records.empty());
  REQUIRE(t.arm_events.size() == 1);
  CHECK(t.arm_events[0].cond == cond_at(s.index, "two_branch.c", 5));
  CHECK(t.arm_events[0].arm == 0);  // 'a' is odd
  auto e = run_traced(s.program, bytes("b"), ro);
  REQUIRE(e.arm_events.size() == 1);
  CHECK(e.arm_events[0].arm == 1);
}

TEST_CASE("input through a file argument") {
  const auto& s = subject("file_arg.c");
  Program p = s.program;
  p.args = {"@@"};
  auto t = run_traced(p, bytes("F"));
  CHECK(t.exit_code == 1);
  auto u = run_traced(p, bytes("G"));
  CHECK(u.exit_code == 0);
}

TEST_CASE("guard table round trip") {
  const auto& s = cjson();
  auto c = s.program.guards.parse_cond("cjson.c:24");
  REQUIRE(c);
  CHECK(*c == cond_at(s.index, "cjson.c", 24));
  CHECK(s.program.guards.parse_cond(c->str()) == c);
  CHECK_FALSE(s.program.guards.parse_cond("cjson.c:25"));
  auto dir = scratch("guards");
  s.program.guards.save(dir / "g.json");
  auto loaded = GuardTable::load(dir / "g.json");
  CHECK(loaded.parse_cond("cjson.c:33") == s.program.guards.parse_cond("cjson.c:33"));
  auto rec = loaded.record_of(*c);
  REQUIRE(rec);
  CHECK(loaded.cond_of(*rec) == c);
}

TEST_CASE("compile failure carries diagnostics") {
  auto dir = scratch("bad_build");
  std::ofstream(dir / "bad.c") << "int main(void) { return undeclared_thing; }\n";
  SubjectConfig sc;
  sc.sources = {dir / "bad.c"};
  try {
    build_subject(sc, dir / "build");
    FAIL("expected a build error");
  } catch (const BuildError& e) {
    CHECK(e.diagnostics().find("undeclared_thing") != std::string::npos);
  }
}

}
