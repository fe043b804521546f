#include <doctest.h>

#include <random>

#include <nlohmann/json.hpp>

#include "../common/campaign_fixtures.hpp"
#include "helpers.hpp"
#include "slicefuzz/gauntlet.hpp"
#include "slicefuzz/slicer.hpp"
#include "slicefuzz/solver.hpp"

using namespace testing;

namespace {

const Subject& cjson() {
  fs::path dir = default_gauntlet_root() / "cjson-mini" / "src";
  return subject({(dir / "cjson.c").string()},
                 {"-O0", "-w", "-include", (dir / "cjson_prelude.h").string()});
}

SolveRequest request_for(const Subject& s, const std::string& file, std::uint32_t line,
                         std::uint32_t arm, const Bytes& witness) {
  SolveRequest r;
  r.cond = cond_at(s.index, file, line);
  r.target_arm = arm;
  r.witness = witness;
  RunOptions ro;
  ro.stop_at = r.cond;
  auto t = run_traced(s.program, witness, ro);
  auto sl = build_slice(s.index, t, r.cond, arm);
  r.flattened_slice = sl.flattened;
  r.prompt = build_prompt(sl.flattened, witness, roadblock_key(s.index, r.cond, arm));
  return r;
}

}  // namespace

TEST_SUITE("solver") {

TEST_CASE("encoding") {
  CHECK(encode_input(bytes(std::string("ab\0c", 4))) == "ab\\x00c");
  CHECK(encode_input(bytes("a\\b`c")) == "a\\\\b\\x60c");
  CHECK(decode_escaped("ab\\x00c") == bytes(std::string("ab\0c", 4)));
  CHECK_FALSE(decode_escaped("bad \\xZZ"));
  CHECK_FALSE(decode_escaped("dangling \\"));

  std::mt19937_64 rng(42);
  for (int i = 0; i < 2000; ++i) {
    Bytes b(rng() % 64);
    for (auto& x : b) x = static_cast<std::uint8_t>(rng());
    auto d = decode_escaped(encode_input(b));
    REQUIRE(d);
    CHECK(*d == b);
  }
}

TEST_CASE("response decoding") {
  auto one = decode_response("Here you go.\n```input\nab\\x00c\n```\nDone.");
  REQUIRE(one);
  CHECK(*one == Bytes{0x61, 0x62, 0x00, 0x63});
  CHECK_FALSE(decode_response("I think the input should start with FUZZ."));
  CHECK_FALSE(decode_response("```input\nFUZZ\n```\nor\n```input\nFUZ\n```"));
  CHECK_FALSE(decode_response("```input\n\\xq1\n```"));
  auto empty = decode_response("```input\n\n```");
  REQUIRE(empty);
  CHECK(empty->empty());
}

TEST_CASE("prompt snapshot") {
  const auto& s = cjson();
  auto seed = read_bytes(default_gauntlet_root() / "cjson-mini" / "seeds" / "seed1");
  auto r = request_for(s, "cjson.c", 24, 0, *seed);
  std::string got = "### system\n" + r.prompt.system_text + "\n### user\n" + r.prompt.user_text;
  CHECK(got == read_text_file(fixture("golden/prompt.cjson_24.txt")));
  CHECK(r.prompt.user_text.find("assert((first >= 0xD800)&&(first <= 0xDBFF));") !=
        std::string::npos);
  CHECK(r.prompt.user_text.find(encode_input(*seed)) != std::string::npos);
  CHECK(r.prompt.roadblock_key == "cjson.c:24:0");
}

TEST_CASE("empty witness still gives a well-formed prompt") {
  auto p = build_prompt("int main(void) {\n  assert(1);\n}\n", {});
  CHECK(p.user_text.find("```input\n\n```") != std::string::npos);
  CHECK(p.estimated_tokens() > 0);
}

TEST_CASE("scripted replay") {
  auto entries = ScriptedSolver::load(fixture("replay.cjson.json"));
  ScriptedSolver solver(entries, 5);
  const auto& s = cjson();
  auto seed = read_bytes(default_gauntlet_root() / "cjson-mini" / "seeds" / "seed1");
  auto r = request_for(s, "cjson.c", 24, 0, *seed);
  auto out = solver.solve(r);
  REQUIRE(out.extracted_input);
  CHECK(*out.extracted_input == bytes("ab\\n\\uD800\\uDC00"));
  // the input really takes the then arm
  auto t = run_traced(s.program, *out.extracted_input);
  bool hit = false;
  for (const auto& e : t.arm_events) hit |= e.cond == r.cond && e.arm == 0;
  CHECK(hit);
  CHECK(solver.budget_left() == 4);

  auto next = solver.solve(r);  // falls back to the "*" entry
  CHECK_FALSE(next.extracted_input);
  CHECK(next.raw_text.find("no idea") != std::string::npos);
  auto none = solver.solve(r);
  CHECK(none.raw_text.empty());
  CHECK_FALSE(none.hard_stop);
}

TEST_CASE("test budget") {
  ScriptedSolver solver({}, 0);
  SolveRequest r;
  auto out = solver.solve(r);
  CHECK(out.hard_stop);
  CHECK(solver.requests_issued() == 0);
}

TEST_CASE("bruteforce finds the single byte") {
  const auto& s = subject("kchar.c");
  BruteforceSolver solver(s.program, RunOptions{}, 5000, 3);
  auto r = request_for(s, "kchar.c", 6, 0, bytes("AAAA"));
  auto out = solver.solve(r);
  REQUIRE(out.extracted_input);
  CHECK(*out.extracted_input == bytes("AAKA"));
  auto t = run_traced(s.program, *out.extracted_input);
  CHECK(t.exit_code == 1);
  CHECK(decode_response(out.raw_text) == out.extracted_input);
}

TEST_CASE("bruteforce candidates come from the slice") {
  auto c = BruteforceSolver::candidates(
      "int main(void) {\n  assert(v * 5u == 0xA5A5A5A5u && s == \"hi\");\n}\n");
  CHECK(std::find(c.begin(), c.end(), bytes("hi")) != c.end());
  // 0xA5A5A5A5 / 5 as a little-endian u32
  Bytes le{0x21, 0x21, 0x21, 0x21};
  CHECK(std::find(c.begin(), c.end(), le) != c.end());
}

TEST_CASE("remote budget zero issues nothing") {
  fixtures::MockEndpoint mock;
  SolverConfig cfg;
  cfg.backend = BackendKind::Remote;
  cfg.endpoint = mock.url();
  cfg.query_budget = 0;
  RemoteSolver solver(cfg);
  auto out = solver.solve(SolveRequest{});
  CHECK(out.hard_stop);
  CHECK(mock.hits == 0);
}

TEST_CASE("remote request and retries") {
  fixtures::MockEndpoint mock;
  SolverConfig cfg;
  cfg.backend = BackendKind::Remote;
  cfg.endpoint = mock.url();
  cfg.api_key = "test-key";
  cfg.query_budget = 10;
  cfg.timeout_s = 5;
  RemoteSolver solver(cfg);
  SolveRequest req;
  req.prompt = build_prompt("int main(void) {\n  assert(1);\n}\n", bytes("a"));
  auto ok = solver.solve(req);
  CHECK(ok.requests == 1);
  REQUIRE(ok.extracted_input);
  CHECK(*ok.extracted_input == bytes("xyz"));

  mock.status = 500;
  auto bad = solver.solve(req);
  CHECK(bad.requests == 3);
  CHECK_FALSE(bad.error.empty());
  CHECK_FALSE(bad.extracted_input);
  CHECK(mock.hits == 4);
  CHECK(solver.budget_left() == 6);
  CHECK(solver.requests_issued() == 4);

  auto body = nlohmann::json::parse(solver.request_body(req.prompt));
  CHECK(body["model"] == "gpt-4o");
  CHECK(body["max_tokens"] == 4096);
  CHECK(body["temperature"] == doctest::Approx(0.5));
}

}
