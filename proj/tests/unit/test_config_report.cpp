#include <doctest.h>

#include <cstdlib>
#include <fstream>

#include <nlohmann/json.hpp>

#include "helpers.hpp"
#include "slicefuzz/config.hpp"
#include "slicefuzz/report.hpp"

using namespace testing;

namespace {

AttemptRecord rec(int n, AttemptOutcome o, double pipeline, double solve) {
  AttemptRecord r;
  r.attempt = n;
  r.cond_id = "0:10";
  r.location = "t.c:3";
  r.seed = "id:000000,orig:a";
  r.outcome = o;
  r.pipeline_latency_s = pipeline;
  r.solve_latency_s = solve;
  return r;
}

}  // namespace

TEST_SUITE("config") {

TEST_CASE("parse with defaults and relative paths") {
  auto cfg = parse_config(R"(
[subject]
sources = ["src/a.c"]
cflags = ["-O0", "-Iinc", "-include", "pre.h"]

[campaign]
seeds = "seeds"
mode = "single"
plateau_s = 1.5

[solver]
backend = "bruteforce"
test_budget = 7
)",
                          "/base");
  CHECK(cfg.subject.sources == std::vector<fs::path>{"/base/src/a.c"});
  CHECK(cfg.subject.cflags ==
        std::vector<std::string>{"-O0", "-I/base/inc", "-include", "/base/pre.h"});
  CHECK(cfg.seeds == "/base/seeds");
  CHECK(cfg.output == "/base/out");
  CHECK(cfg.mode == CampaignMode::Single);
  CHECK(cfg.clock == ClockKind::Logical);
  CHECK(cfg.plateau_s == 1.5);
  CHECK(cfg.solver.backend == BackendKind::Bruteforce);
  CHECK(cfg.solver.test_budget == 7);
  CHECK(cfg.solver.query_budget == 3000);
  CHECK(cfg.solver.max_tokens == 4096);
  CHECK(cfg.solver.temperature == 0.5);
  CHECK(cfg.trace_cap == 1'000'000);
}

TEST_CASE("built-in defaults") {
  auto cfg = parse_config("[subject]\nsources = [\"a.c\"]\n", "/x");
  CHECK(cfg.plateau_s == 90.0);
  CHECK(cfg.mode == CampaignMode::Threaded);
  CHECK(cfg.clock == ClockKind::Wall);
}

TEST_CASE("errors") {
  CHECK_THROWS_AS(parse_config("[subject]\nsources = []\n", "/x"), ConfigError);
  CHECK_THROWS_AS(parse_config("[campaign]\nseeds = \"s\"\n", "/x"), ConfigError);
  CHECK_THROWS_AS(parse_config("[subject]\nsources = [\"a.c\"]\nbogus = 1\n", "/x"), ConfigError);
  CHECK_THROWS_AS(parse_config("[subject]\nsources = [\"a.c\"]\n[campaign]\nmode = \"fast\"\n", "/x"),
                  ConfigError);
  CHECK_THROWS_AS(parse_config("not toml = = =", "/x"), ConfigError);
  CHECK_NOTHROW(parse_config("[subject]\nsources = [\"a.c\"]\n[notes]\nanything = 1\n", "/x"));
  auto missing = parse_config("[subject]\nsources = [\"/nonexistent/a.c\"]\n", "/x");
  CHECK_THROWS_AS(validate_config(missing), ConfigError);
}

TEST_CASE("environment credentials") {
  setenv("SOLVER_ENDPOINT", "http://127.0.0.1:9/v1/chat/completions", 1);
  setenv("SOLVER_API_KEY", "k", 1);
  auto cfg = parse_config("[subject]\nsources = [\"a.c\"]\n[solver]\nbackend = \"remote\"\n", "/x");
  unsetenv("SOLVER_ENDPOINT");
  unsetenv("SOLVER_API_KEY");
  CHECK(cfg.solver.endpoint == "http://127.0.0.1:9/v1/chat/completions");
  CHECK(cfg.solver.api_key == "k");
  CHECK(config_json(cfg).find("\"k\"") == std::string::npos);
}

}

TEST_SUITE("report") {

TEST_CASE("median") {
  CHECK(median({}) == 0.0);
  CHECK(median({3.0}) == 3.0);
  CHECK(median({5.0, 1.0, 4.0}) == 4.0);
  CHECK(median({4.0, 1.0, 3.0, 2.0}) == 2.5);
}

TEST_CASE("latency summary skips skipped attempts") {
  CampaignMetrics m;
  m.attempts = {rec(1, AttemptOutcome::Kept, 0.2, 0.9), rec(2, AttemptOutcome::Skipped, 9.0, 9.0),
                rec(3, AttemptOutcome::Discarded, 0.1, 0.3),
                rec(4, AttemptOutcome::DecodeFailed, 0.4, 0.5),
                rec(5, AttemptOutcome::Skipped, 8.0, 8.0)};
  auto j = nlohmann::json::parse(summary_json(m));
  // non-skipped solve latencies are 0.9, 0.3, 0.5
  CHECK(j["solve_latency_s"]["median"].get<double>() == doctest::Approx(0.5));
  CHECK(j["solve_latency_s"]["count"] == 3);
  CHECK(j["pipeline_latency_s"]["median"].get<double>() == doctest::Approx(0.2));
  CHECK(j["outcomes"]["skipped"] == 2);
  CHECK(j["outcomes"]["kept"] == 1);
}

TEST_CASE("effective ratio") {
  CampaignMetrics m;
  CHECK(nlohmann::json::parse(summary_json(m))["effective_ratio"].is_null());
  m.injected = 10;
  m.kept = 3;
  CHECK(nlohmann::json::parse(summary_json(m))["effective_ratio"].get<double>() == 0.3);
}

TEST_CASE("zero attempts give a header-only csv") {
  auto dir = scratch("report_empty");
  emit_report(CampaignMetrics{}, dir);
  CHECK(read_text_file(dir / "roadblocks.csv") ==
        "attempt,cond_id,location,arm,seed,slice_bytes,pipeline_latency_s,solve_latency_s,"
        "outcome,elapsed_s,note\n");
  CHECK(fs::exists(dir / "summary.json"));
  CHECK(fs::exists(dir / "coverage_over_time.csv"));
}

TEST_CASE("csv round trip") {
  auto dir = scratch("report_rt");
  CampaignMetrics m;
  m.attempts = {rec(1, AttemptOutcome::Kept, 0.25, 0.5), rec(2, AttemptOutcome::Skipped, 0, 0)};
  m.attempts[1].note = "guard not reached, \"quoted\"";
  m.coverage = {{0.0, 1}, {1.5, 3}};
  emit_report(m, dir);
  auto back = read_roadblocks_csv(dir / "roadblocks.csv");
  REQUIRE(back.size() == 2);
  CHECK(back[0].seed == "id:000000,orig:a");
  CHECK(back[1].note == m.attempts[1].note);
  CHECK(back[0].outcome == AttemptOutcome::Kept);
  CHECK(back[0].pipeline_latency_s == doctest::Approx(0.25));
  auto cov = read_coverage_csv(dir / "coverage_over_time.csv");
  REQUIRE(cov.size() == 2);
  CHECK(cov[1].arms == 3);
  CHECK(roadblocks_csv(m.attempts, false).find("latency") == std::string::npos);
}

}
