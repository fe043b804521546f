#include <doctest.h>

#include <map>
#include <random>

#include "helpers.hpp"
#include "slicefuzz/coverage.hpp"
#include "slicefuzz/gauntlet.hpp"

using namespace testing;

namespace {

const Subject& cjson() {
  fs::path dir = default_gauntlet_root() / "cjson-mini" / "src";
  return subject({(dir / "cjson.c").string()},
                 {"-O0", "-w", "-include", (dir / "cjson_prelude.h").string()});
}

ExecutionTrace traced(const Subject& s, std::string_view in, const std::string& id) {
  auto t = run_traced(s.program, bytes(in));
  t.seed_id = id;
  return t;
}

// Interest map over three real conditionals that a seed reached without
// covering them fully.
struct ThreeConds {
  const Subject& s = subject("three_ifs_switch.c");
  CoverageAnalyzer an;
  std::vector<CondId> conds;

  explicit ThreeConds(std::uint64_t rng_seed = 7) : an(s.index, CoverageConfig{2, 1, rng_seed}) {
    an.add_trace("seed", 1, traced(s, "a", "seed"));
    for (const auto& [c, v] : an.interest()) conds.push_back(c);
  }
};

}  // namespace

TEST_SUITE("coverage") {

TEST_CASE("empty corpus") {
  const auto& s = subject("two_branch.c");
  CoverageAnalyzer an(s.index);
  auto dir = scratch("cov_empty");
  CHECK(an.analyze_corpus(dir, [](const fs::path&) { return std::nullopt; }) == 0);
  CHECK(an.report().conds.empty());
  CHECK(an.interest().empty());
  CHECK_FALSE(an.retrieve_roadblock());
}

TEST_CASE("seed reaching line 24 leaves it half covered") {
  const auto& s = cjson();
  auto seed = read_bytes(default_gauntlet_root() / "cjson-mini" / "seeds" / "seed1");
  REQUIRE(seed);
  auto t = run_traced(s.program, *seed);
  CoverageAnalyzer an(s.index);
  an.add_trace("seed1", seed->size(), t);
  CondId c24 = cond_at(s.index, "cjson.c", 24);
  REQUIRE(an.report().reached(c24));
  CHECK(an.interest().count(c24) == 1);
  CHECK(an.report().arm_covered(c24, 1));
  CHECK_FALSE(an.report().arm_covered(c24, 0));
}

TEST_CASE("arm decisions") {
  SUBCASE("then body entered") {
    const auto& s = subject("two_branch.c");
    auto pairs = covered_pairs(s.index, traced(s, "a", "x"));
    CHECK(pairs == std::set<ArmPair>{{cond_at(s.index, "two_branch.c", 5), 0}});
  }
  SUBCASE("switch takes the case 'u' arm") {
    const auto& s = cjson();
    CondId sw = cond_at(s.index, "cjson.c", 8);
    const Conditional* c = s.index.conditional(sw);
    std::uint32_t u_arm = 99;
    for (const auto& a : c->arms)
      if (a.guard_value == "'u'") u_arm = a.arm_id;
    REQUIRE(u_arm != 99);
    auto arm = covered_arm(*c, traced(s, "\\u0041", "x"), s.index);
    REQUIRE(arm);
    CHECK(*arm == u_arm);
  }
  SUBCASE("empty then body uses the recorded outcome") {
    const auto& s = subject("empty_then.c");
    CondId c = cond_at(s.index, "empty_then.c", 5);
    CHECK(covered_pairs(s.index, traced(s, "y", "x")) == std::set<ArmPair>{{c, 0}});
    CHECK(covered_pairs(s.index, traced(s, "n", "x")) == std::set<ArmPair>{{c, 1}});
  }
  SUBCASE("guard as final record is reach-only") {
    const auto& s = subject("two_branch.c");
    CondId c = cond_at(s.index, "two_branch.c", 5);
    RunOptions ro;
    ro.stop_at = c;
    auto t = run_traced(s.program, bytes("a"), ro);
    auto hits = guard_hits(s.index, t);
    REQUIRE(hits.size() == 1);
    CHECK_FALSE(hits[0].arm);
    CHECK(covered_pairs(s.index, t).empty());
  }
}

TEST_CASE("single candidate") {
  const auto& s = subject("two_branch.c");
  CoverageAnalyzer an(s.index);
  an.add_trace("seed", 1, traced(s, "a", "seed"));
  CondId c = cond_at(s.index, "two_branch.c", 5);
  REQUIRE(an.interest() == InterestMap{{c, 0}});
  auto rb = an.retrieve_roadblock();
  REQUIRE(rb);
  CHECK(rb->cond == c);
  CHECK(rb->target_arm == 1);
  CHECK(rb->seed == "seed");
  CHECK(an.interest() == InterestMap{{c, -1}});
  an.reward(c);
  CHECK(an.interest().at(c) == 1);
}

TEST_CASE("three fresh candidates are each picked once") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    ThreeConds f(seed);
    // 'a' covers one arm of each if and of the switch: keep three of them
    auto& im = f.an.mutable_interest();
    REQUIRE(im.size() == 4);
    im.erase(std::prev(im.end()));
    std::multiset<CondId> picked;
    for (int i = 0; i < 3; ++i) picked.insert(f.an.retrieve_roadblock()->cond);
    std::multiset<CondId> want;
    for (const auto& [c, v] : im) want.insert(c);
    CHECK(picked == want);
  }
}

TEST_CASE("reward arithmetic") {
  ThreeConds f;
  CondId c = f.conds[0];
  for (auto& [k, v] : f.an.mutable_interest()) v = 0;
  f.an.mutable_interest()[c] = -1;
  f.an.reward(c);
  CHECK(f.an.interest().at(c) == -1 + 2);
  f.an.mutable_interest()[c] = -1;
  f.an.reward(c);
  f.an.reward(c);
  CHECK(f.an.interest().at(c) == -1 + 2 * 2);
  CHECK(f.an.retrieve_roadblock()->cond == c);
}

TEST_CASE("rewarded conditional leaves the map once fully covered") {
  const auto& s = subject("two_branch.c");
  CoverageAnalyzer an(s.index);
  an.add_trace("a", 1, traced(s, "a", "a"));
  CondId c = cond_at(s.index, "two_branch.c", 5);
  an.retrieve_roadblock();
  an.reward(c);
  an.add_trace("b", 1, traced(s, "b", "b"));
  CHECK(an.interest().empty());
  CHECK(an.report().fully_covered(c, s.index));
}

TEST_CASE("witness is the shortest reaching seed, most recent on ties") {
  const auto& s = subject("two_branch.c");
  CoverageAnalyzer an(s.index);
  an.add_trace("long", 3, traced(s, "aaa", "long"));
  an.add_trace("short1", 1, traced(s, "a", "short1"));
  an.add_trace("short2", 1, traced(s, "c", "short2"));
  an.add_trace("longer", 4, traced(s, "aaaa", "longer"));
  CHECK(an.choose_witness(cond_at(s.index, "two_branch.c", 5)) == "short2");
}

TEST_CASE("analyze_corpus skips seeds already seen") {
  const auto& s = subject("two_branch.c");
  auto dir = scratch("cov_incremental");
  write_file_atomic(dir / "id:000000,orig:a", bytes("a"));
  int calls = 0;
  auto provider = [&](const fs::path& p) -> std::optional<ExecutionTrace> {
    ++calls;
    auto t = run_traced(s.program, *read_bytes(p));
    t.seed_id = p.filename().string();
    return t;
  };
  CoverageAnalyzer an(s.index);
  CHECK(an.analyze_corpus(dir, provider) == 1);
  CHECK(an.analyze_corpus(dir, provider) == 0);
  write_file_atomic(dir / "id:000001,src:000000,op:flip", bytes("b"));
  CHECK(an.analyze_corpus(dir, provider) == 1);
  CHECK(calls == 2);
  CHECK(an.report().arms_covered() == 2);
}

TEST_CASE("gauntlet seed sets match the independent oracle") {
  for (const auto& gc : load_gauntlet(default_gauntlet_root())) {
    CAPTURE(gc.name);
    auto cfg = load_config(gc.config);
    auto sub = build_subject(cfg.subject, scratch("cov_oracle_" + gc.name));
    std::vector<ExecutionTrace> traces;
    CoverageAnalyzer an(sub->index);
    for (const auto& e : fs::directory_iterator(cfg.seeds)) {
      auto t = run_traced(sub->program, *read_bytes(e.path()), run_options(cfg));
      t.seed_id = e.path().filename().string();
      an.add_trace(t.seed_id, fs::file_size(e.path()), t);
      traces.push_back(std::move(t));
    }
    auto oracle = oracle_coverage(sub->program.guards, traces);
    CHECK(an.report().pairs() == oracle.covered);
    std::set<CondId> reached;
    for (const auto& [c, cc] : an.report().conds) reached.insert(c);
    CHECK(reached == oracle.reached);
  }
}

}
