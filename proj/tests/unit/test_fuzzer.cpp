#include <doctest.h>

#include <regex>

#include "helpers.hpp"
#include "slicefuzz/fuzzer.hpp"
#include "slicefuzz/gauntlet.hpp"

using namespace testing;

namespace {

std::vector<std::string> queue_names(const Corpus& c) {
  std::vector<std::string> out;
  for (const auto& e : fs::directory_iterator(c.queue_dir()))
    out.push_back(e.path().filename().string());
  std::sort(out.begin(), out.end());
  return out;
}

fs::path seed_file(const fs::path& dir, const std::string& name, std::string_view data) {
  fs::create_directories(dir);
  write_file_atomic(dir / name, bytes(data));
  return dir / name;
}

}  // namespace

TEST_SUITE("fuzzer") {

TEST_CASE("seed names") {
  CHECK(seed_name(7, "src:000001,op:flip") == "id:000007,src:000001,op:flip");
  CHECK(seed_name(12) == "id:000012");
  CHECK(parse_seed_id("id:000042,sync:llm,src:000003") == 42u);
  CHECK_FALSE(parse_seed_id("README"));
}

TEST_CASE("children are kept only for new arms") {
  const auto& s = subject("two_branch.c");
  auto dir = scratch("fuzz_two_branch");
  Corpus corpus(dir / "out");
  LogicalClock clock;
  Fuzzer f(s.program, RunOptions{}, corpus, FuzzerConfig{3, true, 1.0, 64}, clock);
  f.load_initial({seed_file(dir / "seeds", "even", "b")});
  CHECK(f.covered().size() == 1);
  int kept = 0;
  for (int i = 0; i < 2000 && f.covered().size() < 2; ++i) kept += f.fuzz_step().has_value();
  REQUIRE(f.covered().size() == 2);
  CHECK(kept == 1);
  for (int i = 0; i < 200; ++i) CHECK_FALSE(f.fuzz_step());
  auto names = queue_names(corpus);
  REQUIRE(names.size() == 2);
  CHECK(names[0] == "id:000000,orig:even");
  CHECK(std::regex_match(names[1], std::regex(R"(id:000001,src:000000,op:[a-z]+)")));
  CHECK(f.execs() >= 201);
}

TEST_CASE("escape inserted by mutation reaches the unicode case") {
  fs::path src = default_gauntlet_root() / "cjson-mini" / "src";
  const auto& s = subject({(src / "cjson.c").string()},
                          {"-O0", "-w", "-include", (src / "cjson_prelude.h").string()});
  auto dir = scratch("fuzz_cjson");
  Corpus corpus(dir / "out");
  LogicalClock clock;
  Fuzzer f(s.program, RunOptions{}, corpus, FuzzerConfig{5, true, 1.0, 64}, clock);
  f.load_initial({seed_file(dir / "seeds", "plain", "ab\\nxyzw")});
  CondId sw = cond_at(s.index, "cjson.c", 8);
  std::uint32_t u_arm = 0;
  for (const auto& a : s.index.conditional(sw)->arms)
    if (a.guard_value == "'u'") u_arm = a.arm_id;
  REQUIRE_FALSE(f.covered().count({sw, u_arm}));
  std::optional<SeedEntry> hit;
  for (int i = 0; i < 20000 && !hit; ++i) {
    auto e = f.fuzz_step();
    if (e && e->fingerprint.count({sw, u_arm})) hit = e;
  }
  REQUIRE(hit);
  auto data = read_bytes(hit->path);
  REQUIRE(data);
  CHECK(bytes_to_string(*data).find("\\u") != std::string::npos);
}

TEST_CASE("crashes go to their own directory") {
  const auto& s = subject("crash.c");
  auto dir = scratch("fuzz_crash");
  Corpus corpus(dir / "out");
  LogicalClock clock;
  Fuzzer f(s.program, RunOptions{}, corpus, FuzzerConfig{1, true, 1.0, 64}, clock);
  f.load_initial({seed_file(dir / "seeds", "w", "W")});
  for (int i = 0; i < 20000 && f.crashes() == 0; ++i) f.fuzz_step();
  REQUIRE(f.crashes() == 1);
  std::size_t n = 0;
  for (const auto& e : fs::directory_iterator(corpus.crash_dir())) {
    ++n;
    CHECK(read_bytes(e.path())->at(0) == 'X');
  }
  CHECK(n == 1);
}

TEST_CASE("plateau") {
  const auto& s = subject("two_branch.c");
  auto dir = scratch("fuzz_plateau");
  Corpus corpus(dir / "out");
  LogicalClock clock(0.0);
  Fuzzer f(s.program, RunOptions{}, corpus, FuzzerConfig{1, false, 1.0, 64}, clock);
  f.load_initial({seed_file(dir / "seeds", "even", "b")});
  CHECK_FALSE(f.plateau());
  clock.advance(1.5);
  CHECK(f.plateau());

  SUBCASE("kept import resets the clock") {
    corpus.inject(bytes("a"));
    auto r = f.sync();
    REQUIRE(r.size() == 1);
    CHECK(r[0].kept);
    CHECK_FALSE(f.plateau());
    CHECK(f.last_find() == doctest::Approx(1.5));
  }
  SUBCASE("discarded import does not") {
    corpus.inject(bytes("d"));
    auto r = f.sync();
    REQUIRE(r.size() == 1);
    CHECK_FALSE(r[0].kept);
    CHECK(f.plateau());
  }
}

TEST_CASE("imports") {
  const auto& s = subject("switch10.c");
  auto dir = scratch("fuzz_import");
  Corpus corpus(dir / "out");
  LogicalClock clock;
  Fuzzer f(s.program, RunOptions{}, corpus, FuzzerConfig{1, false, 1.0, 64}, clock);
  f.load_initial({seed_file(dir / "seeds", "a", "a")});
  auto before = queue_names(corpus).size();

  auto dup = corpus.inject(bytes("a"));
  auto other = corpus.inject(bytes("e"));  // not the arm anyone asked for, still new
  CHECK_FALSE(corpus.import_outcome(dup));
  auto r = f.sync();
  REQUIRE(r.size() == 2);
  CHECK_FALSE(r[0].kept);
  CHECK(r[1].kept);
  CHECK(r[1].new_pairs.size() == 1);
  CHECK(corpus.import_outcome(dup) == false);
  CHECK(corpus.import_outcome(other) == true);
  CHECK(corpus.synced_upto() == other);
  auto names = queue_names(corpus);
  CHECK(names.size() == before + 1);
  CHECK(names.back() == "id:000001,sync:llm,src:000001");
  CHECK(f.sync().empty());
}

TEST_CASE("resume picks up the queue") {
  const auto& s = subject("two_branch.c");
  auto dir = scratch("fuzz_resume");
  {
    Corpus corpus(dir / "out");
    LogicalClock clock;
    Fuzzer f(s.program, RunOptions{}, corpus, FuzzerConfig{3, true, 1.0, 64}, clock);
    f.load_initial({seed_file(dir / "seeds", "even", "b")});
    for (int i = 0; i < 2000 && f.covered().size() < 2; ++i) f.fuzz_step();
    REQUIRE(f.covered().size() == 2);
  }
  Corpus corpus(dir / "out");
  LogicalClock clock;
  Fuzzer f(s.program, RunOptions{}, corpus, FuzzerConfig{3, true, 1.0, 64}, clock);
  f.resume();
  CHECK(f.seeds().size() == 2);
  CHECK(f.covered().size() == 2);
  CHECK(corpus.next_id() == 2);
  CHECK(f.seeds()[0].origin == SeedOrigin::Initial);
  CHECK(f.seeds()[1].origin == SeedOrigin::Mutation);
}

TEST_CASE("stats files") {
  const auto& s = subject("two_branch.c");
  auto dir = scratch("fuzz_stats");
  Corpus corpus(dir / "out");
  LogicalClock clock;
  Fuzzer f(s.program, RunOptions{}, corpus, FuzzerConfig{3, true, 1.0, 64}, clock);
  f.load_initial({seed_file(dir / "seeds", "even", "b")});
  f.write_stats();
  auto tsv = read_text_file(dir / "out" / "main" / "stats.tsv");
  CHECK(tsv.rfind("elapsed_s\texecs\tkept\tarms_covered\n", 0) == 0);
  auto stats = read_text_file(dir / "out" / "main" / "fuzzer_stats");
  CHECK(stats.find("arms_covered") != std::string::npos);
  CHECK(stats.find("execs_done") != std::string::npos);
}

}
