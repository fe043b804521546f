#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <regex>
#include <sstream>

#include "helpers.hpp"
#include "slicefuzz/ast_index.hpp"
#include "slicefuzz/gauntlet.hpp"

using namespace testing;

namespace {

AstIndex index_of(const std::vector<fs::path>& files) {
  std::vector<std::string> p;
  for (const auto& f : files) p.push_back(f.string());
  return AstIndex::build(p);
}

fs::path cjson_src() { return default_gauntlet_root() / "cjson-mini" / "src" / "cjson.c"; }

// Arm count from the raw text alone: two per if, one per case label plus the
// implicit default of a switch that has none.
std::vector<std::size_t> grep_arm_counts(const fs::path& p) {
  std::ifstream f(p);
  std::stringstream ss;
  ss << f.rdbuf();
  std::string text = ss.str();
  auto count = [&](const std::string& re) {
    std::regex r(re);
    return static_cast<std::size_t>(
        std::distance(std::sregex_iterator(text.begin(), text.end(), r), std::sregex_iterator()));
  };
  std::vector<std::size_t> out(count(R"(\bif\s*\()"), 2);
  std::size_t switches = count(R"(\bswitch\s*\()");
  REQUIRE(switches == 1);
  out.push_back(count(R"(\bcase\b)") + (count(R"(\bdefault\s*:)") ? 0 : 1));
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST_SUITE("ast_index") {

TEST_CASE("cjson guard at line 24 is a two-armed if") {
  auto ix = index_of({cjson_src()});
  const Conditional* c = ix.conditional_at(0, 24);
  REQUIRE(c);
  CHECK(c->kind == CondKind::If);
  CHECK(c->arms.size() == 2);
  CHECK(c->guard_line == 24);
  auto guard = std::string(ix.file(0).text(c->guard_range));
  CHECK(guard == "((first >= 0xD800)&&(first <= 0xDBFF))");
}

TEST_CASE("empty file has no conditionals") {
  auto dir = scratch("ast_empty");
  std::ofstream(dir / "empty.c").close();
  auto ix = index_of({dir / "empty.c"});
  CHECK(ix.conditionals().empty());
}

TEST_CASE("three ifs and a switch") {
  auto p = fixture_src("three_ifs_switch.c");
  auto ix = index_of({p});
  CHECK(ix.file(0).line_count() == 30);
  std::vector<std::size_t> counts;
  for (const auto& [id, c] : ix.conditionals()) counts.push_back(c.arms.size());
  std::sort(counts.begin(), counts.end());
  CHECK(counts == std::vector<std::size_t>{2, 2, 2, 5});
  CHECK(counts == grep_arm_counts(p));
  const Conditional* sw = ix.conditional_at(0, 14);
  REQUIRE(sw);
  CHECK(sw->kind == CondKind::Switch);
  CHECK(sw->arms.back().kind == ArmKind::Default);
  CHECK(sw->arms.back().synthetic);
}

TEST_CASE("conditional lookup by line") {
  auto ix = index_of({cjson_src()});
  CHECK(ix.conditional_at(0, 24)->cond_id == ix.conditional_at(0, 24)->cond_id);
  CHECK(ix.conditional_at(0, 25) == nullptr);
  CHECK(ix.conditional_at(0, 43) == nullptr);

  auto ml = index_of({fixture_src("multiline_guard.c")});
  const Conditional* a = ml.conditional_at(0, 22);
  const Conditional* b = ml.conditional_at(0, 23);
  REQUIRE(a);
  REQUIRE(b);
  CHECK(a->cond_id == b->cond_id);
  CHECK(a->guard_line == 22);
}

TEST_CASE("declaration lookup") {
  auto ix = index_of({cjson_src()});
  const FunctionInfo* f = ix.function("utf16_literal_to_utf8");
  REQUIRE(f);
  FileRange at = ix.file(0).range(ix.file(0).line_start(24), ix.file(0).line_start(24) + 4);
  auto d = ix.resolve_declaration("first", at);
  REQUIRE(d);
  CHECK(d->start_line == 20);
  CHECK(f->range.contains(*d));
  CHECK_FALSE(ix.resolve_declaration("no_such_name", at));

  auto sh = index_of({fixture_src("shadow.c")});
  const auto& file = sh.file(0);
  FileRange use = file.range(file.line_start(7), file.line_end(7));
  auto local = sh.resolve_declaration("level", use);
  REQUIRE(local);
  CHECK(local->start_line == 6);
  FileRange top = file.range(file.line_start(3), file.line_end(3));
  auto global = sh.resolve_declaration("level", top);
  REQUIRE(global);
  CHECK(global->start_line == 3);
}

TEST_CASE("node reads and writes") {
  auto ix = index_of({fixture_src("straight_xy.c")});
  auto n = ix.node_at(0, 2, 0);
  REQUIRE(n);
  const auto& node = ix.node(*n);
  REQUIRE(node.writes.size() == 1);
  CHECK(node.writes[0].name == "x");
  auto g = ix.node_at(0, 4, 0);
  REQUIRE(g);
  CHECK(ix.node(*g).kind == NodeKind::Guard);
  REQUIRE(ix.node(*g).reads.size() == 1);
  CHECK(ix.node(*g).reads[0].name == "x");
}

TEST_CASE("functions and params") {
  auto ix = index_of({cjson_src()});
  const FunctionInfo* f = ix.function("parse_hex4");
  REQUIRE(f);
  REQUIRE(f->params.size() == 1);
  CHECK(ix.declarations().at(f->params[0]).name == "hex");
  CHECK(ix.declarations().at(f->params[0]).is_pointer);
  CHECK(f->entry_node >= 0);
  CHECK(ix.node(f->entry_node).line == 42);
}

TEST_CASE("dump is valid json listing every conditional") {
  auto ix = index_of({fixture_src("three_ifs_switch.c")});
  auto j = ix.dump_json();
  CHECK(j.front() == '[');
  CHECK(std::count(j.begin(), j.end(), '{') >= 4);
}

}
