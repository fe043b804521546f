#include <doctest.h>

#include <algorithm>

#include "helpers.hpp"
#include "slicefuzz/c_parser.hpp"
#include "slicefuzz/gauntlet.hpp"
#include "slicefuzz/slicer.hpp"

using namespace testing;

namespace {

const Subject& cjson() {
  fs::path dir = default_gauntlet_root() / "cjson-mini" / "src";
  return subject({(dir / "cjson.c").string()},
                 {"-O0", "-w", "-include", (dir / "cjson_prelude.h").string()});
}

Slice slice_of(const Subject& s, const std::string& file, std::uint32_t line,
               std::uint32_t arm, const Bytes& input) {
  CondId c = cond_at(s.index, file, line);
  RunOptions ro;
  ro.stop_at = c;
  auto t = run_traced(s.program, input, ro);
  REQUIRE(t.truncated_at);
  return build_slice(s.index, t, c, arm);
}

std::set<std::uint32_t> lines(const Slice& sl) {
  std::set<std::uint32_t> out;
  for (const auto& r : sl.statements) out.insert(r.line);
  return out;
}

std::size_t count(std::string_view hay, std::string_view needle) {
  std::size_t n = 0;
  for (auto p = hay.find(needle); p != std::string_view::npos; p = hay.find(needle, p + 1)) ++n;
  return n;
}

}  // namespace

TEST_SUITE("slicer") {

TEST_CASE("assertions") {
  const auto& cj = cjson();
  const Conditional* c24 = cj.index.conditional(cond_at(cj.index, "cjson.c", 24));
  CHECK(negate_condition(cj.index, *c24, 1) ==
        "assert(!(((first >= 0xD800)&&(first <= 0xDBFF))));");
  CHECK(negate_condition(cj.index, *c24, 0) == "assert((first >= 0xD800)&&(first <= 0xDBFF));");

  const auto& gt = subject("cmp_gt.c");
  const Conditional* g = gt.index.conditional(cond_at(gt.index, "cmp_gt.c", 5));
  CHECK(negate_condition(gt.index, *g, 0) == "assert(x>0);");

  const auto& ab = subject("switch_ab.c");
  const Conditional* sw = ab.index.conditional(cond_at(ab.index, "switch_ab.c", 5));
  REQUIRE(sw->arms.size() == 3);
  CHECK(negate_condition(ab.index, *sw, 2) == "assert(ch != 'a' && ch != 'b');");
  CHECK(negate_condition(ab.index, *sw, 1) == "assert((ch) == 'b');");
  CHECK_THROWS_AS(negate_condition(ab.index, *sw, 3), SliceError);
}

TEST_CASE("guard variables") {
  const auto& cj = cjson();
  auto vars = [&](std::uint32_t line, const Subject& s, const char* file) {
    return get_vars(s.index, *s.index.conditional(cond_at(s.index, file, line)));
  };
  CHECK(vars(24, cj, "cjson.c") == std::vector<std::string>{"first"});
  CHECK(vars(33, cj, "cjson.c") == std::vector<std::string>{"first_seq"});
  CHECK(vars(3, subject("if_literal.c"), "if_literal.c").empty());
}

TEST_CASE("cjson roadblock at 24, else arm") {
  const auto& s = cjson();
  auto seed = read_bytes(default_gauntlet_root() / "cjson-mini" / "witness" / "pair");
  REQUIRE(seed);
  Slice sl = slice_of(s, "cjson.c", 24, 1, *seed);
  auto ls = lines(sl);
  CHECK(ls.count(3));
  CHECK(ls.count(21));
  for (std::uint32_t l = 26; l <= 34; ++l) CHECK_FALSE(ls.count(l));
  const std::string& out = sl.flattened;
  CHECK(out.find("int main(void) {") != std::string::npos);
  CHECK(out.find("unsigned char utf16_literal_to_utf8(const char *first_seq, const char "
                 "*input_end) {") != std::string::npos);
  CHECK(out.find("char input[S + 2] = {0};") != std::string::npos);
  CHECK(out.find("unsigned int first = 0, second = 0;") != std::string::npos);
  CHECK(out.find("size_t n = fread(input, sizeof(char), S, stdin);") != std::string::npos);
  CHECK(out.find("first = parse_hex4(first_seq + 2);") != std::string::npos);
  CHECK(out.find("while (input_ptr < input_end) {") != std::string::npos);
  CHECK(out.find("assert(!(((first >= 0xD800)&&(first <= 0xDBFF))));") != std::string::npos);
  CHECK(out.find("second_seq") == std::string::npos);
  CHECK(out.find("memcmp") == std::string::npos);
}

TEST_CASE("independent statement is left out") {
  const auto& s = subject("straight_xy.c");
  Slice sl = slice_of(s, "straight_xy.c", 4, 1, {});
  CHECK(lines(sl) == std::set<std::uint32_t>{2});
  CHECK(sl.flattened.find("int y = 2;") == std::string::npos);
  CHECK(sl.flattened.find("assert(!((x > 0)));") != std::string::npos);
}

TEST_CASE("loop accumulator keeps every iteration, prints the line once") {
  const auto& s = subject("loop_sum.c");
  Slice sl = slice_of(s, "loop_sum.c", 9, 0, bytes("abcdefgh"));
  std::size_t sum_positions = 0;
  CondId c = cond_at(s.index, "loop_sum.c", 9);
  RunOptions ro;
  ro.stop_at = c;
  auto t = run_traced(s.program, bytes("abcdefgh"), ro);
  for (auto p : sl.trace.positions) sum_positions += t.records[p].line == 8;
  CHECK(sum_positions == 8);
  std::size_t sum_ranges = 0;
  for (const auto& r : sl.ranges) sum_ranges += r.start_line == 8 && r.end_line == 8;
  CHECK(sum_ranges == 1);
  CHECK(count(sl.flattened, "sum += input[i];") == 1);
}

TEST_CASE("global declared in another file") {
  const auto& s = subject(std::vector<std::string>{"global_use.c", "global_def.c"});
  Slice sl = slice_of(s, "global_use.c", 7, 0, bytes("a"));
  CHECK(sl.flattened.find("// file: global_def.c") != std::string::npos);
  CHECK(sl.flattened.find("int g = 3;") != std::string::npos);
  CHECK(sl.flattened.find("unused_counter") == std::string::npos);
}

TEST_CASE("context of a nested statement") {
  const auto& s = subject("nested.c");
  auto n = s.index.node_at(0, 7, 0);
  REQUIRE(n);
  auto ctx = get_context(s.index, *n);
  std::string text;
  for (const auto& r : ctx) text += std::string(s.index.file(0).text(r)) + "|";
  CHECK(text.find("while ((c = getchar()) != EOF)") != std::string::npos);
  CHECK(text.find("if (c == '#')") != std::string::npos);
  CHECK(text.find("int main(void)") != std::string::npos);
  CHECK(std::count(text.begin(), text.end(), '}') >= 3);

  auto top = s.index.node_at(0, 4, 0);
  REQUIRE(top);
  std::string t2;
  for (const auto& r : get_context(s.index, *top)) t2 += std::string(s.index.file(0).text(r));
  CHECK(t2.find("int main(void) {") != std::string::npos);
  CHECK(t2.find("while") == std::string::npos);
}

TEST_CASE("contiguous function prints verbatim") {
  const auto& s = subject("contiguous.c");
  Slice sl = slice_of(s, "contiguous.c", 6, 0, bytes("d"));
  CHECK(sl.flattened ==
        "// file: contiguous.c\n"
        "int main(void) {\n"
        "  int x = getchar();\n"
        "  int y = x * 3;\n"
        "  assert(y == 300);\n"
        "  /* ... */\n"
        "}\n");
}

TEST_CASE("disjoint ranges get one marker between them") {
  const auto& s = subject("disjoint.c");
  Slice sl = slice_of(s, "disjoint.c", 9, 0, bytes("a"));
  auto a = sl.flattened.find("int a = getchar();");
  auto d = sl.flattened.find("int d = a + 1;");
  REQUIRE(a != std::string::npos);
  REQUIRE(d != std::string::npos);
  CHECK(count(sl.flattened.substr(a, d - a), kElision) == 1);
  CHECK(sl.flattened == read_text_file(fixture("golden/disjoint.slice.txt")));
}

TEST_CASE("flattened slices re-parse") {
  const auto& s = cjson();
  auto seed = read_bytes(default_gauntlet_root() / "cjson-mini" / "witness" / "pair");
  Slice sl = slice_of(s, "cjson.c", 33, 0, *seed);
  auto src = std::make_shared<SourceFile>(0, "flat.c", sl.flattened);
  auto ix = AstIndex::build(std::vector<SourcePtr>{src});
  CHECK(ix.warnings().empty());
  CHECK(sl.flattened.find("assert(!memcmp(first_seq, \"\\\\uDB16\\\\uDC06\", 12));") !=
        std::string::npos);
}

TEST_CASE("oversized slices shrink") {
  const auto& s = subject("commented.c");
  CondId c = cond_at(s.index, "commented.c", 9);
  RunOptions ro;
  ro.stop_at = c;
  auto t = run_traced(s.program, bytes("abc"), ro);
  Slice full = build_slice(s.index, t, c, 0);
  REQUIRE(full.flattened.find("on purpose") != std::string::npos);
  Slice small = build_slice(s.index, t, c, 0, SliceOptions{full.flattened.size() - 40});
  CHECK(small.shrunk);
  CHECK(small.flattened.find("on purpose") == std::string::npos);
  CHECK(small.flattened.find("assert(acc == 300);") != std::string::npos);
  CHECK_THROWS_AS(build_slice(s.index, t, c, 0, SliceOptions{40}), SliceError);
}

TEST_CASE("slice of the surrogate guard keeps the decoder") {
  const auto& s = cjson();
  auto seed = read_bytes(default_gauntlet_root() / "cjson-mini" / "witness" / "pair");
  CondId c = cond_at(s.index, "cjson.c", 33);
  RunOptions ro;
  ro.stop_at = c;
  auto t = run_traced(s.program, *seed, ro);
  Slice sl = build_slice(s.index, t, c, 0);
  CHECK(sl.flattened.find("first = parse_hex4(first_seq + 2);") != std::string::npos);
  CHECK(sl.flattened.find("memcpy(digits, hex, 4);") != std::string::npos);
}

}
