#include "slicefuzz/slicer.hpp"

#include <algorithm>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "slicefuzz/c_parser.hpp"
#include "slicefuzz/lexer.hpp"

namespace slicefuzz {

namespace {

bool is_blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
           c == '\v';
  });
}

bool single_token(std::string_view text) {
  auto lx = lex_c(text);
  return lx.errors.empty() && lx.tokens.size() == 2;
}

std::string guard_text(const AstIndex& ix, const Conditional& c) {
  const SourceFile& f = ix.file(c.cond_id.file_id);
  if (c.kind == CondKind::For)
    return fmt::format("({})", f.text(c.expr_range));
  return std::string(f.text(c.guard_range));
}

}  // namespace

std::string negate_condition(const AstIndex& ix, const Conditional& cond,
                             std::uint32_t target_arm) {
  if (target_arm >= cond.arms.size())
    throw SliceError(fmt::format("conditional {} has no arm {}",
                                 cond.cond_id.str(), target_arm));
  const Arm& arm = cond.arms[target_arm];
  const SourceFile& f = ix.file(cond.cond_id.file_id);
  switch (arm.kind) {
    case ArmKind::Then:
    case ArmKind::LoopBody:
      return fmt::format("assert{};", guard_text(ix, cond));
    case ArmKind::Else:
    case ArmKind::LoopExit:
      return fmt::format("assert(!({}));", guard_text(ix, cond));
    case ArmKind::Case:
      return fmt::format("assert(({}) == {});", f.text(cond.expr_range),
                         arm.guard_value.value_or("0"));
    case ArmKind::Default: {
      std::string e(f.text(cond.expr_range));
      if (!single_token(e)) e = "(" + e + ")";
      std::string conj;
      for (const auto& a : cond.arms) {
        if (a.kind != ArmKind::Case || !a.guard_value) continue;
        if (!conj.empty()) conj += " && ";
        conj += fmt::format("{} != {}", e, *a.guard_value);
      }
      if (conj.empty()) conj = "1";
      return fmt::format("assert({});", conj);
    }
  }
  return {};
}

std::vector<std::string> get_vars(const AstIndex& ix, const Conditional& cond) {
  return get_vars(ix.file(cond.cond_id.file_id).text(cond.expr_range), &ix);
}

std::vector<FileRange> get_context(const AstIndex& ix, std::uint32_t node) {
  return ix.node(node).context;
}

// ---- flattening ----

namespace {

FileRange whole_lines(const SourceFile& f, FileRange r) {
  const std::string& s = f.content();
  std::uint32_t ls = f.line_start(r.start_line);
  if (ls <= r.start_byte && is_blank(std::string_view(s).substr(ls, r.start_byte - ls)))
    r.start_byte = ls;
  std::uint32_t le = f.line_end(r.end_line);
  if (r.end_byte > 0 && s[r.end_byte - 1] == '\n') return f.range(r.start_byte, r.end_byte);
  if (le >= r.end_byte &&
      is_blank(std::string_view(s).substr(r.end_byte, le - r.end_byte)))
    r.end_byte = std::min<std::uint32_t>(le + 1, static_cast<std::uint32_t>(s.size()));
  return f.range(r.start_byte, r.end_byte);
}

struct Piece {
  std::uint32_t start = 0;
  std::uint32_t end = 0;
  std::optional<std::string> text;  // replacement or inserted text
};

std::string leading_indent(std::string_view gap) {
  // indentation of the first line of `gap` holding non-blank text
  std::size_t i = 0;
  while (i < gap.size()) {
    std::size_t nl = gap.find('\n', i);
    std::string_view line = gap.substr(i, nl == std::string_view::npos ? gap.npos : nl - i);
    if (!is_blank(line)) {
      std::size_t k = line.find_first_not_of(" \t");
      return std::string(line.substr(0, k));
    }
    if (nl == std::string_view::npos) break;
    i = nl + 1;
  }
  return {};
}

void append_gap(std::string& out, std::string_view gap) {
  if (is_blank(gap)) {
    out += gap;
    return;
  }
  std::size_t first = gap.find_first_not_of(" \t\r\n");
  std::size_t last = gap.find_last_not_of(" \t\r\n");
  bool nl_before = gap.substr(0, first).find('\n') != std::string_view::npos;
  bool nl_after = gap.substr(last).find('\n') != std::string_view::npos;
  if (nl_before || (!out.empty() && out.back() == '\n')) {
    if (out.empty() || out.back() != '\n') out += '\n';
    out += leading_indent(gap);
  } else {
    out += ' ';
  }
  out += kElision;
  if (nl_after) {
    out += '\n';
    std::size_t nl = gap.rfind('\n');
    out += gap.substr(nl + 1);  // indentation preceding the next piece
  } else {
    out += ' ';
  }
}

}  // namespace

std::string flatten_slice(const AstIndex& ix, std::vector<FileRange> ranges,
                          const Insertion& assertion,
                          const FlattenOptions& opts) {
  std::map<FileId, std::vector<Piece>> by_file;
  std::map<FileId, std::vector<Piece>> overrides;
  for (const auto& [r, text] : opts.overrides)
    overrides[r.file_id].push_back({r.start_byte, r.end_byte, text});

  for (const auto& r : ranges) {
    const SourceFile& f = ix.file(r.file_id);
    FileRange w = whole_lines(f, r);
    by_file[r.file_id].push_back({w.start_byte, w.end_byte, std::nullopt});
  }
  by_file[assertion.file_id];

  std::string out;
  for (auto& [fid, pieces] : by_file) {
    const SourceFile& f = ix.file(fid);
    std::string_view src = f.content();

    // pieces swallowed by an override vanish; overrides partially
    // overlapping other pieces are ignored
    std::vector<Piece> ovs;
    for (const auto& o : overrides[fid]) {
      bool clash = std::any_of(pieces.begin(), pieces.end(), [&](const Piece& p) {
        bool inside = o.start <= p.start && p.end <= o.end;
        bool disjoint = p.end <= o.start || o.end <= p.start;
        bool covers = p.start <= o.start && o.end <= p.end && !(p.start == o.start && p.end == o.end);
        return !inside && !disjoint && !covers;
      });
      bool covered = std::any_of(pieces.begin(), pieces.end(), [&](const Piece& p) {
        return p.start <= o.start && o.end <= p.end &&
               !(p.start == o.start && p.end == o.end);
      });
      if (!clash && !covered) ovs.push_back(o);
    }
    std::erase_if(pieces, [&](const Piece& p) {
      return std::any_of(ovs.begin(), ovs.end(), [&](const Piece& o) {
        return o.start <= p.start && p.end <= o.end;
      });
    });

    std::sort(pieces.begin(), pieces.end(),
              [](const Piece& a, const Piece& b) {
                return std::tie(a.start, a.end) < std::tie(b.start, b.end);
              });
    std::vector<Piece> merged;
    for (const auto& p : pieces) {
      if (!merged.empty() && p.start <= merged.back().end)
        merged.back().end = std::max(merged.back().end, p.end);
      else
        merged.push_back(p);
    }
    for (auto& o : ovs) merged.push_back(o);

    if (fid == assertion.file_id) {
      std::uint32_t at = assertion.byte;
      for (std::size_t i = 0; i < merged.size(); ++i) {
        Piece& p = merged[i];
        if (!p.text && p.start < at && at < p.end) {
          Piece tail{at, p.end, std::nullopt};
          p.end = at;
          merged.insert(merged.begin() + static_cast<std::ptrdiff_t>(i) + 1, tail);
          break;
        }
      }
      merged.push_back({at, at, assertion.text});
    }
    std::stable_sort(merged.begin(), merged.end(), [](const Piece& a, const Piece& b) {
      return std::tie(a.start, a.end) < std::tie(b.start, b.end);
    });

    out += fmt::format("// file: {}\n", f.name());
    std::string body;
    std::uint32_t prev_end = 0;
    bool first = true;
    for (const auto& p : merged) {
      if (!first && p.start > prev_end)
        append_gap(body, src.substr(prev_end, p.start - prev_end));
      else if (first && !p.text && p.start > 0 && src[p.start - 1] != '\n')
        body += std::string(leading_indent(src.substr(f.line_start(f.line_of(p.start)),
                                                      p.start - f.line_start(f.line_of(p.start)))));
      if (p.text) {
        body += *p.text;
      } else {
        std::string_view t = src.substr(p.start, p.end - p.start);
        body += opts.strip_comments ? strip_c_comments(t, kElision) : std::string(t);
      }
      prev_end = std::max(prev_end, p.end);
      first = false;
    }
    if (body.empty() || body.back() != '\n') body += '\n';
    out += body;
  }
  return out;
}

// ---- backward pass ----

namespace {

struct VarKey {
  std::int32_t frame = -1;  // -1 for globals and unresolved names
  std::int32_t decl = -1;   // -2 marks a frame's return value
  std::string name;

  friend auto operator<=>(const VarKey&, const VarKey&) = default;
};

VarKey key_of(const AstIndex& ix, const VarRef& r, std::int32_t frame) {
  if (r.name == "<ret>") return {frame, -2, {}};
  if (r.decl >= 0 && ix.declarations()[r.decl].scope != DeclScope::Global)
    return {frame, r.decl, {}};
  return {-1, -1, r.name};
}

std::string describe(const AstIndex& ix, const VarKey& k) {
  if (k.decl == -2) return fmt::format("<ret>@{}", k.frame);
  if (k.decl >= 0)
    return fmt::format("{}@{}", ix.declarations()[k.decl].name, k.frame);
  return k.name;
}

class BackwardPass {
 public:
  BackwardPass(const AstIndex& ix, const std::vector<TraceRecord>& records,
               std::size_t guard_pos)
      : ix_(ix), fm_(reconstruct_frames(ix, records)), guard_pos_(guard_pos) {
    children_.resize(records.size());
    for (std::size_t f = 0; f < fm_.frames.size(); ++f)
      if (fm_.frames[f].call_pos >= 0)
        children_[fm_.frames[f].call_pos].push_back(static_cast<std::int32_t>(f));
    frame_kept_.assign(fm_.frames.size(), false);
  }

  const FrameMap& frames() const { return fm_; }

  std::vector<std::size_t> run(std::int32_t guard_node) {
    std::int32_t gf = fm_.frame_of[guard_pos_];
    for (const auto& r : ix_.node(guard_node).reads) vars_.insert(key_of(ix_, r, gf));
    std::vector<std::size_t> kept;
    for (std::size_t i = guard_pos_; i-- > 0;) {
      std::int32_t f = fm_.frame_of[i];
      std::int32_t n = fm_.node_of[i];
      if (f >= 0 && fm_.frames[f].last_pos == i && !fm_.frames[f].active_at_end)
        seed_callee(f);
      if (n < 0) {
        unknown_.push_back(i);
        kept.push_back(i);
        continue;
      }
      const StmtNode& s = ix_.node(n);
      bool keep = false;
      for (const auto& w : s.writes)
        if (vars_.count(key_of(ix_, w, f))) keep = true;
      if (!keep && s.kind == NodeKind::Guard)
        for (const auto& r : s.reads)
          if (vars_.count(key_of(ix_, r, f))) keep = true;
      for (auto child : children_[i])
        if (frame_kept_[child] || binds_param(child)) keep = true;
      if (!keep) continue;
      kept.push_back(i);
      frame_kept_[f] = true;
      for (const auto& r : s.reads) vars_.insert(key_of(ix_, r, f));
    }
    std::reverse(kept.begin(), kept.end());
    return kept;
  }

  const std::set<VarKey>& vars() const { return vars_; }
  const std::vector<std::size_t>& unknown() const { return unknown_; }

 private:
  bool binds_param(std::int32_t child) const {
    std::int32_t fn = fm_.frames[child].function;
    if (fn < 0) return false;
    for (auto p : ix_.functions()[fn].params)
      if (vars_.count(VarKey{child, p, {}})) return true;
    return false;
  }

  // First reverse encounter of a callee frame that returned before the
  // guard: bind its return value and pointer parameters to the caller.
  void seed_callee(std::int32_t f) {
    const Frame& fr = fm_.frames[f];
    if (fr.call_pos < 0 || fr.function < 0) return;
    std::int32_t cs = fm_.node_of[fr.call_pos];
    if (cs < 0) return;
    const StmtNode& site = ix_.node(cs);
    std::int32_t pf = fr.parent;
    bool relevant = false;
    for (const auto& w : site.writes)
      if (vars_.count(key_of(ix_, w, pf))) relevant = true;
    if (site.kind == NodeKind::Guard)
      for (const auto& r : site.reads)
        if (vars_.count(key_of(ix_, r, pf))) relevant = true;
    if (relevant) vars_.insert(VarKey{f, -2, {}});

    const FunctionInfo& fn = ix_.functions()[fr.function];
    for (const auto& call : site.calls) {
      if (call.callee != fn.name) continue;
      for (std::size_t k = 0; k < call.args.size() && k < fn.params.size(); ++k) {
        const CallArg& a = call.args[k];
        if (!a.base || !vars_.count(key_of(ix_, *a.base, pf))) continue;
        bool pointer = a.address_of || ix_.declarations()[fn.params[k]].is_pointer;
        if (pointer) vars_.insert(VarKey{f, fn.params[k], {}});
      }
    }
  }

  const AstIndex& ix_;
  FrameMap fm_;
  std::size_t guard_pos_;
  std::vector<std::vector<std::int32_t>> children_;
  std::vector<bool> frame_kept_;
  std::set<VarKey> vars_;
  std::vector<std::size_t> unknown_;
};

// Declarations, global items and macros for identifiers used in `ranges`,
// followed transitively.
void add_declarations(const AstIndex& ix, std::set<FileRange>& ranges) {
  std::map<std::string, std::vector<std::size_t>, std::less<>> global_names;
  for (std::size_t g = 0; g < ix.globals().size(); ++g)
    for (const auto& n : ix.globals()[g].names) global_names[n].push_back(g);
  std::map<std::string, std::vector<std::size_t>, std::less<>> macro_names;
  for (std::size_t m = 0; m < ix.macros().size(); ++m)
    macro_names[ix.macros()[m].name].push_back(m);

  std::vector<FileRange> work(ranges.begin(), ranges.end());
  std::set<FileRange> scanned;
  auto add = [&](const FileRange& r) {
    if (r.empty()) return;
    if (ranges.insert(r).second) work.push_back(r);
  };
  while (!work.empty()) {
    FileRange r = work.back();
    work.pop_back();
    if (!scanned.insert(r).second) continue;
    std::string_view text = ix.file(r.file_id).text(r);
    auto lx = lex_c(text);
    for (const auto& t : lx.tokens) {
      if (t.kind != TokenKind::Identifier) continue;
      std::string_view name = t.text;
      std::int32_t d = ix.resolve(name, r.file_id, r.start_byte + t.begin);
      bool file_scope = d < 0;
      if (d >= 0) {
        const Declaration& decl = ix.declarations()[d];
        switch (decl.scope) {
          case DeclScope::Local:
            add(decl.range);
            if (decl.node >= 0)
              for (const auto& c : ix.node(decl.node).context) add(c);
            break;
          case DeclScope::Param:
            if (decl.function >= 0) {
              const FunctionInfo& fn = ix.functions()[decl.function];
              add(fn.signature);
              add(fn.close_brace);
            }
            break;
          case DeclScope::Global:
            file_scope = true;
            if (decl.global >= 0) add(ix.globals()[decl.global].range);
            break;
        }
      }
      if (file_scope) {
        if (auto it = global_names.find(name); it != global_names.end())
          for (auto g : it->second) add(ix.globals()[g].range);
      }
      if (auto it = macro_names.find(name); it != macro_names.end())
        for (auto m : it->second) add(ix.macros()[m].range);
    }
  }
}

std::vector<FileRange> widen_to_functions(const AstIndex& ix,
                                          const std::vector<FileRange>& ranges) {
  std::set<FileRange> out;
  for (const auto& r : ranges) {
    bool inside = false;
    for (const auto& fn : ix.functions()) {
      if (fn.range.contains(r)) {
        out.insert(fn.range);
        inside = true;
        break;
      }
    }
    if (!inside) out.insert(r);
  }
  // drop ranges nested in others
  std::vector<FileRange> v(out.begin(), out.end());
  std::vector<FileRange> res;
  for (const auto& r : v) {
    bool nested = std::any_of(v.begin(), v.end(), [&](const FileRange& o) {
      return !(o == r) && o.contains(r);
    });
    if (!nested) res.push_back(r);
  }
  return res;
}

}  // namespace

Slice build_slice(const AstIndex& ix, const ExecutionTrace& trace,
                  const CondId& cond_id, std::uint32_t target_arm,
                  const SliceOptions& opts) {
  const Conditional* cond = ix.conditional(cond_id);
  if (!cond) throw SliceError("unknown conditional " + cond_id.str());
  const StmtNode& gnode = ix.node(cond->node);
  TraceRecord guard_rec{gnode.file_id, gnode.line, gnode.ordinal};
  auto git = std::find(trace.records.begin(), trace.records.end(), guard_rec);
  if (git == trace.records.end())
    throw SliceError(fmt::format("trace does not reach {} ({}:{})", cond_id.str(),
                                 ix.file(cond_id.file_id).name(), cond->guard_line));
  std::size_t gpos = static_cast<std::size_t>(git - trace.records.begin());
  std::vector<TraceRecord> records(trace.records.begin(), git + 1);

  Slice slice;
  slice.cond = cond_id;
  slice.target_arm = target_arm;
  slice.assertion_text = negate_condition(ix, *cond, target_arm);

  BackwardPass pass(ix, records, gpos);
  slice.trace.positions = pass.run(static_cast<std::int32_t>(cond->node));
  slice.trace.guard_pos = gpos;
  for (const auto& k : pass.vars()) slice.vars.push_back(describe(ix, k));
  const FrameMap& fm = pass.frames();

  std::set<FileRange> ranges;
  std::set<FileRange> retained_stmts;
  for (auto pos : slice.trace.positions) {
    const TraceRecord& rec = records[pos];
    std::int32_t n = fm.node_of[pos];
    if (n < 0) {
      if (rec.file_id < ix.files().size() &&
          rec.line <= ix.file(rec.file_id).line_count()) {
        const SourceFile& f = ix.file(rec.file_id);
        ranges.insert(f.range(f.line_start(rec.line), f.line_end(rec.line)));
      }
      slice.warnings.push_back(fmt::format("no statement for trace record {}:{}:{}",
                                           rec.file_id, rec.line, rec.ordinal));
      continue;
    }
    slice.statements.insert(rec);
    const StmtNode& s = ix.node(n);
    if (!retained_stmts.insert(s.range).second) continue;
    ranges.insert(s.range);
    for (const auto& c : s.context) ranges.insert(c);
    if (s.kind == NodeKind::Guard && s.cond)
      for (const auto& c : ix.conditional(*s.cond)->skeleton) ranges.insert(c);
  }
  for (const auto& c : gnode.context) ranges.insert(c);
  add_declarations(ix, ranges);
  for (const auto& w : slice.warnings) spdlog::warn("slice: {}", w);

  // the target statement's own text is replaced by the assertion, except
  // where retained code from earlier loop iterations lives inside it
  std::erase_if(ranges, [&](const FileRange& r) {
    return r == cond->guard_range;
  });
  bool body_kept = std::any_of(ranges.begin(), ranges.end(), [&](const FileRange& r) {
    return cond->stmt_range.contains(r);
  });

  const SourceFile& cf = ix.file(cond_id.file_id);
  std::string_view src = cf.content();
  Insertion ins;
  ins.file_id = cond_id.file_id;
  std::uint32_t at = body_kept ? cond->stmt_range.end_byte : cond->stmt_range.start_byte;
  std::uint32_t line = cf.line_of(cond->stmt_range.start_byte);
  std::uint32_t ls = cf.line_start(line);
  std::string_view prefix = src.substr(ls, cond->stmt_range.start_byte - ls);
  std::string indent(prefix.substr(0, prefix.find_first_not_of(" \t")));
  const Arm* loop_body = nullptr;
  for (const auto& a : cond->arms)
    if (a.kind == ArmKind::LoopBody) loop_body = &a;
  if (body_kept && cond->kind == CondKind::For && loop_body &&
      cf.text(loop_body->body_range).starts_with("{")) {
    // only the init clause ran before the first evaluation
    ins.byte = loop_body->body_range.start_byte + 1;
    ins.text = " " + slice.assertion_text;
  } else if (!body_kept && is_blank(src.substr(ls, at - ls))) {
    ins.byte = ls;
    ins.text = indent + slice.assertion_text + "\n";
  } else if (body_kept) {
    std::uint32_t le = cf.line_end(cf.line_of(at > 0 ? at - 1 : at));
    if (is_blank(src.substr(at, le - at))) {
      ins.byte = std::min<std::uint32_t>(le + 1, static_cast<std::uint32_t>(src.size()));
      ins.text = indent + slice.assertion_text + "\n";
    } else {
      ins.byte = at;
      ins.text = " " + slice.assertion_text;
    }
  } else {
    ins.byte = at;
    ins.text = slice.assertion_text + " ";
  }

  slice.ranges.assign(ranges.begin(), ranges.end());
  auto parses = [](const std::string& text) {
    return translation_unit_errors(text).empty();
  };
  FlattenOptions fo;
  std::string text = flatten_slice(ix, slice.ranges, ins, fo);
  if (!parses(text)) {
    spdlog::debug("slice for {} does not re-parse, widening", cond_id.str());
    slice.ranges = widen_to_functions(ix, slice.ranges);
    slice.widened = true;
    // the target statement is inside a widened function now; replace it
    Insertion wide = ins;
    wide.byte = cond->stmt_range.start_byte;
    wide.text = slice.assertion_text + " ";
    text = flatten_slice(ix, slice.ranges, body_kept ? ins : wide, fo);
    if (!parses(text)) {
      auto errs = translation_unit_errors(text);
      throw SliceError(fmt::format("slice for {} does not re-parse: {}", cond_id.str(),
                                   errs.empty() ? "" : errs.front()));
    }
  }

  if (text.size() > opts.max_chars) {
    slice.shrunk = true;
    fo.strip_comments = true;
    text = flatten_slice(ix, slice.ranges, ins, fo);
  }
  if (text.size() > opts.max_chars) {
    // loop and branch bodies holding no retained statement
    for (const auto& [id, c] : ix.conditionals()) {
      if (c.kind == CondKind::Switch) continue;
      for (const auto& a : c.arms) {
        if (a.synthetic || a.body_range.empty()) continue;
        std::string_view b = ix.file(a.body_range.file_id).text(a.body_range);
        if (b.empty() || b.front() != '{' || b.size() < 64) continue;
        bool holds = std::any_of(retained_stmts.begin(), retained_stmts.end(),
                                 [&](const FileRange& r) { return a.body_range.contains(r); });
        bool touched = std::any_of(slice.ranges.begin(), slice.ranges.end(),
                                   [&](const FileRange& r) { return a.body_range.contains(r); });
        if (!holds && touched) fo.overrides[a.body_range] = "{ /* ... */ }";
      }
    }
    text = flatten_slice(ix, slice.ranges, ins, fo);
    if (!parses(text)) throw SliceError("shrunk slice does not re-parse");
  }
  if (text.size() > opts.max_chars)
    throw SliceError(fmt::format("slice for {} is {} chars, over the {} limit",
                                 cond_id.str(), text.size(), opts.max_chars));
  slice.flattened = std::move(text);
  return slice;
}

}  // namespace slicefuzz
