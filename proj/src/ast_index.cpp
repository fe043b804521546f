#include "slicefuzz/ast_index.hpp"

#include <algorithm>
#include <charconv>
#include <set>

#include <fmt/format.h>
#include <json.hpp>

#include "def_use.hpp"
#include "slicefuzz/c_parser.hpp"
#include "slicefuzz/util.hpp"

namespace slicefuzz {

std::string_view to_string(CondKind k) {
  switch (k) {
    case CondKind::If: return "if";
    case CondKind::Switch: return "switch";
    case CondKind::While: return "while";
    case CondKind::For: return "for";
    case CondKind::DoWhile: return "do-while";
  }
  return "?";
}

std::string_view to_string(ArmKind k) {
  switch (k) {
    case ArmKind::Then: return "then";
    case ArmKind::Else: return "else";
    case ArmKind::Case: return "case";
    case ArmKind::Default: return "default";
    case ArmKind::LoopBody: return "loop-body";
    case ArmKind::LoopExit: return "loop-exit";
  }
  return "?";
}

std::string_view to_string(NodeKind k) {
  switch (k) {
    case NodeKind::Expression: return "expression";
    case NodeKind::Declaration: return "declaration";
    case NodeKind::Return: return "return";
    case NodeKind::Break: return "break";
    case NodeKind::Continue: return "continue";
    case NodeKind::Goto: return "goto";
    case NodeKind::Guard: return "guard";
    case NodeKind::ForInit: return "for-init";
    case NodeKind::ForStep: return "for-step";
  }
  return "?";
}

std::string CondId::str() const {
  return fmt::format("{}:{}", file_id, start_byte);
}

std::optional<CondId> CondId::parse(std::string_view text) {
  auto colon = text.find(':');
  if (colon == std::string_view::npos) return std::nullopt;
  CondId id;
  auto a = text.substr(0, colon);
  auto b = text.substr(colon + 1);
  auto r1 = std::from_chars(a.data(), a.data() + a.size(), id.file_id);
  auto r2 = std::from_chars(b.data(), b.data() + b.size(), id.start_byte);
  if (r1.ec != std::errc() || r1.ptr != a.data() + a.size() || a.empty())
    return std::nullopt;
  if (r2.ec != std::errc() || r2.ptr != b.data() + b.size() || b.empty())
    return std::nullopt;
  return id;
}

class IndexBuilder {
 public:
  explicit IndexBuilder(AstIndex& ix) : ix_(ix) {}

  void run() {
    units_.reserve(ix_.files_.size());
    for (const auto& f : ix_.files_) {
      units_.push_back(Unit{f.get(), parse_c(f->content()), {}});
    }
    for (auto& u : units_) collect_globals(u);
    for (auto& u : units_) {
      cur_ = &u;
      for (const auto& fn : u.tu.functions) walk_function(fn);
    }
    assign_ordinals();
    finish_arms();
    ix_.constants_ = constants_;
    ix_.function_names_ = function_names_;
  }

 private:
  struct Unit {
    const SourceFile* file;
    TranslationUnit tu;
    std::map<std::string, std::int32_t, std::less<>> globals;  // name → decl
  };

  const Token& tok(std::uint32_t i) const { return cur_->tu.tokens[i]; }
  FileRange tr(std::uint32_t a, std::uint32_t b) const {
    return cur_->file->range(tok(a).begin, tok(b).end);
  }
  FileRange point(std::uint32_t byte) const {
    return cur_->file->range(byte, byte);
  }

  // ---- file scope ----
  void collect_globals(Unit& u) {
    cur_ = &u;
    const auto& tu = u.tu;
    for (const auto& issue : tu.issues)
      ix_.warnings_.push_back(fmt::format("{}: skipped region: {}",
                                          u.file->name(), issue.message));
    for (const auto& e : tu.lex_errors)
      ix_.warnings_.push_back(fmt::format("{}: {}", u.file->name(), e));
    for (const auto& m : tu.macros) {
      ix_.macros_.push_back(
          MacroItem{std::string(m.name), tr(m.tok, m.tok), m.function_like});
      if (!m.function_like) constants_.insert(std::string(m.name));
    }
    for (const auto& ec : tu.enum_constants)
      constants_.insert(std::string(ec.name));
    for (const auto& fn : tu.functions) {
      function_names_.insert(std::string(fn.name));
      traced_.insert(std::string(fn.name));
    }
    for (const auto& g : tu.globals) {
      GlobalItem item;
      item.range = tr(g.first_tok, g.last_tok);
      for (std::uint32_t i = g.first_tok; i < g.last_tok; ++i) {
        const Token& t = tok(i);
        if ((t.is("struct") || t.is("union") || t.is("enum")) &&
            tok(i + 1).is_ident())
          item.names.emplace_back(tok(i + 1).text);
      }
      for (const auto& ec : tu.enum_constants)
        if (ec.decl_first_tok >= g.first_tok && ec.decl_first_tok <= g.last_tok)
          item.names.emplace_back(ec.name);
      std::int32_t gi = static_cast<std::int32_t>(ix_.globals_.size());
      for (const auto& d : g.decls) {
        if (d.name.empty()) continue;
        item.names.emplace_back(d.name);
        if (d.is_function && !d.is_pointer) {
          function_names_.insert(std::string(d.name));
          continue;
        }
        if (g.is_typedef) continue;
        Declaration decl;
        decl.name = std::string(d.name);
        decl.scope = DeclScope::Global;
        decl.range = item.range;
        decl.scope_range = u.file->range(0, u.file->content().size());
        decl.global = gi;
        decl.is_pointer = d.is_pointer;
        std::int32_t id = add_decl(std::move(decl));
        u.globals.emplace(std::string(d.name), id);
        all_globals_.emplace(std::string(d.name), id);
      }
      ix_.globals_.push_back(std::move(item));
    }
  }

  std::int32_t add_decl(Declaration d) {
    ix_.decls_.push_back(std::move(d));
    return static_cast<std::int32_t>(ix_.decls_.size() - 1);
  }

  // ---- name classification ----
  std::int32_t lookup(std::string_view name) const {
    for (auto it = scopes_.rbegin(); it != scopes_.rend(); ++it) {
      auto f = it->names.find(name);
      if (f != it->names.end()) return f->second;
    }
    if (auto f = cur_->globals.find(name); f != cur_->globals.end())
      return f->second;
    if (auto f = all_globals_.find(name); f != all_globals_.end())
      return f->second;
    return -1;
  }

  detail::NameClassifier classifier() const {
    detail::NameClassifier c;
    c.resolve = [this](std::string_view n) { return lookup(n); };
    c.is_function = [this](std::string_view n) {
      return function_names_.count(n) > 0;
    };
    c.is_traced = [this](std::string_view n) { return traced_.count(n) > 0; };
    c.is_constant = [this](std::string_view n) {
      return constants_.count(n) > 0;
    };
    c.is_pointer_decl = [this](std::int32_t d) {
      return d >= 0 && ix_.decls_[d].is_pointer;
    };
    return c;
  }

  detail::DefUse analyze(const Expr* e) const {
    detail::DefUse du;
    if (e) detail::collect_expr(*e, classifier(), du);
    return du;
  }

  // ---- nodes ----
  std::uint32_t add_node(NodeKind kind, FileRange range, detail::DefUse du,
                         std::optional<CondId> cond = std::nullopt) {
    du.normalize();
    StmtNode n;
    n.id = static_cast<std::uint32_t>(ix_.nodes_.size());
    n.kind = kind;
    n.file_id = cur_->file->id();
    n.line = range.start_line;
    n.range = range;
    n.function = fn_;
    n.cond = cond;
    n.reads = std::move(du.reads);
    n.writes = std::move(du.writes);
    n.calls = std::move(du.calls);
    n.context = ctx_;
    ix_.nodes_.push_back(std::move(n));
    return ix_.nodes_.back().id;
  }

  struct Scope {
    std::map<std::string, std::int32_t, std::less<>> names;
    std::uint32_t end_byte = 0;
  };

  void push_scope(std::uint32_t end_byte) {
    scopes_.push_back(Scope{{}, end_byte});
  }
  void pop_scope() { scopes_.pop_back(); }

  struct CtxGuard {
    std::vector<FileRange>& ctx;
    std::size_t size;
    CtxGuard(std::vector<FileRange>& c, std::initializer_list<FileRange> add)
        : ctx(c), size(c.size()) {
      ctx.insert(ctx.end(), add.begin(), add.end());
    }
    CtxGuard(std::vector<FileRange>& c, const std::vector<FileRange>& add)
        : ctx(c), size(c.size()) {
      ctx.insert(ctx.end(), add.begin(), add.end());
    }
    ~CtxGuard() { ctx.resize(size); }
  };

  std::vector<FileRange> body_piece(const Stmt& b) const {
    if (b.kind == Stmt::Kind::Compound)
      return {tr(b.first_tok, b.first_tok), tr(b.last_tok, b.last_tok)};
    return {tr(b.first_tok, b.last_tok)};
  }

  void walk_function(const FunctionDef& fn) {
    FunctionInfo info;
    info.name = std::string(fn.name);
    info.file_id = cur_->file->id();
    info.range = tr(fn.first_tok, fn.last_tok);
    info.signature = tr(fn.first_tok, fn.lbrace_tok);
    info.close_brace = tr(fn.last_tok, fn.last_tok);
    fn_ = static_cast<std::int32_t>(ix_.functions_.size());
    ix_.functions_.push_back(info);

    const Stmt& body = *fn.body;
    push_scope(tok(body.last_tok).end);
    for (const auto& p : fn.params) {
      if (p.name.empty()) continue;
      Declaration d;
      d.name = std::string(p.name);
      d.scope = DeclScope::Param;
      d.range = tr(p.first_tok, p.last_tok);
      d.scope_range = tr(fn.lbrace_tok, fn.last_tok);
      d.function = fn_;
      d.is_pointer = p.is_pointer;
      std::int32_t id = add_decl(std::move(d));
      scopes_.back().names[std::string(p.name)] = id;
      ix_.functions_[fn_].params.push_back(id);
    }
    ctx_ = {info.signature, info.close_brace};
    push_scope(tok(body.last_tok).end);
    walk_items(body);
    pop_scope();
    pop_scope();
    ctx_.clear();
    ix_.functions_[fn_].entry_node = first_exec(body);
    fn_ = -1;
  }

  void walk_items(const Stmt& compound) {
    std::vector<FileRange> labels;
    for (const auto& item : compound.body) {
      if (item->kind == Stmt::Kind::Case || item->kind == Stmt::Kind::Default) {
        labels.clear();
        const Stmt* s = item.get();
        while (s->kind == Stmt::Kind::Case || s->kind == Stmt::Kind::Default) {
          labels.push_back(tr(s->first_tok, s->colon_tok));
          s = s->body[0].get();
        }
        CtxGuard g(ctx_, labels);
        walk_stmt(*s);
        continue;
      }
      CtxGuard g(ctx_, labels);
      walk_stmt(*item);
    }
  }

  void walk_stmt(const Stmt& s) {
    switch (s.kind) {
      case Stmt::Kind::Compound: {
        CtxGuard g(ctx_, body_piece(s));
        push_scope(tok(s.last_tok).end);
        walk_items(s);
        pop_scope();
        return;
      }
      case Stmt::Kind::If:
        walk_if(s);
        return;
      case Stmt::Kind::Switch:
      case Stmt::Kind::While: {
        bool sw = s.kind == Stmt::Kind::Switch;
        add_guard(s, sw ? CondKind::Switch : CondKind::While,
                  tr(s.lparen, s.rparen), tr(s.lparen + 1, s.rparen - 1));
        CtxGuard g(ctx_, {tr(s.first_tok, s.rparen)});
        walk_stmt(*s.body[0]);
        return;
      }
      case Stmt::Kind::DoWhile: {
        {
          CtxGuard g(ctx_, {tr(s.first_tok, s.first_tok),
                            tr(s.while_tok, s.last_tok)});
          walk_stmt(*s.body[0]);
        }
        add_guard(s, CondKind::DoWhile, tr(s.lparen, s.rparen),
                  tr(s.lparen + 1, s.rparen - 1));
        return;
      }
      case Stmt::Kind::For:
        walk_for(s);
        return;
      case Stmt::Kind::Return: {
        auto du = analyze(s.expr.get());
        du.add_write(VarRef{"<ret>", -1});
        simple_[&s] = add_node(NodeKind::Return, tr(s.first_tok, s.last_tok),
                               std::move(du));
        return;
      }
      case Stmt::Kind::Break:
      case Stmt::Kind::Continue:
      case Stmt::Kind::Goto: {
        NodeKind k = s.kind == Stmt::Kind::Break      ? NodeKind::Break
                     : s.kind == Stmt::Kind::Continue ? NodeKind::Continue
                                                      : NodeKind::Goto;
        simple_[&s] = add_node(k, tr(s.first_tok, s.last_tok), {});
        return;
      }
      case Stmt::Kind::Label:
        walk_stmt(*s.body[0]);
        return;
      case Stmt::Kind::Case:
      case Stmt::Kind::Default: {
        CtxGuard g(ctx_, {tr(s.first_tok, s.colon_tok)});
        walk_stmt(*s.body[0]);
        return;
      }
      case Stmt::Kind::Expression:
        simple_[&s] = add_node(NodeKind::Expression,
                               tr(s.first_tok, s.last_tok),
                               analyze(s.expr.get()));
        return;
      case Stmt::Kind::Declaration:
        simple_[&s] = add_declaration(s, NodeKind::Declaration,
                                      tr(s.first_tok, s.last_tok));
        return;
      case Stmt::Kind::Empty:
        return;
    }
  }

  std::uint32_t add_declaration(const Stmt& s, NodeKind kind, FileRange range) {
    detail::DefUse du;
    std::vector<std::int32_t> ids;
    for (const auto& d : s.decls) {
      if (d.init) detail::collect_expr(*d.init, classifier(), du);
      if (d.name.empty() || d.is_function) continue;
      Declaration decl;
      decl.name = std::string(d.name);
      decl.scope = DeclScope::Local;
      decl.range = range;
      decl.scope_range =
          cur_->file->range(tok(d.last_tok).end, scopes_.back().end_byte);
      decl.function = fn_;
      decl.is_pointer = d.is_pointer;
      std::int32_t id = add_decl(std::move(decl));
      scopes_.back().names[std::string(d.name)] = id;
      du.add_write(VarRef{std::string(d.name), id});
      ids.push_back(id);
    }
    std::uint32_t node = add_node(kind, range, std::move(du));
    for (auto id : ids) ix_.decls_[id].node = static_cast<std::int32_t>(node);
    return node;
  }

  void walk_if(const Stmt& s) {
    add_guard(s, CondKind::If, tr(s.lparen, s.rparen),
              tr(s.lparen + 1, s.rparen - 1));
    FileRange header = tr(s.first_tok, s.rparen);
    {
      CtxGuard g(ctx_, {header});
      walk_stmt(*s.body[0]);
    }
    if (s.body.size() > 1) {
      std::vector<FileRange> pieces{header};
      auto then_piece = body_piece(*s.body[0]);
      pieces.insert(pieces.end(), then_piece.begin(), then_piece.end());
      pieces.push_back(tr(s.else_tok, s.else_tok));
      CtxGuard g(ctx_, pieces);
      walk_stmt(*s.body[1]);
    }
  }

  void walk_for(const Stmt& s) {
    push_scope(tok(s.last_tok).end);
    FileRange header = tr(s.first_tok, s.rparen);
    std::vector<FileRange> skeleton{header};
    auto bp = body_piece(*s.body[0]);
    skeleton.insert(skeleton.end(), bp.begin(), bp.end());
    {
      CtxGuard g(ctx_, skeleton);
      if (s.for_init) {
        const Stmt& init = *s.for_init;
        std::uint32_t n;
        if (init.kind == Stmt::Kind::Declaration) {
          n = add_declaration(init, NodeKind::ForInit,
                              tr(init.first_tok, init.last_tok));
          ix_.nodes_[n].outer_range = tr(s.first_tok, s.last_tok);
        } else {
          n = add_node(NodeKind::ForInit, tr(init.first_tok, init.last_tok),
                       analyze(init.expr.get()));
        }
        init_[&s] = n;
      }
      if (s.for_step)
        add_node(NodeKind::ForStep,
                 tr(s.for_step->first_tok, s.for_step->last_tok),
                 analyze(s.for_step.get()));
    }
    if (s.expr) {
      FileRange g = tr(s.expr->first_tok, s.expr->last_tok);
      add_guard(s, CondKind::For, g, g);
    }
    {
      CtxGuard g(ctx_, {header});
      walk_stmt(*s.body[0]);
    }
    pop_scope();
  }

  void add_guard(const Stmt& s, CondKind kind, FileRange guard, FileRange expr) {
    CondId id{cur_->file->id(), guard.start_byte};
    std::uint32_t node = add_node(NodeKind::Guard, guard,
                                  analyze(s.expr.get()), id);
    guard_[&s] = node;
    Conditional c;
    c.cond_id = id;
    c.kind = kind;
    c.guard_range = guard;
    c.expr_range = expr;
    c.stmt_range = tr(s.first_tok, s.last_tok);
    c.guard_line = guard.start_line;
    c.node = node;
    c.function = ix_.functions_[fn_].name;
    c.function_range = ix_.functions_[fn_].range;
    const Stmt& body = *s.body[0];
    auto bp = body_piece(body);
    if (kind == CondKind::DoWhile) {
      c.skeleton = {tr(s.first_tok, s.first_tok)};
      c.skeleton.insert(c.skeleton.end(), bp.begin(), bp.end());
      c.skeleton.push_back(tr(s.while_tok, s.last_tok));
    } else {
      c.skeleton = {tr(s.first_tok, s.rparen)};
      c.skeleton.insert(c.skeleton.end(), bp.begin(), bp.end());
    }
    FileRange body_r = tr(body.first_tok, body.last_tok);
    std::uint32_t end = c.stmt_range.end_byte;
    auto arm = [&](ArmKind k, FileRange r, bool synthetic) {
      Arm a;
      a.arm_id = static_cast<std::uint32_t>(c.arms.size());
      a.kind = k;
      a.body_range = r;
      a.synthetic = synthetic;
      c.arms.push_back(std::move(a));
    };
    switch (kind) {
      case CondKind::If:
        arm(ArmKind::Then, body_r, false);
        if (s.body.size() > 1)
          arm(ArmKind::Else, tr(s.body[1]->first_tok, s.body[1]->last_tok),
              false);
        else
          arm(ArmKind::Else, point(body_r.end_byte), true);
        break;
      case CondKind::Switch: {
        std::vector<const Stmt*> labels;
        collect_labels(body, labels);
        std::uint32_t close = body.kind == Stmt::Kind::Compound
                                  ? tok(body.last_tok).begin
                                  : body_r.end_byte;
        bool has_default = false;
        for (std::size_t i = 0; i < labels.size(); ++i) {
          const Stmt* l = labels[i];
          std::uint32_t from = tok(l->colon_tok).end;
          std::uint32_t to =
              i + 1 < labels.size() ? tok(labels[i + 1]->first_tok).begin
                                    : close;
          bool is_default = l->kind == Stmt::Kind::Default;
          has_default = has_default || is_default;
          arm(is_default ? ArmKind::Default : ArmKind::Case,
              cur_->file->range(from, std::max(from, to)), false);
          c.arms.back().label_range = tr(l->first_tok, l->colon_tok);
          if (!is_default)
            c.arms.back().guard_value = std::string(cur_->file->text(
                tr(l->expr->first_tok, l->expr->last_tok)));
        }
        if (!has_default) arm(ArmKind::Default, point(end), true);
        break;
      }
      case CondKind::While:
      case CondKind::For:
      case CondKind::DoWhile:
        arm(ArmKind::LoopBody, body_r, false);
        arm(ArmKind::LoopExit, point(end), true);
        break;
    }
    ix_.conditionals_.emplace(id, std::move(c));
  }

  void collect_labels(const Stmt& s, std::vector<const Stmt*>& out) const {
    if (s.kind == Stmt::Kind::Switch) return;
    if (s.kind == Stmt::Kind::Case || s.kind == Stmt::Kind::Default)
      out.push_back(&s);
    for (const auto& b : s.body) collect_labels(*b, out);
  }

  // First node executed when control enters `s`, or -1.
  std::int32_t first_exec(const Stmt& s) const {
    auto find = [](const auto& m, const Stmt* k) -> std::int32_t {
      auto it = m.find(k);
      return it == m.end() ? -1 : static_cast<std::int32_t>(it->second);
    };
    switch (s.kind) {
      case Stmt::Kind::Compound:
        for (const auto& item : s.body) {
          std::int32_t r = first_exec(*item);
          if (r >= 0) return r;
        }
        return -1;
      case Stmt::Kind::If:
      case Stmt::Kind::Switch:
      case Stmt::Kind::While:
        return find(guard_, &s);
      case Stmt::Kind::DoWhile: {
        std::int32_t r = first_exec(*s.body[0]);
        return r >= 0 ? r : find(guard_, &s);
      }
      case Stmt::Kind::For: {
        std::int32_t r = find(init_, &s);
        if (r >= 0) return r;
        r = find(guard_, &s);
        return r >= 0 ? r : first_exec(*s.body[0]);
      }
      case Stmt::Kind::Label:
      case Stmt::Kind::Case:
      case Stmt::Kind::Default:
        return first_exec(*s.body[0]);
      case Stmt::Kind::Empty:
        return -1;
      default:
        return find(simple_, &s);
    }
  }

  void assign_ordinals() {
    std::vector<std::uint32_t> order(ix_.nodes_.size());
    for (std::uint32_t i = 0; i < order.size(); ++i) order[i] = i;
    auto& nodes = ix_.nodes_;
    std::sort(order.begin(), order.end(), [&](auto a, auto b) {
      const auto& x = nodes[a];
      const auto& y = nodes[b];
      return std::tie(x.file_id, x.line, x.range.start_byte) <
             std::tie(y.file_id, y.line, y.range.start_byte);
    });
    std::uint16_t ord = 0;
    for (std::size_t i = 0; i < order.size(); ++i) {
      auto& n = nodes[order[i]];
      if (i > 0) {
        const auto& p = nodes[order[i - 1]];
        ord = (p.file_id == n.file_id && p.line == n.line) ? ord + 1 : 0;
      }
      n.ordinal = ord;
      ix_.node_keys_[{n.file_id, n.line, n.ordinal}] = n.id;
    }
  }

  void finish_arms() {
    std::map<FileId, std::vector<std::uint32_t>> starts;
    for (const auto& n : ix_.nodes_)
      starts[n.file_id].push_back(n.range.start_byte);
    for (auto& [f, v] : starts) std::sort(v.begin(), v.end());
    for (auto& [id, c] : ix_.conditionals_) {
      const auto& v = starts[id.file_id];
      for (auto& a : c.arms) {
        if (a.synthetic || a.body_range.empty()) continue;
        auto it = std::lower_bound(v.begin(), v.end(), a.body_range.start_byte);
        a.has_statements = it != v.end() && *it < a.body_range.end_byte;
      }
    }
  }

  AstIndex& ix_;
  std::vector<Unit> units_;
  Unit* cur_ = nullptr;
  std::set<std::string, std::less<>> function_names_;
  std::set<std::string, std::less<>> traced_;
  std::set<std::string, std::less<>> constants_;
  std::map<std::string, std::int32_t, std::less<>> all_globals_;
  std::vector<Scope> scopes_;
  std::vector<FileRange> ctx_;
  std::int32_t fn_ = -1;
  std::map<const Stmt*, std::uint32_t> simple_;
  std::map<const Stmt*, std::uint32_t> guard_;
  std::map<const Stmt*, std::uint32_t> init_;
};

AstIndex AstIndex::build(const std::vector<std::string>& source_paths) {
  std::vector<SourcePtr> files;
  for (std::size_t i = 0; i < source_paths.size(); ++i)
    files.push_back(SourceFile::load(static_cast<FileId>(i), source_paths[i]));
  return build(std::move(files));
}

AstIndex AstIndex::build(std::vector<SourcePtr> files) {
  AstIndex ix;
  ix.files_ = std::move(files);
  IndexBuilder(ix).run();
  return ix;
}

std::optional<FileId> AstIndex::find_file(std::string_view name_or_path) const {
  for (const auto& f : files_)
    if (f->path() == name_or_path || f->name() == name_or_path) return f->id();
  return std::nullopt;
}

const Conditional* AstIndex::conditional(const CondId& id) const {
  auto it = conditionals_.find(id);
  return it == conditionals_.end() ? nullptr : &it->second;
}

const Conditional* AstIndex::conditional_at(FileId file,
                                            std::uint32_t line) const {
  for (auto it = conditionals_.lower_bound(CondId{file, 0});
       it != conditionals_.end() && it->first.file_id == file; ++it) {
    if (it->second.guard_range.contains_line(file, line)) return &it->second;
  }
  return nullptr;
}

std::optional<std::uint32_t> AstIndex::node_at(FileId file, std::uint32_t line,
                                               std::uint16_t ordinal) const {
  auto it = node_keys_.find({file, line, ordinal});
  if (it == node_keys_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::uint32_t> AstIndex::nodes_on_line(FileId file,
                                                   std::uint32_t line) const {
  std::vector<std::uint32_t> out;
  for (auto it = node_keys_.lower_bound({file, line, 0});
       it != node_keys_.end() && std::get<0>(it->first) == file &&
       std::get<1>(it->first) == line;
       ++it)
    out.push_back(it->second);
  return out;
}

const FunctionInfo* AstIndex::function(std::string_view name) const {
  std::int32_t i = function_index(name);
  return i < 0 ? nullptr : &functions_[i];
}

std::int32_t AstIndex::function_index(std::string_view name) const {
  for (std::size_t i = 0; i < functions_.size(); ++i)
    if (functions_[i].name == name) return static_cast<std::int32_t>(i);
  return -1;
}

std::int32_t AstIndex::resolve(std::string_view name, FileId file,
                               std::uint32_t byte) const {
  std::int32_t best = -1;
  std::uint32_t best_size = 0;
  std::int32_t same_file_global = -1;
  std::int32_t any_global = -1;
  for (std::size_t i = 0; i < decls_.size(); ++i) {
    const auto& d = decls_[i];
    if (d.name != name) continue;
    if (d.scope == DeclScope::Global) {
      if (d.scope_range.file_id == file && same_file_global < 0)
        same_file_global = static_cast<std::int32_t>(i);
      if (any_global < 0) any_global = static_cast<std::int32_t>(i);
      continue;
    }
    const auto& s = d.scope_range;
    if (s.file_id != file || byte < s.start_byte || byte >= s.end_byte)
      continue;
    if (best < 0 || s.size() < best_size) {
      best = static_cast<std::int32_t>(i);
      best_size = s.size();
    }
  }
  if (best >= 0) return best;
  return same_file_global >= 0 ? same_file_global : any_global;
}

std::optional<FileRange> AstIndex::resolve_declaration(
    std::string_view name, const FileRange& at) const {
  std::int32_t d = resolve(name, at.file_id, at.start_byte);
  if (d < 0) return std::nullopt;
  return decls_[d].range;
}

std::string AstIndex::dump_json() const {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& [id, c] : conditionals_) {
    nlohmann::json arms = nlohmann::json::array();
    for (const auto& a : c.arms) {
      nlohmann::json j{{"id", a.arm_id}, {"kind", to_string(a.kind)}};
      if (a.guard_value) j["value"] = *a.guard_value;
      arms.push_back(std::move(j));
    }
    out.push_back({{"cond_id", id.str()},
                   {"file", files_[id.file_id]->name()},
                   {"line", c.guard_line},
                   {"kind", to_string(c.kind)},
                   {"guard", files_[id.file_id]->text(c.guard_range)},
                   {"function", c.function},
                   {"arms", std::move(arms)}});
  }
  return out.dump(2);
}

std::vector<std::string> get_vars(std::string_view expression,
                                  const AstIndex* index) {
  ExprPtr e = parse_expression_text(expression);
  if (!e) return {};
  detail::NameClassifier c;
  c.resolve = [](std::string_view) { return -1; };
  c.is_function = [&](std::string_view n) {
    return index && index->is_function_name(n);
  };
  c.is_traced = [&](std::string_view n) {
    return index && index->function(n) != nullptr;
  };
  c.is_constant = [&](std::string_view n) {
    return index && index->is_constant(n);
  };
  c.is_pointer_decl = [](std::int32_t) { return false; };
  detail::DefUse du;
  detail::collect_expr(*e, c, du);
  std::set<std::string> names;
  for (const auto& r : du.reads) names.insert(r.name);
  return {names.begin(), names.end()};
}

}  // namespace slicefuzz
