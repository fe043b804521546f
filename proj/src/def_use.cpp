#include "def_use.hpp"

#include <algorithm>

namespace slicefuzz::detail {

namespace {

const Expr* strip(const Expr* e) {
  while (e && (e->kind == Expr::Kind::Paren || e->kind == Expr::Kind::Cast) &&
         !e->kids.empty())
    e = e->kids.back().get();
  return e;
}

class Collector {
 public:
  Collector(const NameClassifier& names, DefUse& out)
      : names_(names), out_(out) {}

  std::optional<VarRef> var(std::string_view name) const {
    std::int32_t d = names_.resolve(name);
    if (d >= 0) return VarRef{std::string(name), d};
    if (names_.is_function(name) || names_.is_constant(name))
      return std::nullopt;
    return VarRef{std::string(name), -1};
  }

  // The object an lvalue or pointer expression designates.
  std::optional<VarRef> base_of(const Expr* e) const {
    e = strip(e);
    if (!e) return std::nullopt;
    switch (e->kind) {
      case Expr::Kind::Ident:
        return var(e->op);
      case Expr::Kind::Index:
      case Expr::Kind::Member:
      case Expr::Kind::Postfix:
        return base_of(e->kids[0].get());
      case Expr::Kind::Unary:
        if (e->op == "*" || e->op == "&" || e->op == "++" || e->op == "--")
          return base_of(e->kids[0].get());
        return std::nullopt;
      case Expr::Kind::Binary:
        if (e->op == "+" || e->op == "-") {
          if (auto b = base_of(e->kids[0].get())) return b;
          if (e->op == "+") return base_of(e->kids[1].get());
        }
        return std::nullopt;
      case Expr::Kind::Assign:
        return base_of(e->kids[0].get());
      default:
        return std::nullopt;
    }
  }

  void write_lvalue(const Expr* lhs, bool also_read) {
    const Expr* s = strip(lhs);
    if (auto b = base_of(s)) {
      out_.add_write(*b);
      if (also_read || s->kind != Expr::Kind::Ident) out_.add_read(*b);
    }
    // Index expressions and pointer arithmetic inside the lvalue are reads.
    if (s && s->kind != Expr::Kind::Ident) visit(*s);
  }

  void visit(const Expr& e) {
    switch (e.kind) {
      case Expr::Kind::Ident:
        if (auto v = var(e.op)) out_.add_read(*v);
        return;
      case Expr::Kind::Literal:
        return;
      case Expr::Kind::Sizeof:
        return;  // operand is not evaluated
      case Expr::Kind::Assign:
        write_lvalue(e.kids[0].get(), e.op != "=");
        visit(*e.kids[1]);
        return;
      case Expr::Kind::Postfix:
        write_lvalue(e.kids[0].get(), true);
        return;
      case Expr::Kind::Unary:
        if (e.op == "++" || e.op == "--") {
          write_lvalue(e.kids[0].get(), true);
          return;
        }
        visit(*e.kids[0]);
        return;
      case Expr::Kind::Member:
        visit(*e.kids[0]);
        return;
      case Expr::Kind::Call:
        visit_call(e);
        return;
      default:
        for (const auto& k : e.kids) visit(*k);
        return;
    }
  }

  void visit_call(const Expr& e) {
    const Expr* callee = strip(e.kids[0].get());
    CallSite cs;
    bool named = callee->kind == Expr::Kind::Ident &&
                 names_.resolve(callee->op) < 0;
    if (named) {
      cs.callee = std::string(callee->op);
      cs.traced = names_.is_traced(callee->op);
    } else {
      visit(*e.kids[0]);  // function pointer expression
    }
    for (std::size_t i = 1; i < e.kids.size(); ++i) {
      const Expr* arg = e.kids[i].get();
      visit(*arg);
      CallArg ca;
      const Expr* s = strip(arg);
      ca.address_of = s->kind == Expr::Kind::Unary && s->op == "&";
      ca.base = base_of(s);
      if (!cs.traced && ca.base) {
        // Untraced callees may write through any pointer they receive.
        bool pointerish = ca.address_of || ca.base->decl < 0 ||
                          names_.is_pointer_decl(ca.base->decl);
        if (pointerish) out_.add_write(*ca.base);
      }
      cs.args.push_back(std::move(ca));
    }
    if (named) out_.calls.push_back(std::move(cs));
  }

 private:
  const NameClassifier& names_;
  DefUse& out_;
};

}  // namespace

void DefUse::add_read(VarRef v) { reads.push_back(std::move(v)); }
void DefUse::add_write(VarRef v) { writes.push_back(std::move(v)); }

void DefUse::normalize() {
  for (auto* v : {&reads, &writes}) {
    std::sort(v->begin(), v->end());
    v->erase(std::unique(v->begin(), v->end()), v->end());
  }
}

void collect_expr(const Expr& e, const NameClassifier& names, DefUse& out) {
  Collector(names, out).visit(e);
}

}  // namespace slicefuzz::detail
