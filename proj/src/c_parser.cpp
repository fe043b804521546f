#include "slicefuzz/c_parser.hpp"

#include <array>

#include <fmt/format.h>

namespace slicefuzz {

namespace {

constexpr std::array<std::string_view, 22> kBuiltinTypedefs = {
    "FILE",      "size_t",    "ssize_t",  "ptrdiff_t", "wchar_t",  "va_list",
    "int8_t",    "int16_t",   "int32_t",  "int64_t",   "uint8_t",  "uint16_t",
    "uint32_t",  "uint64_t",  "intptr_t", "uintptr_t", "off_t",    "bool",
    "intmax_t",  "uintmax_t", "time_t",   "pid_t"};

bool is_type_keyword(std::string_view w) {
  return w == "int" || w == "char" || w == "short" || w == "long" ||
         w == "float" || w == "double" || w == "void" || w == "_Bool" ||
         w == "signed" || w == "unsigned" || w == "struct" || w == "union" ||
         w == "enum" || w == "_Complex";
}

bool is_qualifier(std::string_view w) {
  return w == "const" || w == "volatile" || w == "restrict" ||
         w == "__restrict" || w == "_Atomic";
}

bool is_assign_op(std::string_view op) {
  return op == "=" || op == "+=" || op == "-=" || op == "*=" || op == "/=" ||
         op == "%=" || op == "&=" || op == "|=" || op == "^=" || op == "<<=" ||
         op == ">>=";
}

int binary_precedence(std::string_view op) {
  if (op == "||") return 1;
  if (op == "&&") return 2;
  if (op == "|") return 3;
  if (op == "^") return 4;
  if (op == "&") return 5;
  if (op == "==" || op == "!=") return 6;
  if (op == "<" || op == ">" || op == "<=" || op == ">=") return 7;
  if (op == "<<" || op == ">>") return 8;
  if (op == "+" || op == "-") return 9;
  if (op == "*" || op == "/" || op == "%") return 10;
  return 0;
}

class Parser {
 public:
  Parser(TranslationUnit& tu) : tu_(tu), toks_(tu.tokens) {}

  // ---- token helpers ----
  const Token& tok(std::uint32_t i) const {
    return i < toks_.size() ? toks_[i] : toks_.back();
  }
  const Token& cur() const { return tok(pos_); }
  const Token& peek(std::uint32_t k = 1) const { return tok(pos_ + k); }
  bool at(std::string_view p) const { return cur().is(p); }
  bool at_end() const { return cur().kind == TokenKind::End; }

  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError(pos_, fmt::format("line {}: {} near '{}'", cur().line, msg,
                                       cur().text));
  }
  void expect(std::string_view p) {
    if (!at(p)) fail(fmt::format("expected '{}'", p));
    ++pos_;
  }

  bool is_typedef_name(std::string_view name) const {
    return tu_.typedef_names.count(name) > 0 || looks_like_typedef_name(name);
  }

  bool is_type_start(std::uint32_t i) const {
    const Token& t = tok(i);
    if (t.kind == TokenKind::Keyword)
      return is_decl_specifier_keyword(t.text) || t.text == "__attribute__";
    if (t.kind == TokenKind::Identifier) return is_typedef_name(t.text);
    return false;
  }

  void skip_balanced(std::string_view open, std::string_view close) {
    if (!at(open)) fail(fmt::format("expected '{}'", open));
    int depth = 0;
    while (!at_end()) {
      if (at(open)) ++depth;
      if (at(close)) {
        --depth;
        if (depth == 0) {
          ++pos_;
          return;
        }
      }
      ++pos_;
    }
    fail(fmt::format("unbalanced '{}'", open));
  }

  void skip_attributes() {
    while (cur().is("__attribute__")) {
      ++pos_;
      skip_balanced("(", ")");
    }
  }

  // ---- expressions ----
  ExprPtr parse_expression() {
    auto e = parse_assignment();
    if (!at(",")) return e;
    auto comma = std::make_unique<Expr>(Expr::Kind::Comma, e->first_tok, 0);
    comma->kids.push_back(std::move(e));
    while (at(",")) {
      ++pos_;
      comma->kids.push_back(parse_assignment());
    }
    comma->last_tok = comma->kids.back()->last_tok;
    return comma;
  }

  ExprPtr parse_assignment() {
    auto lhs = parse_conditional();
    if (cur().kind == TokenKind::Punct && is_assign_op(cur().text)) {
      auto op = cur().text;
      ++pos_;
      auto rhs = parse_assignment();
      auto e = std::make_unique<Expr>(Expr::Kind::Assign, lhs->first_tok,
                                      rhs->last_tok);
      e->op = op;
      e->kids.push_back(std::move(lhs));
      e->kids.push_back(std::move(rhs));
      return e;
    }
    return lhs;
  }

  ExprPtr parse_conditional() {
    auto c = parse_binary(1);
    if (!at("?")) return c;
    ++pos_;
    auto t = parse_expression();
    expect(":");
    auto f = parse_conditional();
    auto e = std::make_unique<Expr>(Expr::Kind::Ternary, c->first_tok,
                                    f->last_tok);
    e->kids.push_back(std::move(c));
    e->kids.push_back(std::move(t));
    e->kids.push_back(std::move(f));
    return e;
  }

  ExprPtr parse_binary(int min_prec) {
    auto lhs = parse_unary();
    while (cur().kind == TokenKind::Punct) {
      int prec = binary_precedence(cur().text);
      if (prec == 0 || prec < min_prec) break;
      auto op = cur().text;
      ++pos_;
      auto rhs = parse_binary(prec + 1);
      auto e = std::make_unique<Expr>(Expr::Kind::Binary, lhs->first_tok,
                                      rhs->last_tok);
      e->op = op;
      e->kids.push_back(std::move(lhs));
      e->kids.push_back(std::move(rhs));
      lhs = std::move(e);
    }
    return lhs;
  }

  // Consumes "( type-name )" starting at '('; returns index of ')'.
  std::uint32_t skip_type_name_parens() {
    std::uint32_t open = pos_;
    skip_balanced("(", ")");
    (void)open;
    return pos_ - 1;
  }

  bool paren_starts_cast() const {
    // cur() is '('
    if (is_type_start(pos_ + 1)) return true;
    const Token& a = peek(1);
    if (a.kind != TokenKind::Identifier) return false;
    // (name *) or (name **) is only meaningful as a type.
    std::uint32_t k = pos_ + 2;
    bool stars = false;
    while (tok(k).is("*")) {
      ++k;
      stars = true;
    }
    if (stars && tok(k).is(")")) return true;
    return false;
  }

  ExprPtr parse_unary() {
    const Token& t = cur();
    std::uint32_t start = pos_;
    if (t.kind == TokenKind::Punct &&
        (t.text == "++" || t.text == "--" || t.text == "&" || t.text == "*" ||
         t.text == "+" || t.text == "-" || t.text == "~" || t.text == "!")) {
      auto op = t.text;
      ++pos_;
      auto operand = (op == "++" || op == "--") ? parse_unary() : parse_cast();
      auto e = std::make_unique<Expr>(Expr::Kind::Unary, start,
                                      operand->last_tok);
      e->op = op;
      e->kids.push_back(std::move(operand));
      return e;
    }
    if (t.is("sizeof") || t.is("_Alignof")) {
      ++pos_;
      if (at("(") && paren_starts_cast()) {
        std::uint32_t close = skip_type_name_parens();
        return std::make_unique<Expr>(Expr::Kind::Sizeof, start, close);
      }
      auto operand = parse_unary();
      auto e = std::make_unique<Expr>(Expr::Kind::Sizeof, start,
                                      operand->last_tok);
      e->kids.push_back(std::move(operand));
      return e;
    }
    return parse_cast();
  }

  ExprPtr parse_cast() {
    if (at("(") && paren_starts_cast()) {
      std::uint32_t start = pos_;
      skip_type_name_parens();
      if (at("{")) {
        auto init = parse_init_list();
        auto e = std::make_unique<Expr>(Expr::Kind::Cast, start,
                                        init->last_tok);
        e->kids.push_back(std::move(init));
        return parse_postfix_ops(std::move(e));
      }
      auto operand = parse_unary();
      auto e = std::make_unique<Expr>(Expr::Kind::Cast, start,
                                      operand->last_tok);
      e->kids.push_back(std::move(operand));
      return e;
    }
    return parse_postfix();
  }

  ExprPtr parse_postfix() { return parse_postfix_ops(parse_primary()); }

  ExprPtr parse_postfix_ops(ExprPtr e) {
    for (;;) {
      if (at("[")) {
        ++pos_;
        auto idx = parse_expression();
        std::uint32_t close = pos_;
        expect("]");
        auto n = std::make_unique<Expr>(Expr::Kind::Index, e->first_tok, close);
        n->kids.push_back(std::move(e));
        n->kids.push_back(std::move(idx));
        e = std::move(n);
      } else if (at("(")) {
        ++pos_;
        auto n = std::make_unique<Expr>(Expr::Kind::Call, e->first_tok, 0);
        n->kids.push_back(std::move(e));
        if (!at(")")) {
          n->kids.push_back(parse_assignment());
          while (at(",")) {
            ++pos_;
            n->kids.push_back(parse_assignment());
          }
        }
        n->last_tok = pos_;
        expect(")");
        e = std::move(n);
      } else if (at(".") || at("->")) {
        bool arrow = at("->");
        ++pos_;
        if (!cur().is_ident()) fail("expected member name");
        auto n = std::make_unique<Expr>(Expr::Kind::Member, e->first_tok, pos_);
        n->op = cur().text;
        n->arrow = arrow;
        ++pos_;
        n->kids.push_back(std::move(e));
        e = std::move(n);
      } else if (at("++") || at("--")) {
        auto n = std::make_unique<Expr>(Expr::Kind::Postfix, e->first_tok, pos_);
        n->op = cur().text;
        ++pos_;
        n->kids.push_back(std::move(e));
        e = std::move(n);
      } else {
        return e;
      }
    }
  }

  ExprPtr parse_primary() {
    const Token& t = cur();
    std::uint32_t start = pos_;
    switch (t.kind) {
      case TokenKind::Identifier: {
        ++pos_;
        auto e = std::make_unique<Expr>(Expr::Kind::Ident, start, start);
        e->op = t.text;
        return e;
      }
      case TokenKind::Number:
      case TokenKind::Char: {
        ++pos_;
        auto e = std::make_unique<Expr>(Expr::Kind::Literal, start, start);
        e->op = t.text;
        return e;
      }
      case TokenKind::String: {
        while (cur().kind == TokenKind::String) ++pos_;
        auto e = std::make_unique<Expr>(Expr::Kind::Literal, start, pos_ - 1);
        e->op = t.text;
        return e;
      }
      case TokenKind::Punct:
        if (t.text == "(") {
          if (peek().is("{")) fail("statement expressions are not supported");
          ++pos_;
          auto inner = parse_expression();
          std::uint32_t close = pos_;
          expect(")");
          auto e = std::make_unique<Expr>(Expr::Kind::Paren, start, close);
          e->kids.push_back(std::move(inner));
          return e;
        }
        break;
      default:
        break;
    }
    fail("expected expression");
  }

  ExprPtr parse_init_list() {
    std::uint32_t start = pos_;
    expect("{");
    auto e = std::make_unique<Expr>(Expr::Kind::InitList, start, start);
    while (!at("}")) {
      // designators: .field = / [const] =
      bool designated = false;
      while (at(".") || at("[")) {
        designated = true;
        if (at(".")) {
          pos_ += 2;
        } else {
          skip_balanced("[", "]");
        }
      }
      if (designated) expect("=");
      e->kids.push_back(parse_initializer());
      if (at(",")) {
        ++pos_;
        continue;
      }
      if (!at("}")) fail("expected ',' or '}' in initializer");
    }
    e->last_tok = pos_;
    ++pos_;
    return e;
  }

  ExprPtr parse_initializer() {
    if (at("{")) return parse_init_list();
    return parse_assignment();
  }

  // ---- declarations ----

  // Consumes declaration specifiers; returns true when anything was consumed.
  bool parse_specifiers(bool* is_typedef = nullptr) {
    bool saw_type = false;
    bool any = false;
    for (;;) {
      skip_attributes();
      const Token& t = cur();
      if (t.kind == TokenKind::Keyword && is_decl_specifier_keyword(t.text)) {
        any = true;
        if (t.text == "typedef" && is_typedef) *is_typedef = true;
        if (t.text == "struct" || t.text == "union" || t.text == "enum") {
          bool is_enum = t.text == "enum";
          saw_type = true;
          std::uint32_t decl_first = pos_;
          ++pos_;
          skip_attributes();
          if (cur().is_ident()) ++pos_;
          if (at("{")) {
            if (is_enum) {
              collect_enum_constants(decl_first);
            } else {
              skip_balanced("{", "}");
            }
          }
          continue;
        }
        if (is_type_keyword(t.text)) saw_type = true;
        ++pos_;
        continue;
      }
      if (t.kind == TokenKind::Identifier && !saw_type) {
        // A typedef name acts as the type when followed by a declarator.
        const Token& n = peek();
        if (is_typedef_name(t.text) || n.is_ident() ||
            (n.is("*") && looks_like_pointer_decl(pos_ + 1))) {
          saw_type = true;
          any = true;
          ++pos_;
          continue;
        }
      }
      return any;
    }
  }

  bool looks_like_pointer_decl(std::uint32_t i) const {
    while (tok(i).is("*") || (tok(i).kind == TokenKind::Keyword &&
                              is_qualifier(tok(i).text)))
      ++i;
    if (!tok(i).is_ident()) return false;
    const Token& after = tok(i + 1);
    return after.is(";") || after.is("=") || after.is(",") || after.is("[") ||
           after.is(")");
  }

  void collect_enum_constants(std::uint32_t decl_first) {
    std::uint32_t open = pos_;
    skip_balanced("{", "}");
    std::uint32_t close = pos_ - 1;
    int depth = 0;
    bool expect_name = true;
    for (std::uint32_t i = open + 1; i < close; ++i) {
      const Token& t = tok(i);
      if (t.is("(") || t.is("[") || t.is("{")) ++depth;
      if (t.is(")") || t.is("]") || t.is("}")) --depth;
      if (depth == 0 && t.is(",")) {
        expect_name = true;
        continue;
      }
      if (expect_name && t.is_ident()) {
        tu_.enum_constants.push_back(EnumConstant{t.text, i, decl_first, 0});
        expect_name = false;
      }
    }
    for (auto& ec : tu_.enum_constants)
      if (ec.decl_first_tok == decl_first) ec.decl_last_tok = close;
  }

  Declarator parse_declarator(bool allow_abstract) {
    Declarator d;
    d.first_tok = pos_;
    skip_attributes();
    while (at("*") || (cur().kind == TokenKind::Keyword &&
                       is_qualifier(cur().text))) {
      if (at("*")) d.is_pointer = true;
      ++pos_;
    }
    bool nested = false;
    if (at("(") && (peek().is("*") || peek().is("(") || peek().is("^"))) {
      ++pos_;
      Declarator inner = parse_declarator(allow_abstract);
      expect(")");
      d.name = inner.name;
      d.name_tok = inner.name_tok;
      d.is_pointer = d.is_pointer || inner.is_pointer;
      nested = true;
    } else if (cur().is_ident()) {
      d.name = cur().text;
      d.name_tok = pos_;
      ++pos_;
    } else if (!allow_abstract) {
      fail("expected declarator");
    }
    for (;;) {
      skip_attributes();
      if (at("[")) {
        skip_balanced("[", "]");
        d.is_pointer = true;
      } else if (at("(")) {
        if (!nested && !d.name.empty() && !d.is_function) {
          d.is_function = true;
          d.params = parse_params();
        } else {
          skip_balanced("(", ")");
        }
      } else {
        break;
      }
    }
    d.last_tok = pos_ > d.first_tok ? pos_ - 1 : d.first_tok;
    return d;
  }

  std::vector<Declarator> parse_params() {
    expect("(");
    std::vector<Declarator> params;
    if (at(")")) {
      ++pos_;
      return params;
    }
    if (cur().is("void") && peek().is(")")) {
      pos_ += 2;
      return params;
    }
    for (;;) {
      if (at("...")) {
        ++pos_;
      } else {
        std::uint32_t first = pos_;
        if (!parse_specifiers()) {
          // K&R identifier list
          if (cur().is_ident()) {
            Declarator d;
            d.name = cur().text;
            d.name_tok = pos_;
            d.first_tok = d.last_tok = pos_;
            ++pos_;
            params.push_back(std::move(d));
          } else {
            fail("expected parameter");
          }
        } else {
          Declarator d = parse_declarator(true);
          d.first_tok = first;
          params.push_back(std::move(d));
        }
      }
      if (at(",")) {
        ++pos_;
        continue;
      }
      expect(")");
      return params;
    }
  }

  // After specifiers: declarators up to (not including) the terminator.
  std::vector<Declarator> parse_init_declarators() {
    std::vector<Declarator> decls;
    for (;;) {
      Declarator d = parse_declarator(false);
      skip_attributes();
      if (cur().is("__asm__") || cur().is("asm")) {
        ++pos_;
        skip_balanced("(", ")");
      }
      if (at("=")) {
        ++pos_;
        d.init = parse_initializer();
        d.last_tok = d.init->last_tok;
      }
      decls.push_back(std::move(d));
      if (at(",")) {
        ++pos_;
        continue;
      }
      return decls;
    }
  }

  bool statement_is_declaration() const {
    const Token& t = cur();
    if (t.kind == TokenKind::Keyword)
      return is_decl_specifier_keyword(t.text) || t.text == "__attribute__";
    if (!t.is_ident()) return false;
    const Token& n = peek();
    if (n.is_ident()) return true;
    if (is_typedef_name(t.text)) {
      if (n.kind != TokenKind::Punct) return false;
      return n.text == "*" || n.text == "(";
    }
    if (n.is("*")) return looks_like_pointer_decl(pos_ + 1);
    return false;
  }

  // ---- statements ----
  StmtPtr parse_statement() {
    const Token& t = cur();
    std::uint32_t start = pos_;
    if (t.is("{")) return parse_compound();
    if (t.is(";")) {
      auto s = std::make_unique<Stmt>(Stmt::Kind::Empty, start);
      s->last_tok = pos_++;
      return s;
    }
    if (t.kind == TokenKind::Keyword) {
      if (t.text == "if") {
        auto s = std::make_unique<Stmt>(Stmt::Kind::If, start);
        ++pos_;
        parse_guard(*s);
        s->body.push_back(parse_statement());
        if (at("else")) {
          s->else_tok = pos_++;
          s->body.push_back(parse_statement());
        }
        s->last_tok = s->body.back()->last_tok;
        return s;
      }
      if (t.text == "switch" || t.text == "while") {
        auto s = std::make_unique<Stmt>(
            t.text == "switch" ? Stmt::Kind::Switch : Stmt::Kind::While, start);
        ++pos_;
        parse_guard(*s);
        s->body.push_back(parse_statement());
        s->last_tok = s->body.back()->last_tok;
        return s;
      }
      if (t.text == "do") {
        auto s = std::make_unique<Stmt>(Stmt::Kind::DoWhile, start);
        ++pos_;
        s->body.push_back(parse_statement());
        if (!at("while")) fail("expected 'while' after do body");
        s->while_tok = pos_++;
        parse_guard(*s);
        s->last_tok = pos_;
        expect(";");
        return s;
      }
      if (t.text == "for") {
        auto s = std::make_unique<Stmt>(Stmt::Kind::For, start);
        ++pos_;
        s->lparen = pos_;
        expect("(");
        if (!at(";")) {
          if (statement_is_declaration()) {
            auto d = std::make_unique<Stmt>(Stmt::Kind::Declaration, pos_);
            parse_specifiers();
            d->decls = parse_init_declarators();
            d->last_tok = pos_ - 1;
            s->for_init = std::move(d);
          } else {
            auto e = std::make_unique<Stmt>(Stmt::Kind::Expression, pos_);
            e->expr = parse_expression();
            e->last_tok = e->expr->last_tok;
            s->for_init = std::move(e);
          }
        }
        s->for_semi1 = pos_;
        expect(";");
        if (!at(";")) s->expr = parse_expression();
        s->for_semi2 = pos_;
        expect(";");
        if (!at(")")) s->for_step = parse_expression();
        s->rparen = pos_;
        expect(")");
        s->body.push_back(parse_statement());
        s->last_tok = s->body.back()->last_tok;
        return s;
      }
      if (t.text == "return") {
        auto s = std::make_unique<Stmt>(Stmt::Kind::Return, start);
        ++pos_;
        if (!at(";")) s->expr = parse_expression();
        s->last_tok = pos_;
        expect(";");
        return s;
      }
      if (t.text == "break" || t.text == "continue") {
        auto s = std::make_unique<Stmt>(
            t.text == "break" ? Stmt::Kind::Break : Stmt::Kind::Continue, start);
        ++pos_;
        s->last_tok = pos_;
        expect(";");
        return s;
      }
      if (t.text == "goto") {
        auto s = std::make_unique<Stmt>(Stmt::Kind::Goto, start);
        ++pos_;
        if (!cur().is_ident()) fail("expected label after goto");
        s->label = cur().text;
        ++pos_;
        s->last_tok = pos_;
        expect(";");
        return s;
      }
      if (t.text == "case") {
        auto s = std::make_unique<Stmt>(Stmt::Kind::Case, start);
        ++pos_;
        s->expr = parse_conditional();
        s->colon_tok = pos_;
        expect(":");
        s->body.push_back(parse_labeled_target());
        s->last_tok = s->body.back()->last_tok;
        return s;
      }
      if (t.text == "default") {
        auto s = std::make_unique<Stmt>(Stmt::Kind::Default, start);
        ++pos_;
        s->colon_tok = pos_;
        expect(":");
        s->body.push_back(parse_labeled_target());
        s->last_tok = s->body.back()->last_tok;
        return s;
      }
    }
    if (t.is_ident() && peek().is(":")) {
      auto s = std::make_unique<Stmt>(Stmt::Kind::Label, start);
      s->label = t.text;
      ++pos_;
      s->colon_tok = pos_++;
      s->body.push_back(parse_labeled_target());
      s->last_tok = s->body.back()->last_tok;
      return s;
    }
    if (statement_is_declaration()) return parse_declaration_statement();
    auto s = std::make_unique<Stmt>(Stmt::Kind::Expression, start);
    s->expr = parse_expression();
    s->last_tok = pos_;
    expect(";");
    return s;
  }

  // A label directly before '}' is accepted (C23) as labelling nothing.
  StmtPtr parse_labeled_target() {
    if (at("}")) {
      auto s = std::make_unique<Stmt>(Stmt::Kind::Empty, pos_);
      s->last_tok = pos_ - 1;
      return s;
    }
    if (statement_is_declaration()) return parse_declaration_statement();
    return parse_statement();
  }

  StmtPtr parse_declaration_statement() {
    auto s = std::make_unique<Stmt>(Stmt::Kind::Declaration, pos_);
    parse_specifiers();
    if (!at(";")) s->decls = parse_init_declarators();
    s->last_tok = pos_;
    expect(";");
    return s;
  }

  void parse_guard(Stmt& s) {
    s.lparen = pos_;
    expect("(");
    s.expr = parse_expression();
    s.rparen = pos_;
    expect(")");
  }

  StmtPtr parse_compound() {
    auto s = std::make_unique<Stmt>(Stmt::Kind::Compound, pos_);
    expect("{");
    while (!at("}")) {
      if (at_end()) fail("unterminated block");
      if (cur().kind == TokenKind::Directive) {
        ++pos_;
        continue;
      }
      if (statement_is_declaration()) {
        s->body.push_back(parse_declaration_statement());
      } else {
        s->body.push_back(parse_statement());
      }
    }
    s->last_tok = pos_;
    ++pos_;
    return s;
  }

  // ---- top level ----
  void parse_directive(std::uint32_t i) {
    std::string_view text = tok(i).text;
    size_t p = 1;
    auto skip_ws = [&] {
      while (p < text.size() && (text[p] == ' ' || text[p] == '\t')) ++p;
    };
    skip_ws();
    if (text.substr(p, 6) != "define") return;
    p += 6;
    skip_ws();
    size_t b = p;
    while (p < text.size() &&
           (std::isalnum(static_cast<unsigned char>(text[p])) || text[p] == '_'))
      ++p;
    if (p == b) return;
    MacroDef m;
    m.name = text.substr(b, p - b);
    m.tok = i;
    m.function_like = p < text.size() && text[p] == '(';
    tu_.macros.push_back(m);
  }

  void parse_external() {
    std::uint32_t start = pos_;
    bool is_typedef = false;
    bool had_specifiers = parse_specifiers(&is_typedef);
    if (at(";")) {
      // struct/union/enum definition without declarators
      if (had_specifiers) {
        GlobalDecl g;
        g.first_tok = start;
        g.last_tok = pos_;
        tu_.globals.push_back(std::move(g));
      }
      ++pos_;
      return;
    }
    Declarator first = parse_declarator(false);
    if (first.is_function && (at("{") || (!had_specifiers && !at(";")) ||
                              (!at(";") && !at(",") && !at("=")))) {
      // K&R parameter declarations sit between ')' and '{'.
      while (!at("{")) {
        if (at_end()) fail("expected function body");
        ++pos_;
      }
      FunctionDef fn;
      fn.name = first.name;
      fn.name_tok = first.name_tok;
      fn.first_tok = start;
      fn.lbrace_tok = pos_;
      fn.params = std::move(first.params);
      fn.body = parse_compound();
      fn.last_tok = fn.body->last_tok;
      tu_.functions.push_back(std::move(fn));
      return;
    }
    GlobalDecl g;
    g.first_tok = start;
    g.is_typedef = is_typedef;
    skip_attributes();
    if (at("=")) {
      ++pos_;
      first.init = parse_initializer();
      first.last_tok = first.init->last_tok;
    }
    g.decls.push_back(std::move(first));
    while (at(",")) {
      ++pos_;
      auto more = parse_init_declarators();
      for (auto& d : more) g.decls.push_back(std::move(d));
    }
    g.last_tok = pos_;
    expect(";");
    if (is_typedef)
      for (auto& d : g.decls)
        if (!d.name.empty()) tu_.typedef_names.insert(std::string(d.name));
    tu_.globals.push_back(std::move(g));
  }

  void recover(std::uint32_t start) {
    // Skip to after the next ';' at depth 0 or the '}' closing a top-level
    // brace, whichever comes first.
    pos_ = start;
    int depth = 0;
    while (!at_end()) {
      const Token& t = cur();
      if (t.is("{") || t.is("(") || t.is("[")) ++depth;
      if (t.is("}") || t.is(")") || t.is("]")) {
        --depth;
        if (depth <= 0 && t.is("}")) {
          ++pos_;
          if (at(";")) ++pos_;
          return;
        }
        if (depth < 0) depth = 0;
      }
      if (t.is(";") && depth == 0) {
        ++pos_;
        return;
      }
      ++pos_;
    }
  }

  void prescan_typedefs() {
    int depth = 0;
    for (std::uint32_t i = 0; i < toks_.size(); ++i) {
      const Token& t = toks_[i];
      if (t.is("{")) ++depth;
      if (t.is("}")) --depth;
      if (depth != 0 || !t.is("typedef")) continue;
      int d = 0;
      std::string_view last;
      std::string_view after_star;
      for (std::uint32_t j = i + 1; j < toks_.size(); ++j) {
        const Token& u = toks_[j];
        if (u.is("{") || u.is("(") || u.is("[")) ++d;
        if (u.is("}") || u.is(")") || u.is("]")) --d;
        if (u.is(";") && d == 0) break;
        if (u.is_ident()) {
          if (d == 0) last = u.text;
          if (after_star.empty() && j > 0 && toks_[j - 1].is("*") &&
              j > 1 && toks_[j - 2].is("("))
            after_star = u.text;
        }
      }
      if (!last.empty())
        tu_.typedef_names.insert(std::string(last));
      else if (!after_star.empty())
        tu_.typedef_names.insert(std::string(after_star));
    }
  }

  void parse_unit() {
    prescan_typedefs();
    while (!at_end()) {
      if (cur().kind == TokenKind::Directive) {
        parse_directive(pos_);
        ++pos_;
        continue;
      }
      if (at(";")) {
        ++pos_;
        continue;
      }
      std::uint32_t start = pos_;
      try {
        parse_external();
      } catch (const ParseError& e) {
        recover(start);
        std::uint32_t last = pos_ > start ? pos_ - 1 : start;
        tu_.issues.push_back(ParseIssue{start, last, e.what()});
        if (pos_ == start) ++pos_;
      }
    }
  }

  std::uint32_t pos_ = 0;

 private:
  TranslationUnit& tu_;
  const std::vector<Token>& toks_;
};

}  // namespace

bool looks_like_typedef_name(std::string_view name) {
  for (auto b : kBuiltinTypedefs)
    if (b == name) return true;
  return name.size() > 2 && name.substr(name.size() - 2) == "_t";
}

TranslationUnit parse_c(std::string_view source,
                        const std::set<std::string, std::less<>>& extra_typedefs) {
  TranslationUnit tu;
  LexResult lexed = lex_c(source);
  tu.tokens = std::move(lexed.tokens);
  tu.lex_errors = std::move(lexed.errors);
  tu.typedef_names = extra_typedefs;
  Parser p(tu);
  p.parse_unit();
  return tu;
}

ExprPtr parse_expression_text(std::string_view text) {
  TranslationUnit tu;
  LexResult lexed = lex_c(text);
  if (!lexed.errors.empty()) return nullptr;
  tu.tokens = std::move(lexed.tokens);
  if (tu.tokens.size() <= 1) return nullptr;
  Parser p(tu);
  try {
    auto e = p.parse_expression();
    if (!p.at_end()) return nullptr;
    return e;
  } catch (const ParseError&) {
    return nullptr;
  }
}

bool parses_as_expression(std::string_view text) {
  return parse_expression_text(text) != nullptr;
}

std::vector<std::string> translation_unit_errors(std::string_view text) {
  TranslationUnit tu = parse_c(text);
  std::vector<std::string> errors = tu.lex_errors;
  for (const auto& issue : tu.issues) errors.push_back(issue.message);
  return errors;
}

}  // namespace slicefuzz
