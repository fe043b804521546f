#pragma once

#include <cstdint>
#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "slicefuzz/lexer.hpp"

namespace slicefuzz {

// Syntax trees refer to tokens by index; token text views point into the
// source buffer handed to parse_c, which must outlive the tree.

struct Expr {
  enum class Kind {
    Ident,
    Literal,
    Unary,    // prefix operator; op holds its text
    Postfix,  // x++ / x--
    Binary,
    Assign,
    Ternary,
    Call,     // kids[0] callee, kids[1..] arguments
    Index,
    Member,   // kids[0] base; op holds the member name
    Cast,     // kids[0] operand
    Sizeof,   // kids empty when the operand is a type name
    Comma,
    Paren,
    InitList,
  };

  Kind kind;
  std::string_view op;
  std::uint32_t first_tok = 0;
  std::uint32_t last_tok = 0;  // inclusive
  std::vector<std::unique_ptr<Expr>> kids;
  bool arrow = false;

  Expr(Kind k, std::uint32_t first, std::uint32_t last)
      : kind(k), first_tok(first), last_tok(last) {}
};

using ExprPtr = std::unique_ptr<Expr>;

struct Declarator {
  std::string_view name;  // empty for abstract declarators
  std::uint32_t name_tok = 0;
  std::uint32_t first_tok = 0;
  std::uint32_t last_tok = 0;
  bool is_pointer = false;   // pointer, array, or function pointer
  bool is_function = false;  // declares a function (prototype or definition)
  ExprPtr init;
  std::vector<Declarator> params;  // only filled when is_function
};

struct Stmt {
  enum class Kind {
    Compound,
    If,
    Switch,
    While,
    DoWhile,
    For,
    Return,
    Break,
    Continue,
    Goto,
    Label,
    Case,
    Default,
    Expression,
    Declaration,
    Empty,
  };

  Kind kind;
  std::uint32_t first_tok = 0;
  std::uint32_t last_tok = 0;  // inclusive
  ExprPtr expr;                // guard, expression, return value, case value
  std::uint32_t lparen = 0;    // guard parens of if/switch/while/do-while
  std::uint32_t rparen = 0;
  std::vector<std::unique_ptr<Stmt>> body;  // compound items; if: then[,else]
  std::unique_ptr<Stmt> for_init;
  ExprPtr for_step;
  std::uint32_t for_semi1 = 0;
  std::uint32_t for_semi2 = 0;
  std::uint32_t else_tok = 0;   // 0 when absent
  std::uint32_t while_tok = 0;  // do-while
  std::uint32_t colon_tok = 0;  // label/case/default
  std::vector<Declarator> decls;
  std::string_view label;

  Stmt(Kind k, std::uint32_t first) : kind(k), first_tok(first) {}
};

using StmtPtr = std::unique_ptr<Stmt>;

struct FunctionDef {
  std::string_view name;
  std::uint32_t name_tok = 0;
  std::uint32_t first_tok = 0;
  std::uint32_t lbrace_tok = 0;
  std::uint32_t last_tok = 0;
  std::vector<Declarator> params;
  StmtPtr body;
};

struct GlobalDecl {
  std::uint32_t first_tok = 0;
  std::uint32_t last_tok = 0;
  bool is_typedef = false;
  std::vector<Declarator> decls;
};

struct MacroDef {
  std::string_view name;
  std::uint32_t tok = 0;
  bool function_like = false;
};

struct EnumConstant {
  std::string_view name;
  std::uint32_t tok = 0;
  std::uint32_t decl_first_tok = 0;
  std::uint32_t decl_last_tok = 0;
};

struct ParseIssue {
  std::uint32_t first_tok = 0;
  std::uint32_t last_tok = 0;
  std::string message;
};

struct TranslationUnit {
  std::vector<Token> tokens;
  std::vector<FunctionDef> functions;
  std::vector<GlobalDecl> globals;
  std::vector<MacroDef> macros;
  std::vector<EnumConstant> enum_constants;
  std::set<std::string, std::less<>> typedef_names;
  std::vector<ParseIssue> issues;
  std::vector<std::string> lex_errors;

  bool ok() const { return issues.empty() && lex_errors.empty(); }
};

class ParseError : public std::runtime_error {
 public:
  ParseError(std::uint32_t tok, const std::string& what)
      : std::runtime_error(what), tok_(tok) {}
  std::uint32_t token() const { return tok_; }

 private:
  std::uint32_t tok_;
};

/// Parses a C translation unit. Malformed top-level regions are skipped and
/// reported in `issues`; everything else is still returned.
TranslationUnit parse_c(std::string_view source,
                        const std::set<std::string, std::less<>>& extra_typedefs = {});

/// True when `text` is exactly one C expression.
bool parses_as_expression(std::string_view text);

/// Parses `text` as one expression; null on failure. Identifier and operator
/// views in the tree point into `text`.
ExprPtr parse_expression_text(std::string_view text);

/// Empty when `text` parses as a sequence of declarations and function
/// definitions; otherwise the diagnostics.
std::vector<std::string> translation_unit_errors(std::string_view text);

bool looks_like_typedef_name(std::string_view name);

}  // namespace slicefuzz
