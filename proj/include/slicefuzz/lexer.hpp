#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace slicefuzz {

enum class TokenKind {
  Identifier,
  Keyword,
  Number,
  Char,
  String,
  Punct,
  Directive,
  End,
};

struct Token {
  TokenKind kind = TokenKind::End;
  std::uint32_t begin = 0;
  std::uint32_t end = 0;
  std::uint32_t line = 0;
  std::string_view text;

  bool is(std::string_view punct_or_kw) const {
    return (kind == TokenKind::Punct || kind == TokenKind::Keyword) &&
           text == punct_or_kw;
  }
  bool is_ident() const { return kind == TokenKind::Identifier; }
};

struct LexResult {
  std::vector<Token> tokens;  // always terminated by an End token
  std::vector<std::string> errors;
};

/// Tokenizes C source. Comments are dropped; each preprocessor directive
/// (including backslash continuations) becomes one Directive token.
LexResult lex_c(std::string_view source);

bool is_c_keyword(std::string_view word);

/// Keywords that can begin a declaration specifier sequence.
bool is_decl_specifier_keyword(std::string_view word);

/// Removes comments, leaving every byte that is not part of a comment in
/// place. Used when shrinking oversized slices.
std::string strip_c_comments(std::string_view source,
                             std::string_view keep_marker = {});

}  // namespace slicefuzz
