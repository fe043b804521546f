#include "slicefuzz/lexer.hpp"

#include <array>
#include <cctype>

namespace slicefuzz {

namespace {

constexpr std::array<std::string_view, 44> kKeywords = {
    "auto",     "break",    "case",     "char",     "const",   "continue",
    "default",  "do",       "double",   "else",     "enum",    "extern",
    "float",    "for",      "goto",     "if",       "inline",  "int",
    "long",     "register", "restrict", "return",   "short",   "signed",
    "sizeof",   "static",   "struct",   "switch",   "typedef", "union",
    "unsigned", "void",     "volatile", "while",    "_Bool",   "_Complex",
    "_Atomic",  "_Noreturn", "_Static_assert", "_Alignas", "_Alignof",
    "__inline", "__restrict", "__attribute__"};

constexpr std::array<std::string_view, 23> kDeclKeywords = {
    "auto",     "char",   "const",    "double",   "enum",   "extern",
    "float",    "inline", "int",      "long",     "register", "restrict",
    "short",    "signed", "static",   "struct",   "typedef", "union",
    "unsigned", "void",   "volatile", "_Bool",    "_Atomic"};

// Longest first so greedy matching works.
constexpr std::array<std::string_view, 48> kPuncts = {
    "...", "<<=", ">>=", "->", "++", "--", "<<", ">>", "<=", ">=", "==", "!=",
    "&&",  "||",  "*=",  "/=", "%=", "+=", "-=", "&=", "^=", "|=", "##", "[",
    "]",   "(",   ")",   "{",  "}",  ".",  "&",  "*",  "+",  "-",  "~",  "!",
    "/",   "%",   "<",   ">",  "^",  "|",  "?",  ":",  ";",  "=",  ",",  "#"};

bool ident_start(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '$';
}
bool ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '$';
}

}  // namespace

bool is_c_keyword(std::string_view word) {
  for (auto k : kKeywords)
    if (k == word) return true;
  return false;
}

bool is_decl_specifier_keyword(std::string_view word) {
  for (auto k : kDeclKeywords)
    if (k == word) return true;
  return false;
}

LexResult lex_c(std::string_view src) {
  LexResult out;
  std::uint32_t i = 0, line = 1;
  const std::uint32_t n = static_cast<std::uint32_t>(src.size());
  bool at_line_start = true;

  auto push = [&](TokenKind kind, std::uint32_t b, std::uint32_t e,
                  std::uint32_t ln) {
    out.tokens.push_back(Token{kind, b, e, ln, src.substr(b, e - b)});
  };

  while (i < n) {
    char c = src[i];
    if (c == '\n') {
      ++line;
      ++i;
      at_line_start = true;
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (c == '/' && i + 1 < n && src[i + 1] == '/') {
      while (i < n && src[i] != '\n') ++i;
      continue;
    }
    if (c == '/' && i + 1 < n && src[i + 1] == '*') {
      std::uint32_t start_line = line;
      i += 2;
      while (i + 1 < n && !(src[i] == '*' && src[i + 1] == '/')) {
        if (src[i] == '\n') ++line;
        ++i;
      }
      if (i + 1 >= n) {
        out.errors.push_back("unterminated comment starting at line " +
                             std::to_string(start_line));
        i = n;
      } else {
        i += 2;
      }
      continue;
    }
    if (c == '#' && at_line_start) {
      std::uint32_t b = i, ln = line;
      while (i < n && src[i] != '\n') {
        if (src[i] == '\\' && i + 1 < n && src[i + 1] == '\n') {
          i += 2;
          ++line;
          continue;
        }
        if (src[i] == '/' && i + 1 < n && src[i + 1] == '*') {
          i += 2;
          while (i + 1 < n && !(src[i] == '*' && src[i + 1] == '/')) {
            if (src[i] == '\n') ++line;
            ++i;
          }
          i = i + 2 <= n ? i + 2 : n;
          continue;
        }
        if (src[i] == '/' && i + 1 < n && src[i + 1] == '/') {
          while (i < n && src[i] != '\n') ++i;
          break;
        }
        ++i;
      }
      std::uint32_t e = i;
      while (e > b && std::isspace(static_cast<unsigned char>(src[e - 1]))) --e;
      push(TokenKind::Directive, b, e, ln);
      continue;
    }
    at_line_start = false;
    std::uint32_t b = i;
    if (ident_start(c)) {
      while (i < n && ident_char(src[i])) ++i;
      auto word = src.substr(b, i - b);
      // String/char literal prefixes (L"", u8"", ...).
      if (i < n && (src[i] == '"' || src[i] == '\'') &&
          (word == "L" || word == "u" || word == "U" || word == "u8")) {
        char q = src[i++];
        while (i < n && src[i] != q && src[i] != '\n') {
          if (src[i] == '\\' && i + 1 < n) ++i;
          ++i;
        }
        if (i < n && src[i] == q) ++i;
        push(q == '"' ? TokenKind::String : TokenKind::Char, b, i, line);
        continue;
      }
      push(is_c_keyword(word) ? TokenKind::Keyword : TokenKind::Identifier, b,
           i, line);
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '.' && i + 1 < n &&
         std::isdigit(static_cast<unsigned char>(src[i + 1])))) {
      while (i < n) {
        char d = src[i];
        if (ident_char(d) || d == '.') {
          ++i;
        } else if ((d == '+' || d == '-') && i > b &&
                   (src[i - 1] == 'e' || src[i - 1] == 'E' ||
                    src[i - 1] == 'p' || src[i - 1] == 'P') &&
                   !(src[b] == '0' && b + 1 < n &&
                     (src[b + 1] == 'x' || src[b + 1] == 'X') &&
                     (src[i - 1] == 'e' || src[i - 1] == 'E'))) {
          ++i;
        } else {
          break;
        }
      }
      push(TokenKind::Number, b, i, line);
      continue;
    }
    if (c == '"' || c == '\'') {
      char q = c;
      ++i;
      while (i < n && src[i] != q) {
        if (src[i] == '\n') break;
        if (src[i] == '\\' && i + 1 < n) ++i;
        ++i;
      }
      if (i < n && src[i] == q) {
        ++i;
      } else {
        out.errors.push_back("unterminated literal at line " +
                             std::to_string(line));
      }
      push(q == '"' ? TokenKind::String : TokenKind::Char, b, i, line);
      continue;
    }
    bool matched = false;
    for (auto p : kPuncts) {
      if (src.substr(i, p.size()) == p) {
        i += static_cast<std::uint32_t>(p.size());
        push(TokenKind::Punct, b, i, line);
        matched = true;
        break;
      }
    }
    if (!matched) {
      out.errors.push_back(std::string("stray character '") + c +
                           "' at line " + std::to_string(line));
      ++i;
    }
  }
  out.tokens.push_back(Token{TokenKind::End, n, n, line, {}});
  return out;
}

std::string strip_c_comments(std::string_view src,
                             std::string_view keep_marker) {
  std::string out;
  out.reserve(src.size());
  size_t i = 0;
  while (i < src.size()) {
    char c = src[i];
    if (c == '"' || c == '\'') {
      char q = c;
      out += src[i++];
      while (i < src.size() && src[i] != q && src[i] != '\n') {
        if (src[i] == '\\' && i + 1 < src.size()) out += src[i++];
        out += src[i++];
      }
      if (i < src.size() && src[i] == q) out += src[i++];
      continue;
    }
    if (c == '/' && i + 1 < src.size() && src[i + 1] == '/') {
      size_t e = src.find('\n', i);
      if (e == std::string_view::npos) e = src.size();
      // drop trailing spaces left before the comment
      while (!out.empty() && (out.back() == ' ' || out.back() == '\t'))
        out.pop_back();
      i = e;
      continue;
    }
    if (c == '/' && i + 1 < src.size() && src[i + 1] == '*') {
      if (!keep_marker.empty() && src.substr(i, keep_marker.size()) == keep_marker) {
        out += keep_marker;
        i += keep_marker.size();
        continue;
      }
      size_t e = src.find("*/", i + 2);
      e = e == std::string_view::npos ? src.size() : e + 2;
      out += ' ';
      i = e;
      continue;
    }
    out += src[i++];
  }
  return out;
}

}  // namespace slicefuzz
