#include <fmt/format.h>

#include "slicefuzz/solver.hpp"

namespace slicefuzz {

std::string encode_input(const Bytes& input) {
  std::string out;
  out.reserve(input.size());
  for (std::uint8_t b : input) {
    if (b == '\\')
      out += "\\\\";
    else if (b >= 0x20 && b < 0x7f && b != '`')
      out += static_cast<char>(b);
    else
      out += fmt::format("\\x{:02x}", b);
  }
  return out;
}

namespace {

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

}  // namespace

std::optional<Bytes> decode_escaped(std::string_view text) {
  Bytes out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') continue;
    if (c != '\\') {
      out.push_back(static_cast<std::uint8_t>(c));
      continue;
    }
    if (++i >= text.size()) return std::nullopt;
    switch (text[i]) {
      case '\\': out.push_back('\\'); break;
      case 'n': out.push_back('\n'); break;
      case 't': out.push_back('\t'); break;
      case 'x': {
        if (i + 2 >= text.size()) return std::nullopt;
        int hi = hex_value(text[i + 1]);
        int lo = hex_value(text[i + 2]);
        if (hi < 0 || lo < 0) return std::nullopt;
        out.push_back(static_cast<std::uint8_t>(hi * 16 + lo));
        i += 2;
        break;
      }
      default:
        return std::nullopt;
    }
  }
  return out;
}

Prompt build_prompt(const std::string& flattened_slice, const Bytes& witness,
                    const std::string& roadblock_key) {
  Prompt p;
  p.roadblock_key = roadblock_key;
  p.slice_hash = fnv1a64(flattened_slice);

  // persona, task, step-by-step plan
  p.system_text =
      "You are an experienced security engineer who writes test inputs for C "
      "programs by reasoning about their code, the way a concolic testing "
      "engine would, but by reading the source instead of building formulas.\n"
      "\n"
      "You will get a slice of a C program and an input that drives the "
      "program to the slice's assert statement without satisfying it. Your "
      "job is to produce a new input under which the assert statement holds.\n"
      "\n"
      "Work in this order:\n"
      "1. Find the assert statement and the variables it checks.\n"
      "2. Follow the code backwards to see how those variables are computed "
      "from the bytes of the input.\n"
      "3. Decide which bytes of the given input have to change, and to what.\n"
      "4. Write out the complete new input.\n";

  // concrete-input requirement, output format, slice, witness
  p.user_text = fmt::format(
      "Answer with a concrete input, never with a script or a description "
      "of one. Small edits to the given input are fine, and so are drastic "
      "ones. Do not worry about whether the input is well-formed for the "
      "program as a whole; only the assertion matters.\n"
      "\n"
      "Output format: put the new input in exactly one fenced block that "
      "opens with ```input and closes with ```. Inside it write printable "
      "ASCII as is, a backslash as \\\\, and every other byte as \\xNN with "
      "two hex digits (a newline is \\x0a). Use no other fenced block named "
      "input in your answer.\n"
      "\n"
      "Program slice:\n"
      "```c\n"
      "{}"
      "```\n"
      "\n"
      "Given input ({} bytes), encoded the same way:\n"
      "```input\n"
      "{}\n"
      "```\n",
      flattened_slice, witness.size(), encode_input(witness));
  return p;
}

std::optional<Bytes> decode_response(std::string_view raw) {
  constexpr std::string_view open = "```input";
  std::optional<std::string_view> body;
  std::size_t pos = 0;
  int blocks = 0;
  while (true) {
    std::size_t at = raw.find(open, pos);
    if (at == std::string_view::npos) break;
    // the fence must start a line and end its line
    bool line_start = at == 0 || raw[at - 1] == '\n';
    std::size_t eol = raw.find('\n', at);
    if (eol == std::string_view::npos) return std::nullopt;
    std::string_view rest_of_line = raw.substr(at + open.size(), eol - at - open.size());
    if (!line_start || rest_of_line.find_first_not_of(" \t\r") != std::string_view::npos) {
      pos = at + open.size();
      continue;
    }
    std::size_t close = raw.find("```", eol + 1);
    if (close == std::string_view::npos) return std::nullopt;
    std::string_view content = raw.substr(eol + 1, close - eol - 1);
    if (!content.empty() && content.back() == '\n') content.remove_suffix(1);
    if (!content.empty() && content.back() == '\r') content.remove_suffix(1);
    body = content;
    ++blocks;
    pos = close + 3;
  }
  if (blocks != 1) return std::nullopt;
  return decode_escaped(*body);
}

}  // namespace slicefuzz
