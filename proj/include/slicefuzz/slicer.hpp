#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "slicefuzz/ast_index.hpp"
#include "slicefuzz/tracer.hpp"

namespace slicefuzz {

class SliceError : public Error {
 public:
  using Error::Error;
};

/// Assertion expressing the requirement of `target_arm`, e.g.
/// `assert(!((x > 0)));` for the else arm of `if ((x > 0))`.
std::string negate_condition(const AstIndex& ix, const Conditional& cond,
                             std::uint32_t target_arm);

/// Variables read by the guard of `cond`.
std::vector<std::string> get_vars(const AstIndex& ix, const Conditional& cond);

/// Source needed to show `node` in place: enclosing control headers and
/// braces plus the function signature and closing brace.
std::vector<FileRange> get_context(const AstIndex& ix, std::uint32_t node);

struct SlicedTrace {
  std::vector<std::size_t> positions;  // ascending, all before guard_pos
  std::size_t guard_pos = 0;
};

/// Where the assertion goes and the exact text inserted there.
struct Insertion {
  FileId file_id = 0;
  std::uint32_t byte = 0;
  std::string text;
};

struct FlattenOptions {
  bool strip_comments = false;
  /// Pieces printed with replacement text, e.g. loop bodies shown as
  /// `{ /* ... */ }` when shrinking.
  std::map<FileRange, std::string> overrides;
};

inline constexpr std::string_view kElision = "/* ... */";

/// Renders `ranges` per file in source order. Ranges are widened to whole
/// lines when only whitespace surrounds them; non-whitespace gaps become
/// elision markers.
std::string flatten_slice(const AstIndex& ix, std::vector<FileRange> ranges,
                          const Insertion& assertion,
                          const FlattenOptions& opts = {});

struct SliceOptions {
  std::size_t max_chars = 12000;
};

struct Slice {
  CondId cond;
  std::uint32_t target_arm = 0;
  SlicedTrace trace;
  std::set<TraceRecord> statements;  // retained statements, by trace key
  std::vector<FileRange> ranges;     // source ordered, deduplicated
  std::string assertion_text;
  std::string flattened;
  std::vector<std::string> vars;  // final working set, for diagnostics
  bool widened = false;
  bool shrunk = false;
  std::vector<std::string> warnings;
};

/// Dynamic backward slice of `trace` for the guard of `cond`. The trace is
/// cut at the guard's first evaluation when it runs further.
Slice build_slice(const AstIndex& ix, const ExecutionTrace& trace,
                  const CondId& cond, std::uint32_t target_arm,
                  const SliceOptions& opts = {});

}  // namespace slicefuzz
