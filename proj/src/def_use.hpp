#pragma once

// Read/write sets of C expressions, shared by the index builder and get_vars.

#include <functional>
#include <string_view>
#include <vector>

#include "slicefuzz/ast_index.hpp"
#include "slicefuzz/c_parser.hpp"

namespace slicefuzz::detail {

struct NameClassifier {
  // Declaration id visible for the name, or -1.
  std::function<std::int32_t(std::string_view)> resolve;
  // Function defined or declared anywhere in the indexed files.
  std::function<bool(std::string_view)> is_function;
  // Function with a body in the indexed files (its statements are traced).
  std::function<bool(std::string_view)> is_traced;
  // Enum constant or object-like macro.
  std::function<bool(std::string_view)> is_constant;
  // Declared as a pointer or array.
  std::function<bool(std::int32_t)> is_pointer_decl;
};

struct DefUse {
  std::vector<VarRef> reads;
  std::vector<VarRef> writes;
  std::vector<CallSite> calls;

  void add_read(VarRef v);
  void add_write(VarRef v);
  void normalize();  // sort and dedupe
};

void collect_expr(const Expr& e, const NameClassifier& names, DefUse& out);

}  // namespace slicefuzz::detail
