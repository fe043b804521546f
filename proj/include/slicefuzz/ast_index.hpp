#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "slicefuzz/source.hpp"

namespace slicefuzz {

enum class CondKind { If, Switch, While, For, DoWhile };
enum class ArmKind { Then, Else, Case, Default, LoopBody, LoopExit };

std::string_view to_string(CondKind k);
std::string_view to_string(ArmKind k);

/// Conditionals are keyed by file and the first byte of their guard.
struct CondId {
  FileId file_id = 0;
  std::uint32_t start_byte = 0;

  std::string str() const;
  static std::optional<CondId> parse(std::string_view text);

  friend bool operator==(const CondId&, const CondId&) = default;
  friend auto operator<=>(const CondId&, const CondId&) = default;
};

struct Arm {
  std::uint32_t arm_id = 0;
  ArmKind kind = ArmKind::Then;
  std::optional<std::string> guard_value;  // case label expression text
  FileRange body_range;
  FileRange label_range;  // "case X:" for switch arms
  bool synthetic = false;
  bool has_statements = false;
};

struct Conditional {
  CondId cond_id;
  CondKind kind = CondKind::If;
  FileRange guard_range;  // parenthesized guard; bare condition for `for`
  FileRange expr_range;   // guard without the parentheses
  FileRange stmt_range;   // whole statement
  std::uint32_t guard_line = 0;
  std::uint32_t node = 0;  // statement node emitted for the guard
  std::vector<Arm> arms;
  std::string function;
  FileRange function_range;
  // Pieces that keep the construct parseable when only its header matters,
  // e.g. `if (g)` plus the braces of the then-branch.
  std::vector<FileRange> skeleton;
};

enum class NodeKind {
  Expression,
  Declaration,
  Return,
  Break,
  Continue,
  Goto,
  Guard,
  ForInit,
  ForStep,
};

std::string_view to_string(NodeKind k);

/// An identifier occurrence resolved against the index's declarations.
/// `decl` is -1 for names with no visible declaration (library globals).
struct VarRef {
  std::string name;
  std::int32_t decl = -1;

  friend bool operator==(const VarRef&, const VarRef&) = default;
  friend auto operator<=>(const VarRef&, const VarRef&) = default;
};

struct CallArg {
  std::optional<VarRef> base;  // object the argument points into, if any
  bool address_of = false;
};

struct CallSite {
  std::string callee;
  bool traced = false;  // defined in an indexed file
  std::vector<CallArg> args;
};

struct StmtNode {
  std::uint32_t id = 0;
  NodeKind kind = NodeKind::Expression;
  FileId file_id = 0;
  std::uint32_t line = 0;
  std::uint16_t ordinal = 0;
  FileRange range;        // text the node covers
  FileRange outer_range;  // ForInit declarations: the whole `for` statement
  std::int32_t function = -1;
  std::optional<CondId> cond;
  std::vector<VarRef> reads;
  std::vector<VarRef> writes;
  std::vector<CallSite> calls;
  std::vector<FileRange> context;  // enclosing control structure + function
};

enum class DeclScope { Global, Local, Param };

struct Declaration {
  std::string name;
  DeclScope scope = DeclScope::Global;
  FileRange range;        // whole declaration statement
  FileRange scope_range;  // where the name is visible
  std::int32_t function = -1;
  std::int32_t node = -1;    // statement node of a local declaration
  std::int32_t global = -1;  // index into globals() for file-scope names
  bool is_pointer = false;
};

struct FunctionInfo {
  std::string name;
  FileId file_id = 0;
  FileRange range;
  FileRange signature;  // through the opening brace
  FileRange close_brace;
  std::vector<std::int32_t> params;  // declaration ids
  std::int32_t entry_node = -1;      // first node executed on entry
};

/// A file-scope declaration with every name it introduces (variables,
/// typedefs, tags, enum constants).
struct GlobalItem {
  FileRange range;
  std::vector<std::string> names;
};

struct MacroItem {
  std::string name;
  FileRange range;
  bool function_like = false;
};

class AstIndex {
 public:
  /// Loads and indexes the given files; file ids follow argument order.
  static AstIndex build(const std::vector<std::string>& source_paths);
  static AstIndex build(std::vector<SourcePtr> files);

  const std::vector<SourcePtr>& files() const { return files_; }
  const SourceFile& file(FileId id) const { return *files_.at(id); }
  std::optional<FileId> find_file(std::string_view name_or_path) const;

  const std::map<CondId, Conditional>& conditionals() const {
    return conditionals_;
  }
  const Conditional* conditional(const CondId& id) const;
  const Conditional* conditional_at(FileId file, std::uint32_t line) const;

  const std::vector<StmtNode>& nodes() const { return nodes_; }
  const StmtNode& node(std::uint32_t id) const { return nodes_.at(id); }
  std::optional<std::uint32_t> node_at(FileId file, std::uint32_t line,
                                       std::uint16_t ordinal) const;
  std::vector<std::uint32_t> nodes_on_line(FileId file,
                                           std::uint32_t line) const;

  const std::vector<Declaration>& declarations() const { return decls_; }
  const std::vector<FunctionInfo>& functions() const { return functions_; }
  const FunctionInfo* function(std::string_view name) const;
  std::int32_t function_index(std::string_view name) const;
  const std::vector<GlobalItem>& globals() const { return globals_; }
  const std::vector<MacroItem>& macros() const { return macros_; }
  bool is_constant(std::string_view name) const {
    return constants_.count(name) > 0;
  }
  bool is_function_name(std::string_view name) const {
    return function_names_.count(name) > 0;
  }

  /// Innermost declaration of `name` visible at `at`, falling back to a
  /// file-scope declaration in any indexed file.
  std::optional<FileRange> resolve_declaration(std::string_view name,
                                               const FileRange& at) const;
  std::int32_t resolve(std::string_view name, FileId file,
                       std::uint32_t byte) const;

  const std::vector<std::string>& warnings() const { return warnings_; }

  /// Debug dump: [{cond_id, file, line, kind, arms:[{id, kind}]}].
  std::string dump_json() const;

 private:
  friend class IndexBuilder;

  std::vector<SourcePtr> files_;
  std::map<CondId, Conditional> conditionals_;
  std::vector<StmtNode> nodes_;
  std::map<std::tuple<FileId, std::uint32_t, std::uint16_t>, std::uint32_t>
      node_keys_;
  std::vector<Declaration> decls_;
  std::vector<FunctionInfo> functions_;
  std::vector<GlobalItem> globals_;
  std::vector<MacroItem> macros_;
  std::set<std::string, std::less<>> constants_;
  std::set<std::string, std::less<>> function_names_;
  std::vector<std::string> warnings_;
};

/// Identifiers read by a standalone C expression, excluding function names
/// and enum/macro constants known to `index` (the index may be empty).
std::vector<std::string> get_vars(std::string_view expression,
                                  const AstIndex* index = nullptr);

}  // namespace slicefuzz
