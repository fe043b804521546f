#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "slicefuzz/ast_index.hpp"
#include "slicefuzz/coverage.hpp"
#include "slicefuzz/tracer.hpp"

namespace slicefuzz {

enum class Difficulty { MagicBytes, Arithmetic, MultiPart, SurrogatePair, HashGated };
std::string_view to_string(Difficulty d);
std::optional<Difficulty> parse_difficulty(std::string_view s);

struct GauntletTarget {
  std::string cond;  // "name.c:line"
  std::uint32_t arm = 0;
  std::filesystem::path witness;  // input reaching the guard
  bool scripted = false;          // solved by the case's replay fixture
};

/// gauntlet/<name>/{case.toml, src/, seeds/, witness/, expect/arms.json,
/// expect/slice.<file>_<line>.txt, replay.json}
struct GauntletCase {
  std::string name;
  std::filesystem::path dir;
  std::filesystem::path config;
  Difficulty difficulty = Difficulty::MagicBytes;
  std::vector<GauntletTarget> targets;  // in the order they can be broken
  std::filesystem::path replay;         // empty when absent
  std::size_t campaign_target = 0;      // what an end-to-end run must cover

  const GauntletTarget& final_target() const { return targets.back(); }
  const GauntletTarget& e2e_target() const { return targets.at(campaign_target); }
  std::filesystem::path slice_expectation(const GauntletTarget& t) const;
};

GauntletCase load_case(const std::filesystem::path& dir);
std::vector<GauntletCase> load_gauntlet(const std::filesystem::path& root);
std::filesystem::path default_gauntlet_root();

// ---- oracles ----

struct ReferenceSlice {
  std::set<std::size_t> positions;  // trace positions, guard excluded
  std::set<TraceRecord> statements;
};

/// Dynamic data-dependence slice of the last record of `trace` (a guard),
/// computed forward with per-position last-writer sets. Shares nothing
/// with the slicer's backward pass.
ReferenceSlice reference_slice(const AstIndex& ix, const ExecutionTrace& trace);

struct OracleCoverage {
  std::set<ArmPair> covered;
  std::set<CondId> reached;
};

/// Union of the subject's own arm events and guard records over `traces`.
OracleCoverage oracle_coverage(const GuardTable& guards,
                               const std::vector<ExecutionTrace>& traces);

std::string format_statements(const AstIndex& ix, const std::set<TraceRecord>& s);
std::set<TraceRecord> parse_statements(const AstIndex& ix, std::string_view text);

// ---- corpus validation ----

struct ValidationOptions {
  std::filesystem::path work_dir;  // builds go here
  int trials = 20000;              // bruteforce trials per solvable target
  int hash_trials = 100000;        // trials spent on a hash gate
  bool write_expectations = false;
  std::vector<std::string> only;   // case names; empty = all
};

struct ValidationIssue {
  std::string case_name;
  std::string message;
};

struct CaseValidation {
  std::string name;
  Difficulty difficulty = Difficulty::MagicBytes;
  std::size_t loc = 0;
  std::vector<std::string> solved;    // targets the configured solver broke
  std::vector<std::string> unsolved;
  std::vector<ValidationIssue> issues;
};

std::vector<CaseValidation> validate_corpus(const std::filesystem::path& root,
                                            const ValidationOptions& opts);

}  // namespace slicefuzz
