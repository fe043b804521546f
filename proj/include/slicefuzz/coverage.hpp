#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "slicefuzz/ast_index.hpp"
#include "slicefuzz/tracer.hpp"

namespace slicefuzz {

using ArmPair = std::pair<CondId, std::uint32_t>;

/// One guard evaluation seen in a trace; `arm` is absent when the taken arm
/// cannot be decided (reach-only).
struct GuardHit {
  CondId cond;
  std::optional<std::uint32_t> arm;
  std::size_t pos = 0;
};

/// Arm taken by the guard record at `pos`: the arm whose body holds the next
/// record of the same call frame; synthetic arms when control leaves every
/// body; the recorded guard outcome when bodies are statement-less or the
/// guard is the final record.
std::optional<std::uint32_t> covered_arm(const AstIndex& ix,
                                         const ExecutionTrace& trace,
                                         const FrameMap& frames,
                                         std::size_t pos);

/// Convenience form for the first evaluation of `cond` in `trace`.
std::optional<std::uint32_t> covered_arm(const Conditional& cond,
                                         const ExecutionTrace& trace,
                                         const AstIndex& ix);

std::vector<GuardHit> guard_hits(const AstIndex& ix, const ExecutionTrace& trace);
std::set<ArmPair> covered_pairs(const AstIndex& ix, const ExecutionTrace& trace);

struct ArmStatus {
  bool covered = false;
  std::vector<std::string> witness_seeds;  // most recent last
};

struct CondCoverage {
  std::map<std::uint32_t, ArmStatus> arms;
  std::vector<std::string> reach_witnesses;  // most recent last
};

class CoverageReport {
 public:
  std::map<CondId, CondCoverage> conds;

  bool reached(const CondId& c) const { return conds.count(c) > 0; }
  bool fully_covered(const CondId& c, const AstIndex& ix) const;
  bool arm_covered(const CondId& c, std::uint32_t arm) const;
  std::size_t arms_covered() const;
  std::set<ArmPair> pairs() const;
  std::string to_json(const AstIndex& ix) const;
};

using InterestMap = std::map<CondId, std::int64_t>;

struct Roadblock {
  CondId cond;
  std::uint32_t target_arm = 0;
  std::string seed;  // witness seed id (corpus file name)
};

struct CoverageConfig {
  std::int64_t reward_delta = 2;
  std::int64_t select_decrement = 1;
  std::uint64_t rng_seed = 1;
};

/// Produces a trace for a corpus file; empty on failure (seed is retried on
/// the next analysis pass).
using TraceProvider =
    std::function<std::optional<ExecutionTrace>(const std::filesystem::path&)>;

class CoverageAnalyzer {
 public:
  CoverageAnalyzer(const AstIndex& ix, CoverageConfig cfg = {});

  /// Analyzes files of `queue_dir` not seen before (keyed by name, size and
  /// modification time). Returns the number of newly analyzed seeds.
  std::size_t analyze_corpus(const std::filesystem::path& queue_dir,
                             const TraceProvider& traces,
                             bool full_rebuild = false);

  /// Folds one seed's trace into the report and interest map.
  void add_trace(const std::string& seed_id, std::size_t seed_size,
                 const ExecutionTrace& trace);

  std::optional<Roadblock> retrieve_roadblock();
  void reward(const CondId& c);

  const CoverageReport& report() const { return report_; }
  const InterestMap& interest() const { return interest_; }
  InterestMap& mutable_interest() { return interest_; }

  /// Shortest witness that reached `c`, most recent among equals.
  std::optional<std::string> choose_witness(const CondId& c) const;

  void save(const std::filesystem::path& dir) const;

 private:
  void refresh_interest(const std::set<CondId>& touched);

  const AstIndex& ix_;
  CoverageConfig cfg_;
  std::mt19937_64 rng_;
  CoverageReport report_;
  InterestMap interest_;
  std::map<std::string, std::size_t> seed_sizes_;
  std::map<std::string, std::pair<std::uintmax_t, std::int64_t>> analyzed_;
};

}  // namespace slicefuzz
