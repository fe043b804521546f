#pragma once

#include <cstdint>
#include <deque>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "slicefuzz/ast_index.hpp"
#include "slicefuzz/tracer.hpp"
#include "slicefuzz/util.hpp"

namespace slicefuzz {

// ---- prompt ----

struct Prompt {
  std::string system_text;
  std::string user_text;
  std::string roadblock_key;
  std::uint64_t slice_hash = 0;

  std::size_t estimated_tokens() const {
    return (system_text.size() + user_text.size() + 3) / 4;
  }
};

/// Printable ASCII is kept except `\` (doubled) and the backtick; every
/// other byte becomes `\xNN`.
std::string encode_input(const Bytes& input);

/// Inverse of encode_input, also accepting `\n`, `\t` and raw newlines.
/// Empty on malformed escapes.
std::optional<Bytes> decode_escaped(std::string_view text);

Prompt build_prompt(const std::string& flattened_slice, const Bytes& witness,
                    const std::string& roadblock_key = {});

/// Extracts the single ```input block of a reply; empty when there is no
/// block, more than one, or the block is malformed.
std::optional<Bytes> decode_response(std::string_view raw_text);

// ---- backends ----

enum class BackendKind { Remote, Scripted, Bruteforce };
std::string_view to_string(BackendKind k);
std::optional<BackendKind> parse_backend(std::string_view s);

struct SolverConfig {
  BackendKind backend = BackendKind::Scripted;
  std::string model = "gpt-4o";
  int max_tokens = 4096;
  double temperature = 0.5;
  int query_budget = 3000;  // remote requests
  int test_budget = 3000;   // scripted/bruteforce solves
  double timeout_s = 60.0;
  int max_retries = 2;
  std::filesystem::path script;  // scripted replay fixture
  int trials = 20000;            // bruteforce executions per solve
  std::size_t max_prompt_tokens = 6000;
  std::string endpoint;  // SOLVER_ENDPOINT
  std::string api_key;   // SOLVER_API_KEY
};

struct SolveRequest {
  Prompt prompt;
  Bytes witness;
  CondId cond;
  std::uint32_t target_arm = 0;
  std::string flattened_slice;
  std::filesystem::path record_dir;  // empty: no recording
};

struct SolverResponse {
  std::string raw_text;
  std::optional<Bytes> extracted_input;
  double latency_s = 0;
  int requests = 0;        // remote requests issued for this solve
  bool hard_stop = false;  // budget exhausted, nothing was asked
  std::string error;
};

class Solver {
 public:
  virtual ~Solver() = default;
  virtual SolverResponse solve(const SolveRequest& req) = 0;
  virtual BackendKind kind() const = 0;

  int budget_left() const { return budget_; }
  int requests_issued() const { return issued_; }

 protected:
  explicit Solver(int budget) : budget_(budget) {}
  int budget_;
  int issued_ = 0;
};

/// Chat-completion client. One request per attempt; each attempt, retries
/// included, takes one unit of budget.
class RemoteSolver : public Solver {
 public:
  explicit RemoteSolver(SolverConfig cfg);
  SolverResponse solve(const SolveRequest& req) override;
  BackendKind kind() const override { return BackendKind::Remote; }

  std::string request_body(const Prompt& p) const;

 private:
  SolverConfig cfg_;
};

struct ScriptEntry {
  std::string roadblock_key;
  std::string response_text;
};

/// Replays canned replies: entries for the exact roadblock key first, then
/// entries keyed "*", each in file order.
class ScriptedSolver : public Solver {
 public:
  ScriptedSolver(std::vector<ScriptEntry> entries, int test_budget);
  static std::vector<ScriptEntry> load(const std::filesystem::path& p);
  SolverResponse solve(const SolveRequest& req) override;
  BackendKind kind() const override { return BackendKind::Scripted; }

 private:
  std::map<std::string, std::deque<std::string>> queues_;
};

/// Mutates the witness by re-executing the subject until the target arm
/// shows up: slice literals and their integer encodings written over or
/// inserted at each offset, then single-byte substitutions.
class BruteforceSolver : public Solver {
 public:
  BruteforceSolver(const Program& program, RunOptions run, int trials,
                   int test_budget);
  SolverResponse solve(const SolveRequest& req) override;
  BackendKind kind() const override { return BackendKind::Bruteforce; }

  static std::vector<Bytes> candidates(std::string_view flattened_slice);
  std::uint64_t executions() const { return execs_; }

 private:
  const Program& program_;
  RunOptions run_;
  int trials_;
  std::uint64_t execs_ = 0;
};

std::unique_ptr<Solver> make_solver(const SolverConfig& cfg,
                                    const Program* program,
                                    const RunOptions& run);

/// Writes `name` under `dir` atomically; no-op for an empty dir.
void record_exchange(const std::filesystem::path& dir, const std::string& name,
                     std::string_view content);

}  // namespace slicefuzz
