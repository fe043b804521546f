#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "slicefuzz/coverage.hpp"
#include "slicefuzz/tracer.hpp"

namespace slicefuzz {

// ---- clocks ----

class CampaignClock {
 public:
  virtual ~CampaignClock() = default;
  virtual double now() const = 0;  // seconds since campaign start
  virtual void on_exec() {}
};

class SteadyClock : public CampaignClock {
 public:
  SteadyClock() : start_(std::chrono::steady_clock::now()) {}
  double now() const override {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

/// Time advances only with executions, so single-threaded campaigns are
/// reproducible.
class LogicalClock : public CampaignClock {
 public:
  explicit LogicalClock(double seconds_per_exec = 0.001) : tick_(seconds_per_exec) {}
  double now() const override { return t_; }
  void on_exec() override { t_ += tick_; }
  void advance(double s) { t_ += s; }

 private:
  double tick_;
  double t_ = 0;
};

// ---- corpus ----

enum class SeedOrigin { Initial, Mutation, Injected };

struct SeedEntry {
  std::uint32_t id = 0;
  std::filesystem::path path;
  SeedOrigin origin = SeedOrigin::Initial;
  double discovery_time = 0;
  std::set<ArmPair> fingerprint;
};

/// Sync-compatible output layout:
///   out/main/queue/id:NNNNNN,...   kept inputs
///   out/main/crashes/              crashing inputs
///   out/main/.synced/llm           last imported injected id
///   out/llm/queue/id:NNNNNN        solver inputs waiting for import
class Corpus {
 public:
  explicit Corpus(std::filesystem::path out_dir);

  const std::filesystem::path& out_dir() const { return out_; }
  std::filesystem::path queue_dir() const { return out_ / "main" / "queue"; }
  std::filesystem::path crash_dir() const { return out_ / "main" / "crashes"; }
  std::filesystem::path llm_queue_dir() const { return out_ / "llm" / "queue"; }
  std::filesystem::path synced_marker() const {
    return out_ / "main" / ".synced" / "llm";
  }

  /// Writes into the main queue; `suffix` follows the id, e.g. "src:000003,op:flip".
  std::filesystem::path add(const Bytes& data, const std::string& suffix);
  std::filesystem::path add_crash(const Bytes& data, const std::string& suffix);

  /// Writes an injected input into the llm queue and returns its id.
  std::uint32_t inject(const Bytes& data);

  /// Last injected id the fuzzer has processed, if any.
  std::optional<std::uint32_t> synced_upto() const;
  /// Whether the injected input `llm_id` was kept; empty while the fuzzer
  /// has not looked at it yet.
  std::optional<bool> import_outcome(std::uint32_t llm_id) const;

  std::uint32_t next_id() const { return next_id_; }

 private:
  std::filesystem::path out_;
  std::uint32_t next_id_ = 0;
  std::uint32_t next_crash_ = 0;
  std::uint32_t next_llm_ = 0;
};

std::string seed_name(std::uint32_t id, const std::string& suffix = {});
std::optional<std::uint32_t> parse_seed_id(const std::string& file_name);

// ---- fuzzer ----

struct FuzzerConfig {
  std::uint64_t rng_seed = 1;
  bool mutate = true;
  double plateau_s = 90.0;
  std::size_t max_input = 4096;
};

struct ImportResult {
  std::uint32_t llm_id = 0;
  bool kept = false;
  std::set<ArmPair> new_pairs;
};

class Fuzzer {
 public:
  Fuzzer(const Program& program, RunOptions run, Corpus& corpus,
         FuzzerConfig cfg, CampaignClock& clock);

  /// Copies initial seeds into the queue (all are kept).
  void load_initial(const std::vector<std::filesystem::path>& seeds);
  /// Picks up a queue that already exists on disk (restart after a kill).
  void resume();

  /// One mutation + execution; the kept child, if any.
  std::optional<SeedEntry> fuzz_step();

  /// Imports injected inputs not processed yet.
  std::vector<ImportResult> sync();

  bool plateau() const;
  double last_find() const { return last_find_; }
  const std::set<ArmPair>& covered() const { return covered_; }
  std::uint64_t execs() const { return execs_; }
  const std::vector<SeedEntry>& seeds() const { return seeds_; }
  std::uint64_t crashes() const { return crashes_; }

  /// Appends a stats.tsv row and rewrites fuzzer_stats.
  void write_stats();

  Bytes mutate(const Bytes& input, std::string& op);

 private:
  struct Outcome {
    std::set<ArmPair> pairs;
    ExitStatus status = ExitStatus::Normal;
  };
  Outcome execute(const Bytes& input);
  std::set<ArmPair> novel(const std::set<ArmPair>& pairs) const;
  std::size_t pick_seed();
  SeedEntry keep(const Bytes& data, const std::string& suffix, SeedOrigin origin,
                 std::set<ArmPair> pairs);

  const Program& program_;
  RunOptions run_;
  Corpus& corpus_;
  FuzzerConfig cfg_;
  CampaignClock& clock_;
  std::mt19937_64 rng_;
  std::vector<SeedEntry> seeds_;
  std::vector<Bytes> data_;
  std::set<ArmPair> covered_;
  std::set<ArmPair> crash_pairs_;
  std::size_t cursor_ = 0;
  std::uint64_t execs_ = 0;
  std::uint64_t crashes_ = 0;
  double last_find_ = 0;
  bool stats_header_ = false;
};

}  // namespace slicefuzz
