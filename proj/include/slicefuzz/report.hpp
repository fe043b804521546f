#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace slicefuzz {

enum class AttemptOutcome { Kept, Discarded, DecodeFailed, Skipped };
std::string_view to_string(AttemptOutcome o);
std::optional<AttemptOutcome> parse_outcome(std::string_view s);

struct AttemptRecord {
  int attempt = 0;
  std::string cond_id;   // "file:byte"
  std::string location;  // "name.c:line"
  std::uint32_t arm = 0;
  std::string seed;
  std::size_t slice_bytes = 0;
  double pipeline_latency_s = 0;  // trace + slice + prompt build
  double solve_latency_s = 0;
  AttemptOutcome outcome = AttemptOutcome::Skipped;
  double elapsed_s = 0;  // campaign clock at the end of the attempt
  std::string note;      // why an attempt was skipped
};

struct CoveragePoint {
  double elapsed_s = 0;
  std::size_t arms = 0;
};

struct CampaignMetrics {
  std::vector<CoveragePoint> coverage;
  std::vector<AttemptRecord> attempts;
  std::uint64_t injected = 0;
  std::uint64_t kept = 0;
  std::uint64_t execs = 0;
  std::uint64_t crashes = 0;
  std::size_t arms_covered = 0;
  int remote_requests = 0;
  bool solver_hard_stop = false;
  double elapsed_s = 0;
  std::string stop_reason;

  std::optional<double> effective_ratio() const {
    if (injected == 0) return std::nullopt;
    return static_cast<double>(kept) / static_cast<double>(injected);
  }
};

double median(std::vector<double> v);

/// coverage_over_time.csv, roadblocks.csv and summary.json under `dir`.
void emit_report(const CampaignMetrics& m, const std::filesystem::path& dir);
std::string summary_json(const CampaignMetrics& m);

std::string roadblocks_csv(const std::vector<AttemptRecord>& rows,
                           bool with_latency = true);
std::vector<AttemptRecord> read_roadblocks_csv(const std::filesystem::path& p);
std::vector<CoveragePoint> read_coverage_csv(const std::filesystem::path& p);

/// Rebuilds the metrics of a finished (or killed) campaign from its files.
CampaignMetrics load_metrics(const std::filesystem::path& out_dir);

}  // namespace slicefuzz
