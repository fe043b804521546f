#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "slicefuzz/solver.hpp"
#include "slicefuzz/util.hpp"

namespace slicefuzz {

class ConfigError : public Error {
 public:
  using Error::Error;
};

enum class CampaignMode { Single, Threaded };
enum class ClockKind { Logical, Wall };

struct SubjectConfig {
  std::vector<std::filesystem::path> sources;
  std::vector<std::string> cflags;
  std::string compiler = "cc";
  std::vector<std::string> args;  // "@@" = input file; otherwise stdin
};

struct CampaignConfig {
  std::filesystem::path config_path;
  SubjectConfig subject;
  std::filesystem::path seeds;
  std::filesystem::path output;
  double plateau_s = 90.0;
  std::uint64_t trace_cap = 1'000'000;
  int timeout_ms = 5000;
  std::uint64_t rng_seed = 1;
  double budget_s = 600.0;
  CampaignMode mode = CampaignMode::Threaded;
  ClockKind clock = ClockKind::Wall;
  double exec_tick_s = 0.001;   // logical clock step per execution
  std::uint64_t max_execs = 0;  // 0: unbounded
  int max_attempts = 0;         // 0: unbounded
  bool fuzz = true;             // false: only imports are executed
  double flush_s = 10.0;
  std::string goal;             // "name.c:line:arm": stop once covered
  SolverConfig solver;
  bool solver_enabled = true;
};

/// Parses a campaign file. Relative paths resolve against the file's
/// directory; SOLVER_ENDPOINT / SOLVER_API_KEY fill the solver credentials.
/// Unknown top-level tables are ignored so case files can carry extras.
CampaignConfig load_config(const std::filesystem::path& path);
CampaignConfig parse_config(std::string_view text,
                            const std::filesystem::path& base_dir);

/// Checks that referenced paths exist; throws ConfigError.
void validate_config(const CampaignConfig& cfg);

std::string_view to_string(CampaignMode m);
std::string config_json(const CampaignConfig& cfg);

}  // namespace slicefuzz
