#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "slicefuzz/ast_index.hpp"
#include "slicefuzz/util.hpp"

namespace slicefuzz {

struct TraceRecord {
  FileId file_id = 0;
  std::uint32_t line = 0;
  std::uint16_t ordinal = 0;

  friend bool operator==(const TraceRecord&, const TraceRecord&) = default;
  friend auto operator<=>(const TraceRecord&, const TraceRecord&) = default;
};

/// Outcome of one guard evaluation, written by the instrumented subject next
/// to the statement trace.
struct ArmEvent {
  CondId cond;
  std::uint16_t arm = 0;

  friend bool operator==(const ArmEvent&, const ArmEvent&) = default;
};

enum class ExitStatus { Normal, Crash, Timeout, TraceCap };
std::string_view to_string(ExitStatus s);

struct ExecutionTrace {
  std::string seed_id;
  std::vector<TraceRecord> records;
  std::vector<ArmEvent> arm_events;
  std::optional<CondId> truncated_at;
  ExitStatus exit_status = ExitStatus::Normal;
  int exit_code = 0;
  int signal = 0;
};

/// Maps guard trace records to conditionals and back. Built from the index,
/// or loaded from the sidecar written next to an instrumented binary.
class GuardTable {
 public:
  static GuardTable from_index(const AstIndex& ix);
  static GuardTable load(const std::filesystem::path& sidecar);
  void save(const std::filesystem::path& sidecar) const;

  std::optional<CondId> cond_of(const TraceRecord& r) const;
  std::optional<TraceRecord> record_of(const CondId& c) const;
  const std::vector<std::string>& file_names() const { return files_; }

  /// Accepts "file:byte" ids and "name.c:line" (first guard on the line).
  std::optional<CondId> parse_cond(std::string_view text) const;

 private:
  std::map<TraceRecord, CondId> by_record_;
  std::map<CondId, TraceRecord> by_cond_;
  std::vector<std::string> files_;
};

struct Program {
  std::filesystem::path binary;
  std::vector<std::string> args;  // "@@" is replaced by an input file path
  GuardTable guards;
};

struct BuildOptions {
  std::string compiler = "cc";
  std::vector<std::string> cflags;
  std::filesystem::path out_dir;
  std::string output_name = "subject";
};

class BuildError : public Error {
 public:
  BuildError(const std::string& what, std::string diagnostics)
      : Error(what), diagnostics_(std::move(diagnostics)) {}
  const std::string& diagnostics() const { return diagnostics_; }

 private:
  std::string diagnostics_;
};

std::string instrument_source(const AstIndex& ix, FileId file);
std::string trace_runtime_source();

/// Writes instrumented copies of every indexed file plus the runtime into
/// `out_dir/instrumented/`, compiles them, and writes the guard sidecar
/// `<binary>.guards.json`.
Program instrument(const AstIndex& ix, const BuildOptions& opts);

/// Compiles the unmodified sources (the "plain" variant).
std::filesystem::path build_plain(const AstIndex& ix, const BuildOptions& opts);

struct RunOptions {
  std::optional<CondId> stop_at;
  std::chrono::milliseconds timeout{5000};
  std::uint64_t trace_cap = 1'000'000;
  bool record_statements = true;  // false: arm events only
};

ExecutionTrace run_traced(const Program& program, const Bytes& input,
                          const RunOptions& opts = {});

/// Cuts `trace` after the first record of `cond`'s guard. Arm events are
/// cut to the evaluations that completed before that record.
void truncate_trace(ExecutionTrace& trace, const GuardTable& guards,
                    const CondId& cond);

// ---- call frames ----

struct Frame {
  std::int32_t function = -1;
  std::int32_t parent = -1;
  std::int32_t call_pos = -1;  // caller's last record before the call
  std::uint32_t first_pos = 0;
  std::uint32_t last_pos = 0;
  bool active_at_end = false;  // still on the stack at the final record
};

struct FrameMap {
  std::vector<std::int32_t> node_of;   // index node per record, -1 unknown
  std::vector<std::int32_t> frame_of;  // frame per record
  std::vector<Frame> frames;

  bool is_descendant(std::int32_t frame, std::int32_t ancestor) const;
};

/// Rebuilds call frames from function changes in the record sequence.
FrameMap reconstruct_frames(const AstIndex& ix,
                            const std::vector<TraceRecord>& records);

std::vector<TraceRecord> parse_trace_bytes(const Bytes& data, bool text);
std::vector<ArmEvent> parse_arm_bytes(const Bytes& data, bool text);

}  // namespace slicefuzz
