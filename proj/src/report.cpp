#include "slicefuzz/report.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "slicefuzz/util.hpp"

namespace slicefuzz {

namespace fs = std::filesystem;

std::string_view to_string(AttemptOutcome o) {
  switch (o) {
    case AttemptOutcome::Kept: return "kept";
    case AttemptOutcome::Discarded: return "discarded";
    case AttemptOutcome::DecodeFailed: return "decode-failed";
    case AttemptOutcome::Skipped: return "skipped";
  }
  return "skipped";
}

std::optional<AttemptOutcome> parse_outcome(std::string_view s) {
  for (auto o : {AttemptOutcome::Kept, AttemptOutcome::Discarded,
                 AttemptOutcome::DecodeFailed, AttemptOutcome::Skipped})
    if (to_string(o) == s) return o;
  return std::nullopt;
}

double median(std::vector<double> v) {
  if (v.empty()) return 0;
  std::sort(v.begin(), v.end());
  std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : (v[m - 1] + v[m]) / 2;
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c == '\n' ? ' ' : c;
  }
  return out + "\"";
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(std::move(cur));
  return out;
}

std::vector<std::string> read_lines(const fs::path& p) {
  std::vector<std::string> lines;
  std::ifstream f(p);
  std::string line;
  while (std::getline(f, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

}  // namespace

std::string roadblocks_csv(const std::vector<AttemptRecord>& rows, bool with_latency) {
  std::string out = with_latency
                        ? "attempt,cond_id,location,arm,seed,slice_bytes,"
                          "pipeline_latency_s,solve_latency_s,outcome,elapsed_s,note\n"
                        : "attempt,cond_id,location,arm,seed,slice_bytes,outcome,note\n";
  for (const auto& r : rows) {
    out += fmt::format("{},{},{},{},{},{},", r.attempt, r.cond_id, r.location, r.arm,
                       csv_field(r.seed), r.slice_bytes);
    if (with_latency)
      out += fmt::format("{:.6f},{:.6f},", r.pipeline_latency_s, r.solve_latency_s);
    out += std::string(to_string(r.outcome));
    if (with_latency) out += fmt::format(",{:.3f}", r.elapsed_s);
    out += "," + csv_field(r.note) + "\n";
  }
  return out;
}

std::string summary_json(const CampaignMetrics& m) {
  std::map<std::string, int> counts{
      {"kept", 0}, {"discarded", 0}, {"decode-failed", 0}, {"skipped", 0}};
  std::vector<double> pipeline, solve;
  for (const auto& a : m.attempts) {
    counts[std::string(to_string(a.outcome))]++;
    if (a.outcome != AttemptOutcome::Skipped) {
      pipeline.push_back(a.pipeline_latency_s);
      solve.push_back(a.solve_latency_s);
    }
  }
  auto mean = [](const std::vector<double>& v) {
    return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / v.size();
  };
  nlohmann::json j;
  j["elapsed_s"] = m.elapsed_s;
  j["execs"] = m.execs;
  j["arms_covered"] = m.arms_covered;
  j["crashes"] = m.crashes;
  j["roadblock_attempts"] = m.attempts.size();
  j["outcomes"] = counts;
  j["injected"] = m.injected;
  j["kept"] = m.kept;
  if (auto r = m.effective_ratio()) j["effective_ratio"] = *r;
  else j["effective_ratio"] = nullptr;
  j["pipeline_latency_s"] = {{"median", median(pipeline)}, {"mean", mean(pipeline)},
                             {"count", pipeline.size()}};
  j["solve_latency_s"] = {{"median", median(solve)}, {"mean", mean(solve)},
                          {"count", solve.size()}};
  j["remote_requests"] = m.remote_requests;
  j["solver_hard_stop"] = m.solver_hard_stop;
  j["stop_reason"] = m.stop_reason;
  return j.dump(2) + "\n";
}

void emit_report(const CampaignMetrics& m, const fs::path& dir) {
  fs::create_directories(dir);
  std::string cov = "elapsed_s,arms\n";
  for (const auto& p : m.coverage) cov += fmt::format("{:.3f},{}\n", p.elapsed_s, p.arms);
  write_file_atomic(dir / "coverage_over_time.csv", cov);
  write_file_atomic(dir / "roadblocks.csv", roadblocks_csv(m.attempts));
  write_file_atomic(dir / "summary.json", summary_json(m));
}

std::vector<AttemptRecord> read_roadblocks_csv(const fs::path& p) {
  std::vector<AttemptRecord> rows;
  auto lines = read_lines(p);
  if (lines.empty()) return rows;
  auto header = split_csv_line(lines[0]);
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < header.size(); ++i) col[header[i]] = i;
  for (std::size_t li = 1; li < lines.size(); ++li) {
    auto f = split_csv_line(lines[li]);
    auto get = [&](const char* k) -> std::string {
      auto it = col.find(k);
      return it != col.end() && it->second < f.size() ? f[it->second] : std::string();
    };
    AttemptRecord r;
    try {
      r.attempt = std::stoi(get("attempt"));
      r.cond_id = get("cond_id");
      r.location = get("location");
      r.arm = static_cast<std::uint32_t>(std::stoul(get("arm")));
      r.seed = get("seed");
      r.slice_bytes = std::stoull(get("slice_bytes"));
      if (col.count("pipeline_latency_s")) {
        r.pipeline_latency_s = std::stod(get("pipeline_latency_s"));
        r.solve_latency_s = std::stod(get("solve_latency_s"));
      }
      if (col.count("elapsed_s")) r.elapsed_s = std::stod(get("elapsed_s"));
    } catch (const std::exception&) {
      throw Error(fmt::format("{}: bad row {}", p.string(), li + 1));
    }
    auto o = parse_outcome(get("outcome"));
    if (!o) throw Error(fmt::format("{}: bad outcome on row {}", p.string(), li + 1));
    r.outcome = *o;
    r.note = get("note");
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<CoveragePoint> read_coverage_csv(const fs::path& p) {
  std::vector<CoveragePoint> out;
  auto lines = read_lines(p);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    auto f = split_csv_line(lines[i]);
    if (f.size() < 2) continue;
    out.push_back({std::stod(f[0]), static_cast<std::size_t>(std::stoull(f[1]))});
  }
  return out;
}

CampaignMetrics load_metrics(const fs::path& out_dir) {
  CampaignMetrics m;
  if (fs::exists(out_dir / "roadblocks.csv"))
    m.attempts = read_roadblocks_csv(out_dir / "roadblocks.csv");
  if (fs::exists(out_dir / "coverage_over_time.csv"))
    m.coverage = read_coverage_csv(out_dir / "coverage_over_time.csv");
  for (const auto& a : m.attempts) {
    if (a.outcome == AttemptOutcome::Kept || a.outcome == AttemptOutcome::Discarded)
      ++m.injected;
    if (a.outcome == AttemptOutcome::Kept) ++m.kept;
  }
  if (fs::exists(out_dir / "summary.json")) {
    auto j = nlohmann::json::parse(read_text_file(out_dir / "summary.json"), nullptr,
                                   false);
    if (!j.is_discarded()) {
      m.elapsed_s = j.value("elapsed_s", 0.0);
      m.execs = j.value("execs", std::uint64_t{0});
      m.arms_covered = j.value("arms_covered", std::size_t{0});
      m.crashes = j.value("crashes", std::uint64_t{0});
      m.remote_requests = j.value("remote_requests", 0);
      m.solver_hard_stop = j.value("solver_hard_stop", false);
      m.stop_reason = j.value("stop_reason", std::string());
    }
  } else if (!m.coverage.empty()) {
    m.elapsed_s = m.coverage.back().elapsed_s;
    m.arms_covered = m.coverage.back().arms;
  }
  return m;
}

}  // namespace slicefuzz
