#include "slicefuzz/coverage.hpp"

#include <algorithm>

#include <json.hpp>
#include <spdlog/spdlog.h>

#include "slicefuzz/util.hpp"

namespace slicefuzz {

namespace fs = std::filesystem;

namespace {

// Successor of each record within its own frame, skipping callee frames.
struct Successors {
  std::vector<std::int64_t> next;  // -1: frame ended, -2: trace ended inside
};

Successors successors(const FrameMap& frames) {
  Successors s;
  std::size_t n = frames.frame_of.size();
  s.next.assign(n, -1);
  std::map<std::int32_t, std::int64_t> later;
  for (std::size_t i = n; i-- > 0;) {
    std::int32_t f = frames.frame_of[i];
    auto it = later.find(f);
    if (it != later.end())
      s.next[i] = it->second;
    else if (f >= 0 && frames.frames[f].active_at_end)
      s.next[i] = -2;
    later[f] = static_cast<std::int64_t>(i);
  }
  return s;
}

std::optional<std::uint32_t> decide_arm(
    const AstIndex& ix, const Conditional& c, const FrameMap& frames,
    std::int64_t succ, const std::vector<std::uint16_t>* events,
    std::size_t occurrence) {
  bool ambiguous = succ == -2;
  for (const auto& a : c.arms)
    if (!a.synthetic && !a.has_statements) ambiguous = true;

  if (!ambiguous) {
    if (succ >= 0) {
      std::int32_t sn = frames.node_of[succ];
      if (sn >= 0) {
        const StmtNode& s = ix.node(sn);
        for (const auto& a : c.arms)
          if (!a.synthetic &&
              a.body_range.contains_byte(s.file_id, s.range.start_byte))
            return a.arm_id;
      }
    }
    for (const auto& a : c.arms)
      if (a.synthetic) return a.arm_id;
  }
  if (events && occurrence < events->size()) return (*events)[occurrence];
  return std::nullopt;
}

std::map<CondId, std::vector<std::uint16_t>> events_by_cond(
    const ExecutionTrace& trace) {
  std::map<CondId, std::vector<std::uint16_t>> out;
  for (const auto& e : trace.arm_events) out[e.cond].push_back(e.arm);
  return out;
}

const Conditional* guard_cond(const AstIndex& ix, const FrameMap& frames,
                              std::size_t pos) {
  std::int32_t node = frames.node_of[pos];
  if (node < 0 || !ix.node(node).cond) return nullptr;
  return ix.conditional(*ix.node(node).cond);
}

}  // namespace

std::optional<std::uint32_t> covered_arm(const AstIndex& ix,
                                         const ExecutionTrace& trace,
                                         const FrameMap& frames,
                                         std::size_t pos) {
  const Conditional* c = guard_cond(ix, frames, pos);
  if (!c) return std::nullopt;
  std::size_t occurrence = 0;
  for (std::size_t i = 0; i < pos; ++i)
    if (frames.node_of[i] == frames.node_of[pos]) ++occurrence;
  std::int64_t succ = -1;
  std::int32_t frame = frames.frame_of[pos];
  for (std::size_t j = pos + 1; j < trace.records.size(); ++j) {
    std::int32_t fj = frames.frame_of[j];
    if (fj == frame) {
      succ = static_cast<std::int64_t>(j);
      break;
    }
    if (!frames.is_descendant(fj, frame)) break;
  }
  if (succ < 0 && frame >= 0 && frames.frames[frame].active_at_end) succ = -2;
  auto events = events_by_cond(trace);
  auto it = events.find(c->cond_id);
  return decide_arm(ix, *c, frames, succ,
                    it == events.end() ? nullptr : &it->second, occurrence);
}

std::optional<std::uint32_t> covered_arm(const Conditional& cond,
                                         const ExecutionTrace& trace,
                                         const AstIndex& ix) {
  FrameMap frames = reconstruct_frames(ix, trace.records);
  for (std::size_t i = 0; i < trace.records.size(); ++i)
    if (frames.node_of[i] == static_cast<std::int32_t>(cond.node))
      return covered_arm(ix, trace, frames, i);
  return std::nullopt;
}

std::vector<GuardHit> guard_hits(const AstIndex& ix,
                                 const ExecutionTrace& trace) {
  std::vector<GuardHit> hits;
  FrameMap frames = reconstruct_frames(ix, trace.records);
  Successors succ = successors(frames);
  auto events = events_by_cond(trace);
  std::map<CondId, std::size_t> occurrences;
  for (std::size_t i = 0; i < trace.records.size(); ++i) {
    const Conditional* c = guard_cond(ix, frames, i);
    if (!c) continue;
    auto it = events.find(c->cond_id);
    std::size_t k = occurrences[c->cond_id]++;
    hits.push_back({c->cond_id,
                    decide_arm(ix, *c, frames, succ.next[i],
                               it == events.end() ? nullptr : &it->second, k),
                    i});
  }
  return hits;
}

std::set<ArmPair> covered_pairs(const AstIndex& ix,
                                const ExecutionTrace& trace) {
  std::set<ArmPair> out;
  for (const auto& h : guard_hits(ix, trace))
    if (h.arm) out.emplace(h.cond, *h.arm);
  return out;
}

// ---- report ----

bool CoverageReport::fully_covered(const CondId& c, const AstIndex& ix) const {
  auto it = conds.find(c);
  const Conditional* cond = ix.conditional(c);
  if (it == conds.end() || !cond) return false;
  for (const auto& a : cond->arms) {
    auto s = it->second.arms.find(a.arm_id);
    if (s == it->second.arms.end() || !s->second.covered) return false;
  }
  return true;
}

bool CoverageReport::arm_covered(const CondId& c, std::uint32_t arm) const {
  auto it = conds.find(c);
  if (it == conds.end()) return false;
  auto s = it->second.arms.find(arm);
  return s != it->second.arms.end() && s->second.covered;
}

std::size_t CoverageReport::arms_covered() const {
  std::size_t n = 0;
  for (const auto& [id, cc] : conds)
    for (const auto& [arm, s] : cc.arms)
      if (s.covered) ++n;
  return n;
}

std::set<ArmPair> CoverageReport::pairs() const {
  std::set<ArmPair> out;
  for (const auto& [id, cc] : conds)
    for (const auto& [arm, s] : cc.arms)
      if (s.covered) out.emplace(id, arm);
  return out;
}

std::string CoverageReport::to_json(const AstIndex& ix) const {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [id, cc] : conds) {
    const Conditional* c = ix.conditional(id);
    nlohmann::json arms = nlohmann::json::object();
    if (c) {
      for (const auto& a : c->arms) {
        auto s = cc.arms.find(a.arm_id);
        bool covered = s != cc.arms.end() && s->second.covered;
        arms[std::to_string(a.arm_id)] = {
            {"covered", covered},
            {"witnesses", covered ? s->second.witness_seeds
                                  : std::vector<std::string>{}}};
      }
    }
    j[id.str()] = {{"file", ix.file(id.file_id).name()},
                   {"line", c ? c->guard_line : 0},
                   {"arms", std::move(arms)}};
  }
  return j.dump(1);
}

// ---- analyzer ----

CoverageAnalyzer::CoverageAnalyzer(const AstIndex& ix, CoverageConfig cfg)
    : ix_(ix), cfg_(cfg), rng_(cfg.rng_seed) {}

void CoverageAnalyzer::add_trace(const std::string& seed_id,
                                 std::size_t seed_size,
                                 const ExecutionTrace& trace) {
  seed_sizes_[seed_id] = seed_size;
  std::set<CondId> touched;
  auto push_unique = [&](std::vector<std::string>& v) {
    auto it = std::find(v.begin(), v.end(), seed_id);
    if (it != v.end()) v.erase(it);
    v.push_back(seed_id);
  };
  for (const auto& h : guard_hits(ix_, trace)) {
    CondCoverage& cc = report_.conds[h.cond];
    if (touched.insert(h.cond).second) push_unique(cc.reach_witnesses);
    if (!h.arm) continue;
    ArmStatus& s = cc.arms[*h.arm];
    s.covered = true;
    if (std::find(s.witness_seeds.begin(), s.witness_seeds.end(), seed_id) ==
        s.witness_seeds.end())
      s.witness_seeds.push_back(seed_id);
  }
  refresh_interest(touched);
}

void CoverageAnalyzer::refresh_interest(const std::set<CondId>& touched) {
  for (const auto& c : touched) {
    if (report_.fully_covered(c, ix_))
      interest_.erase(c);
    else
      interest_.emplace(c, 0);  // no-op when already present
  }
}

std::size_t CoverageAnalyzer::analyze_corpus(const fs::path& queue_dir,
                                             const TraceProvider& traces,
                                             bool full_rebuild) {
  if (full_rebuild) {
    report_ = {};
    interest_.clear();
    analyzed_.clear();
    seed_sizes_.clear();
  }
  std::error_code ec;
  if (!fs::is_directory(queue_dir, ec)) return 0;
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(queue_dir, ec)) {
    if (!e.is_regular_file()) continue;
    std::string name = e.path().filename().string();
    if (name.empty() || name[0] == '.') continue;
    files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::size_t count = 0;
  for (const auto& p : files) {
    std::string name = p.filename().string();
    auto size = fs::file_size(p, ec);
    if (ec) continue;
    auto mtime = fs::last_write_time(p, ec).time_since_epoch().count();
    if (ec) continue;
    auto key = std::make_pair(size, static_cast<std::int64_t>(mtime));
    auto it = analyzed_.find(name);
    if (it != analyzed_.end() && it->second == key) continue;
    auto trace = traces(p);
    if (!trace) {
      spdlog::warn("coverage: no trace for {}, will retry", name);
      continue;
    }
    add_trace(name, size, *trace);
    analyzed_[name] = key;
    ++count;
  }
  return count;
}

std::optional<std::string> CoverageAnalyzer::choose_witness(
    const CondId& c) const {
  auto it = report_.conds.find(c);
  if (it == report_.conds.end() || it->second.reach_witnesses.empty())
    return std::nullopt;
  const auto& w = it->second.reach_witnesses;
  std::optional<std::string> best;
  std::size_t best_size = 0;
  for (const auto& s : w) {  // oldest first, so `<=` favours recent seeds
    std::size_t size = seed_sizes_.count(s) ? seed_sizes_.at(s) : 0;
    if (!best || size <= best_size) {
      best = s;
      best_size = size;
    }
  }
  return best;
}

std::optional<Roadblock> CoverageAnalyzer::retrieve_roadblock() {
  if (interest_.empty()) return std::nullopt;
  std::int64_t top = interest_.begin()->second;
  for (const auto& [c, v] : interest_) top = std::max(top, v);
  std::vector<CondId> candidates;
  for (const auto& [c, v] : interest_)
    if (v == top) candidates.push_back(c);
  CondId pick = candidates[rng_() % candidates.size()];
  interest_[pick] -= cfg_.select_decrement;

  const Conditional* cond = ix_.conditional(pick);
  Roadblock rb;
  rb.cond = pick;
  for (const auto& a : cond->arms) {
    if (!report_.arm_covered(pick, a.arm_id)) {
      rb.target_arm = a.arm_id;
      break;
    }
  }
  rb.seed = choose_witness(pick).value_or("");
  return rb;
}

void CoverageAnalyzer::reward(const CondId& c) {
  auto it = interest_.find(c);
  if (it != interest_.end()) it->second += cfg_.reward_delta;
}

void CoverageAnalyzer::save(const fs::path& dir) const {
  fs::create_directories(dir);
  write_file_atomic(dir / "coverage.json", report_.to_json(ix_));
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [c, v] : interest_) j[c.str()] = v;
  write_file_atomic(dir / "interest.json", j.dump(1));
}

}  // namespace slicefuzz
