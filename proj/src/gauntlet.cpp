#include "slicefuzz/gauntlet.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <map>

#include <fmt/format.h>
#include <json.hpp>
#include <spdlog/spdlog.h>

#include "slicefuzz/campaign.hpp"
#include "slicefuzz/config.hpp"
#include "slicefuzz/slicer.hpp"
#include "slicefuzz/solver.hpp"

namespace slicefuzz {

namespace fs = std::filesystem;

std::string_view to_string(Difficulty d) {
  switch (d) {
    case Difficulty::MagicBytes: return "magic-bytes";
    case Difficulty::Arithmetic: return "arithmetic";
    case Difficulty::MultiPart: return "multi-part";
    case Difficulty::SurrogatePair: return "surrogate-pair";
    case Difficulty::HashGated: return "hash-gated";
  }
  return "magic-bytes";
}

std::optional<Difficulty> parse_difficulty(std::string_view s) {
  for (auto d : {Difficulty::MagicBytes, Difficulty::Arithmetic, Difficulty::MultiPart,
                 Difficulty::SurrogatePair, Difficulty::HashGated})
    if (to_string(d) == s) return d;
  return std::nullopt;
}

fs::path GauntletCase::slice_expectation(const GauntletTarget& t) const {
  std::string n = t.cond;
  std::replace(n.begin(), n.end(), ':', '_');
  return dir / "expect" / ("slice." + n + ".txt");
}

GauntletCase load_case(const fs::path& dir) {
  GauntletCase c;
  c.dir = fs::absolute(dir).lexically_normal();
  if (c.dir.filename().empty()) c.dir = c.dir.parent_path();
  c.name = c.dir.filename().string();
  c.config = c.dir / "case.toml";
  if (!fs::is_regular_file(c.config)) throw Error(c.name + ": missing case.toml");
  auto j = nlohmann::json::parse(read_text_file(c.dir / "expect" / "arms.json"), nullptr,
                                 false);
  if (j.is_discarded() || !j.is_object()) throw Error(c.name + ": bad expect/arms.json");
  auto d = parse_difficulty(j.value("class", std::string()));
  if (!d) throw Error(c.name + ": unknown difficulty class");
  c.difficulty = *d;
  for (const auto& t : j.value("targets", nlohmann::json::array())) {
    GauntletTarget g;
    g.cond = t.at("cond").get<std::string>();
    g.arm = t.at("arm").get<std::uint32_t>();
    g.witness = c.dir / t.at("witness").get<std::string>();
    g.scripted = t.value("scripted", false);
    c.targets.push_back(std::move(g));
  }
  if (c.targets.empty()) throw Error(c.name + ": no targets");
  c.campaign_target = j.value("campaign_target", c.targets.size() - 1);
  if (c.campaign_target >= c.targets.size()) throw Error(c.name + ": bad campaign_target");
  if (fs::is_regular_file(c.dir / "replay.json")) c.replay = c.dir / "replay.json";
  return c;
}

std::vector<GauntletCase> load_gauntlet(const fs::path& root) {
  std::vector<GauntletCase> out;
  std::vector<fs::path> dirs;
  for (const auto& e : fs::directory_iterator(root))
    if (e.is_directory() && fs::exists(e.path() / "case.toml")) dirs.push_back(e.path());
  std::sort(dirs.begin(), dirs.end());
  for (const auto& d : dirs) out.push_back(load_case(d));
  return out;
}

fs::path default_gauntlet_root() {
#ifdef SLICEFUZZ_SOURCE_DIR
  return fs::path(SLICEFUZZ_SOURCE_DIR) / "gauntlet";
#else
  return "gauntlet";
#endif
}

// ---- reference slice ----

namespace {

struct Key {
  std::int32_t frame = -1;
  std::int32_t decl = -1;  // -2: return value
  std::string name;
  friend auto operator<=>(const Key&, const Key&) = default;
};

struct OFrame {
  std::int32_t function = -1;
  std::int64_t call_pos = -1;
  std::int64_t last_pos = -1;
  std::map<std::int32_t, std::vector<Key>> alias;  // param decl -> caller objects
  std::int64_t pending_pos = -1;                   // writes held until callees return
};

class DependenceInterpreter {
 public:
  DependenceInterpreter(const AstIndex& ix, const std::vector<TraceRecord>& recs)
      : ix_(ix), recs_(recs), deps_(recs.size()), nodes_(recs.size(), -1) {
    for (std::size_t i = 0; i < recs.size(); ++i)
      if (auto n = ix.node_at(recs[i].file_id, recs[i].line, recs[i].ordinal))
        nodes_[i] = static_cast<std::int32_t>(*n);
  }

  ReferenceSlice run() {
    ReferenceSlice out;
    if (recs_.empty()) return out;
    std::size_t g = recs_.size() - 1;
    for (std::size_t i = 0; i < g; ++i) step(i);
    // the guard: apply its frame's held writes, then collect its readers
    std::int32_t gn = nodes_[g];
    if (gn < 0 || ix_.node(gn).function < 0) return out;
    enter(ix_.node(gn).function, gn);
    flush_pending(top());
    std::deque<std::size_t> work;
    std::set<std::size_t> seen;
    for (const auto& v : ix_.node(gn).reads)
      for (const auto& k : keys(v, top()))
        for (auto p : last_[k]) work.push_back(p);
    while (!work.empty()) {
      std::size_t p = work.front();
      work.pop_front();
      if (!seen.insert(p).second) continue;
      for (auto d : deps_[p]) work.push_back(d);
    }
    for (auto p : seen) out.positions.insert(p < recs_.size() ? p : origin_[p - recs_.size()]);
    for (auto p : out.positions) out.statements.insert(recs_[p]);
    return out;
  }

 private:
  OFrame& top() { return stack_.back(); }

  bool is_global(const VarRef& v) const {
    return v.decl < 0 || ix_.declarations()[v.decl].scope == DeclScope::Global;
  }
  bool is_weak(const VarRef& v) const {
    return v.decl >= 0 && ix_.declarations()[v.decl].is_pointer;
  }

  std::vector<Key> keys(const VarRef& v, const OFrame& f) const {
    std::int32_t fi = static_cast<std::int32_t>(&f - stack_.data());
    if (v.name == "<ret>") return {Key{ids_[fi], -2, {}}};
    if (is_global(v)) return {Key{-1, -1, v.name}};
    std::vector<Key> out{Key{ids_[fi], v.decl, {}}};
    if (auto it = f.alias.find(v.decl); it != f.alias.end())
      out.insert(out.end(), it->second.begin(), it->second.end());
    return out;
  }

  void apply_writes(std::size_t pos, OFrame& f) {
    const StmtNode& n = ix_.node(nodes_[pos]);
    for (const auto& v : n.writes) {
      auto ks = keys(v, f);
      for (std::size_t k = 0; k < ks.size(); ++k) {
        // aliased objects and pointer/array variables get weak updates
        if (k == 0 && !is_weak(v)) last_[ks[k]] = {pos};
        else last_[ks[k]].insert(pos);
      }
    }
  }

  void flush_pending(OFrame& f) {
    if (f.pending_pos >= 0) {
      apply_writes(static_cast<std::size_t>(f.pending_pos), f);
      f.pending_pos = -1;
    }
  }

  void pop() {
    OFrame& f = top();
    flush_pending(f);
    if (f.call_pos >= 0) {
      auto& ret = last_[Key{ids_.back(), -2, {}}];
      deps_[f.call_pos].insert(ret.begin(), ret.end());
    }
    stack_.pop_back();
    ids_.pop_back();
  }

  const CallSite* call_to(std::int64_t pos, std::int32_t function) const {
    if (pos < 0 || nodes_[pos] < 0) return nullptr;
    const std::string& name = ix_.functions()[function].name;
    for (const auto& c : ix_.node(nodes_[pos]).calls)
      if (c.traced && c.callee == name) return &c;
    return nullptr;
  }

  void push(std::int32_t function, std::int64_t call_pos, const CallSite* site) {
    OFrame nf;
    nf.function = function;
    nf.call_pos = call_pos;
    std::int32_t id = next_id_++;
    const auto& params = ix_.functions()[function].params;
    std::vector<std::vector<Key>> bases(params.size());
    if (site && !stack_.empty()) {
      for (std::size_t k = 0; k < params.size() && k < site->args.size(); ++k) {
        const CallArg& a = site->args[k];
        if (a.base && (a.address_of || ix_.declarations()[params[k]].is_pointer))
          bases[k] = keys(*a.base, top());
      }
    }
    stack_.push_back(std::move(nf));
    ids_.push_back(id);
    // parameters get a binding node that depends on the call's reads but
    // not on the value it later receives from the callee
    std::size_t binding = deps_.size();
    if (call_pos >= 0) {
      auto reads = deps_[call_pos];
      deps_.push_back(std::move(reads));
      origin_.push_back(static_cast<std::size_t>(call_pos));
    }
    for (std::size_t k = 0; k < params.size(); ++k) {
      if (call_pos >= 0) last_[Key{id, params[k], {}}] = {binding};
      if (!bases[k].empty()) top().alias[params[k]] = bases[k];
    }
  }

  // Brings the stack to the frame that executes record `pos`.
  void enter(std::int32_t function, std::int32_t node) {
    if (stack_.empty()) {
      push(function, -1, nullptr);
      return;
    }
    bool entry = function >= 0 && ix_.functions()[function].entry_node == node;
    if (entry) {
      // called from the innermost frame whose last statement calls it
      for (std::size_t d = stack_.size(); d-- > 0;) {
        if (const CallSite* site = call_to(stack_[d].last_pos, function)) {
          while (stack_.size() > d + 1) pop();
          push(function, stack_[d].last_pos, site);
          return;
        }
      }
    }
    for (std::size_t d = stack_.size(); d-- > 0;) {
      if (stack_[d].function == function) {
        while (stack_.size() > d + 1) pop();
        return;
      }
    }
    push(function, -1, nullptr);
  }

  void step(std::size_t i) {
    std::int32_t n = nodes_[i];
    if (n < 0 || ix_.node(n).function < 0) return;
    const StmtNode& node = ix_.node(n);
    enter(node.function, n);
    OFrame& f = top();
    flush_pending(f);
    for (const auto& v : node.reads)
      for (const auto& k : keys(v, f)) {
        auto it = last_.find(k);
        if (it != last_.end()) deps_[i].insert(it->second.begin(), it->second.end());
      }
    bool traced_call = std::any_of(node.calls.begin(), node.calls.end(),
                                   [](const CallSite& c) { return c.traced; });
    if (traced_call) f.pending_pos = static_cast<std::int64_t>(i);
    else apply_writes(i, f);
    f.last_pos = static_cast<std::int64_t>(i);
  }

  const AstIndex& ix_;
  const std::vector<TraceRecord>& recs_;
  std::vector<std::set<std::size_t>> deps_;  // trace positions, then binding nodes
  std::vector<std::size_t> origin_;          // call position of each binding node
  std::vector<std::int32_t> nodes_;
  std::vector<OFrame> stack_;
  std::vector<std::int32_t> ids_;
  std::int32_t next_id_ = 0;
  std::map<Key, std::set<std::size_t>> last_;
};

}  // namespace

ReferenceSlice reference_slice(const AstIndex& ix, const ExecutionTrace& trace) {
  return DependenceInterpreter(ix, trace.records).run();
}

OracleCoverage oracle_coverage(const GuardTable& guards,
                               const std::vector<ExecutionTrace>& traces) {
  OracleCoverage out;
  for (const auto& t : traces) {
    for (const auto& e : t.arm_events) out.covered.emplace(e.cond, e.arm);
    for (const auto& r : t.records)
      if (auto c = guards.cond_of(r)) out.reached.insert(*c);
  }
  return out;
}

std::string format_statements(const AstIndex& ix, const std::set<TraceRecord>& s) {
  std::string out;
  for (const auto& r : s)
    out += fmt::format("{}:{}:{}\n", fs::path(ix.file(r.file_id).path()).filename().string(),
                       r.line, r.ordinal);
  return out;
}

std::set<TraceRecord> parse_statements(const AstIndex& ix, std::string_view text) {
  std::set<TraceRecord> out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    std::string line = trim(text.substr(pos, nl == std::string_view::npos ? text.npos : nl - pos));
    pos = nl == std::string_view::npos ? text.size() : nl + 1;
    if (line.empty() || line[0] == '#') continue;
    auto c2 = line.rfind(':');
    auto c1 = c2 == std::string::npos ? c2 : line.rfind(':', c2 - 1);
    if (c1 == std::string::npos) throw Error("bad statement line: " + line);
    auto file = ix.find_file(line.substr(0, c1));
    if (!file) throw Error("unknown file in statement line: " + line);
    TraceRecord r;
    r.file_id = *file;
    r.line = static_cast<std::uint32_t>(std::stoul(line.substr(c1 + 1, c2 - c1 - 1)));
    r.ordinal = static_cast<std::uint16_t>(std::stoul(line.substr(c2 + 1)));
    out.insert(r);
  }
  return out;
}

// ---- validation ----

namespace {

std::size_t count_loc(const fs::path& src_dir) {
  std::size_t n = 0;
  for (const auto& e : fs::recursive_directory_iterator(src_dir)) {
    if (!e.is_regular_file()) continue;
    std::ifstream f(e.path());
    std::string line;
    while (std::getline(f, line)) ++n;
  }
  return n;
}

bool takes_arm(const Program& p, const Bytes& input, const ArmPair& target,
               const RunOptions& ro) {
  RunOptions r = ro;
  r.record_statements = false;
  auto t = run_traced(p, input, r);
  for (const auto& e : t.arm_events)
    if (e.cond == target.first && e.arm == target.second) return true;
  return false;
}

}  // namespace

std::vector<CaseValidation> validate_corpus(const fs::path& root,
                                            const ValidationOptions& opts) {
  std::vector<CaseValidation> results;
  fs::path work = opts.work_dir.empty() ? scratch_dir() / "gauntlet" : opts.work_dir;
  for (const auto& c : load_gauntlet(root)) {
    if (!opts.only.empty() &&
        std::find(opts.only.begin(), opts.only.end(), c.name) == opts.only.end())
      continue;
    CaseValidation v;
    v.name = c.name;
    v.difficulty = c.difficulty;
    auto issue = [&](std::string msg) { v.issues.push_back({c.name, std::move(msg)}); };
    try {
      CampaignConfig cfg = load_config(c.config);
      validate_config(cfg);
      v.loc = count_loc(c.dir / "src");
      if (v.loc > 200) issue(fmt::format("{} lines of source (limit 200)", v.loc));
      auto subject = build_subject(cfg.subject, work / c.name);
      const Program& prog = subject->program;
      RunOptions ro = run_options(cfg);

      std::vector<ExecutionTrace> seed_traces;
      std::vector<fs::path> seeds;
      for (const auto& e : fs::directory_iterator(cfg.seeds))
        if (e.is_regular_file()) seeds.push_back(e.path());
      std::sort(seeds.begin(), seeds.end());
      if (seeds.empty()) issue("no seeds");
      for (const auto& s : seeds) {
        auto t = run_traced(prog, *read_bytes(s), ro);
        if (t.exit_status == ExitStatus::Timeout || t.exit_status == ExitStatus::TraceCap)
          issue(fmt::format("seed {} ends with {}", s.filename().string(),
                            to_string(t.exit_status)));
        seed_traces.push_back(std::move(t));
      }
      auto cov = oracle_coverage(prog.guards, seed_traces);

      for (std::size_t ti = 0; ti < c.targets.size(); ++ti) {
        const auto& t = c.targets[ti];
        auto cond = prog.guards.parse_cond(t.cond);
        const Conditional* cd = cond ? subject->index.conditional(*cond) : nullptr;
        if (!cd || t.arm >= cd->arms.size()) {
          issue("unknown target " + t.cond);
          continue;
        }
        ArmPair pair{*cond, t.arm};
        if (cov.covered.count(pair)) issue(t.cond + " target arm already covered by seeds");
        if (ti == 0 && !cov.reached.count(*cond)) issue(t.cond + " not reached by seeds");

        auto witness = read_bytes(t.witness);
        if (!witness) {
          issue("missing witness " + t.witness.string());
          continue;
        }
        if (takes_arm(prog, *witness, pair, ro)) issue(t.cond + " witness already takes the arm");
        RunOptions so = ro;
        so.stop_at = *cond;
        auto trace = run_traced(prog, *witness, so);
        if (!trace.truncated_at) {
          issue(t.cond + " witness does not reach the guard");
          continue;
        }

        auto ref = reference_slice(subject->index, trace);
        std::string text = format_statements(subject->index, ref.statements);
        fs::path exp = c.slice_expectation(t);
        if (opts.write_expectations) {
          write_file_atomic(exp, text);
        } else if (!fs::exists(exp)) {
          issue("missing " + exp.filename().string());
        } else if (parse_statements(subject->index, read_text_file(exp)) != ref.statements) {
          issue(exp.filename().string() + " differs from the reference slice");
        }

        Slice slice = build_slice(subject->index, trace, *cond, t.arm);
        std::string key = roadblock_key(subject->index, *cond, t.arm);
        SolveRequest req;
        req.prompt = build_prompt(slice.flattened, *witness, key);
        req.witness = *witness;
        req.cond = *cond;
        req.target_arm = t.arm;
        req.flattened_slice = slice.flattened;
        bool hash_gate = c.difficulty == Difficulty::HashGated && ti + 1 == c.targets.size();
        std::unique_ptr<Solver> solver;
        if (t.scripted) {
          if (c.replay.empty()) {
            issue(t.cond + " is scripted but replay.json is missing");
            continue;
          }
          solver = std::make_unique<ScriptedSolver>(ScriptedSolver::load(c.replay), 1);
        } else {
          solver = std::make_unique<BruteforceSolver>(
              prog, ro, hash_gate ? opts.hash_trials : opts.trials, 1);
        }
        auto resp = solver->solve(req);
        bool solved = resp.extracted_input && takes_arm(prog, *resp.extracted_input, pair, ro);
        (solved ? v.solved : v.unsolved).push_back(t.cond);
        if (hash_gate && solved) issue(t.cond + " hash gate solved by " +
                                       std::string(to_string(solver->kind())));
        if (!hash_gate && !solved) issue(t.cond + " not solved by " +
                                         std::string(to_string(solver->kind())));
      }
    } catch (const BuildError& e) {
      issue(std::string("build failed: ") + e.what() + "\n" + e.diagnostics());
    } catch (const std::exception& e) {
      issue(e.what());
    }
    results.push_back(std::move(v));
  }
  return results;
}

}  // namespace slicefuzz
