// One line per acceptance criterion; exit status 1 if any fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <string>

#include <fmt/format.h>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "../common/campaign_fixtures.hpp"
#include "slicefuzz/coverage.hpp"
#include "slicefuzz/report.hpp"
#include "slicefuzz/slicer.hpp"
#include "slicefuzz/solver.hpp"

using namespace slicefuzz;
namespace fx = fixtures;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t) {
  return std::chrono::duration<double>(Clock::now() - t).count();
}

// ---- shared state: end-to-end campaigns also feed the latency criterion ----

std::vector<double> g_pipeline_latencies;
std::vector<fs::path> g_summaries;

std::unique_ptr<Subject> build_case(const GauntletCase& gc, const std::string& tag) {
  auto cfg = load_config(gc.config);
  return build_subject(cfg.subject, fx::fresh_dir("acc_" + tag + "_" + gc.name));
}

Verdict slicer_soundness() {
  auto start = Clock::now();
  int checked = 0;
  std::vector<std::string> bad;
  for (const auto& gc : load_gauntlet(default_gauntlet_root())) {
    auto sub = build_case(gc, "slice");
    auto ro = run_options(load_config(gc.config));
    for (const auto& t : gc.targets) {
      auto cond = sub->program.guards.parse_cond(t.cond);
      auto witness = read_bytes(gc.dir / t.witness);
      if (!cond || !witness) {
        bad.push_back(t.cond + " (fixture)");
        continue;
      }
      ro.stop_at = *cond;
      auto trace = run_traced(sub->program, *witness, ro);
      if (!trace.truncated_at) {
        bad.push_back(t.cond + " (not reached)");
        continue;
      }
      auto ref = reference_slice(sub->index, trace);
      auto slice = build_slice(sub->index, trace, *cond, t.arm);
      bool superset = std::includes(slice.statements.begin(), slice.statements.end(),
                                    ref.statements.begin(), ref.statements.end());
      auto flat = std::make_shared<SourceFile>(0, "slice.c", slice.flattened);
      bool reparses = AstIndex::build(std::vector<SourcePtr>{flat}).warnings().empty();
      if (!superset) bad.push_back(t.cond + " (misses oracle statements)");
      if (!reparses) bad.push_back(t.cond + " (does not re-parse)");
      ++checked;
    }
  }
  double s = since(start);
  std::string detail = fmt::format("{} targets, {} violations, {:.1f} s", checked, bad.size(), s);
  for (const auto& b : bad) detail += "; " + b;
  return {bad.empty() && checked > 0 && s < 30.0, detail};
}

Verdict coverage_oracle() {
  auto start = Clock::now();
  int cases = 0;
  std::vector<std::string> bad;
  std::size_t pairs = 0;
  for (const auto& gc : load_gauntlet(default_gauntlet_root())) {
    auto cfg = load_config(gc.config);
    auto sub = build_case(gc, "cov");
    auto ro = run_options(cfg);
    std::vector<ExecutionTrace> traces;
    auto provider = [&](const fs::path& p) -> std::optional<ExecutionTrace> {
      auto data = read_bytes(p);
      if (!data) return std::nullopt;
      auto t = run_traced(sub->program, *data, ro);
      t.seed_id = p.filename().string();
      traces.push_back(t);
      return t;
    };
    CoverageAnalyzer an(sub->index);
    an.analyze_corpus(cfg.seeds, provider);
    auto oracle = oracle_coverage(sub->program.guards, traces);
    std::set<CondId> reached;
    for (const auto& [c, cc] : an.report().conds) reached.insert(c);
    if (an.report().pairs() != oracle.covered || reached != oracle.reached) bad.push_back(gc.name);
    pairs += oracle.covered.size();
    ++cases;
  }
  double s = since(start);
  std::string detail =
      fmt::format("{} cases, {} arm pairs, {} mismatches, {:.1f} s", cases, pairs, bad.size(), s);
  for (const auto& b : bad) detail += "; " + b;
  return {bad.empty() && cases > 0 && s < 10.0, detail};
}

// Five conditionals, each reached with one arm covered by the seed.
struct FiveConds {
  std::unique_ptr<Subject> sub;
  ExecutionTrace seed_trace;

  FiveConds() {
    SubjectConfig sc;
    sc.sources = {fx::src("five_ifs.c")};
    sc.cflags = {"-O0", "-w"};
    sub = build_subject(sc, fx::fresh_dir("acc_five_ifs"));
    seed_trace = run_traced(sub->program, string_to_bytes("zzzzz"));
    seed_trace.seed_id = "seed";
  }
  CoverageAnalyzer analyzer(std::uint64_t rng_seed) const {
    CoverageAnalyzer an(sub->index, CoverageConfig{2, 1, rng_seed});
    an.add_trace("seed", 5, seed_trace);
    return an;
  }
};

Verdict round_robin(const FiveConds& f) {
  auto start = Clock::now();
  auto an = f.analyzer(12345);
  if (an.interest().size() != 5) return {false, fmt::format("{} candidates", an.interest().size())};
  std::map<CondId, int> picks;
  for (int i = 0; i < 50; ++i) ++picks[an.retrieve_roadblock()->cond];
  std::string counts;
  bool even = picks.size() == 5;
  for (const auto& [c, n] : picks) {
    counts += fmt::format("{} ", n);
    even &= n == 10;
  }
  double s = since(start);
  return {even && s < 1.0, fmt::format("k=5 M=50 selections per candidate: {}({:.3f} s)", counts, s)};
}

Verdict reward_precedence(const FiveConds& f) {
  auto start = Clock::now();
  std::mt19937_64 rng(2024);
  int ok = 0;
  for (int trial = 0; trial < 100; ++trial) {
    auto an = f.analyzer(rng());
    int warmup = static_cast<int>(rng() % 23);
    for (int i = 0; i < warmup; ++i) an.retrieve_roadblock();
    std::vector<CondId> conds;
    for (const auto& [c, v] : an.interest()) conds.push_back(c);
    CondId target = conds[rng() % conds.size()];
    an.reward(target);
    ok += an.retrieve_roadblock()->cond == target;
  }
  double s = since(start);
  return {ok == 100 && s < 1.0, fmt::format("{}/100 trials picked the rewarded conditional ({:.3f} s)", ok, s)};
}

Verdict end_to_end() {
  int broken = 0, eligible = 0, cases = 0;
  std::vector<std::string> notes;
  for (const auto& gc : load_gauntlet(default_gauntlet_root())) {
    ++cases;
    bool hash = gc.difficulty == Difficulty::HashGated;
    auto cfg = fx::gauntlet_config(gc, fx::fresh_dir("acc_e2e_" + gc.name));
    cfg.max_attempts = 3;
    cfg.budget_s = 120;
    auto t0 = Clock::now();
    Campaign campaign(cfg);
    auto m = campaign.run();
    double wall = since(t0);
    for (const auto& a : m.attempts)
      if (a.outcome != AttemptOutcome::Skipped) g_pipeline_latencies.push_back(a.pipeline_latency_s);
    g_summaries.push_back(cfg.output / "summary.json");
    bool covered = fx::covers(campaign, gc.e2e_target());
    if (hash) {
      notes.push_back(fmt::format("{}: {} (hash gate)", gc.name, covered ? "covered" : "not covered"));
      if (covered) ++broken;
      continue;
    }
    ++eligible;
    bool in_time = covered && m.attempts.size() <= 3 && wall <= 120.0;

    auto neg = fx::gauntlet_config(gc, fx::fresh_dir("acc_neg_" + gc.name));
    neg.solver_enabled = false;
    neg.max_execs = 10000;
    Campaign control(neg);
    auto nm = control.run();
    bool control_closed = !fx::covers(control, gc.e2e_target()) && nm.execs >= 10000;
    if (in_time && control_closed) ++broken;
    else
      notes.push_back(fmt::format("{}: solver {} in {} attempts/{:.1f} s, control {} after {} execs",
                                  gc.name, covered ? "covered" : "missed", m.attempts.size(),
                                  wall, control_closed ? "closed" : "OPEN", nm.execs));
  }
  std::string detail = fmt::format("{}/{} cases broken within 3 attempts and 120 s, negative control held",
                                   broken, cases);
  for (const auto& n : notes) detail += "; " + n;
  return {broken >= 8 && broken >= eligible && eligible > 0, detail};
}

Verdict pipeline_latency() {
  if (g_pipeline_latencies.empty()) return {false, "no attempts recorded"};
  double med = median(g_pipeline_latencies);
  bool reported = !g_summaries.empty();
  for (const auto& p : g_summaries) {
    auto j = nlohmann::json::parse(read_text_file(p), nullptr, false);
    reported &= !j.is_discarded() && j.contains("pipeline_latency_s") &&
                j["pipeline_latency_s"].contains("median");
  }
  return {med <= 1.0 && reported,
          fmt::format("median {:.4f} s over {} attempts, in summary.json: {}", med,
                      g_pipeline_latencies.size(), reported ? "yes" : "no")};
}

CampaignConfig scripted_campaign(const std::string& tag, const std::string& source,
                                 const std::string& seed,
                                 const std::vector<std::pair<std::string, std::string>>& script) {
  auto work = fx::fresh_dir(tag);
  fx::write_seeds(work / "seeds", {{"seed", seed}});
  auto cfg = fx::fixture_config({source}, work);
  cfg.solver.backend = BackendKind::Scripted;
  cfg.solver.script = fx::write_script(work / "replay.json", script);
  cfg.solver.test_budget = static_cast<int>(script.size());
  return cfg;
}

Verdict effective_ratio() {
  std::vector<std::pair<std::string, std::string>> script;
  for (const char* in : {"b", "b", "c", "c", "a", "a", "d", "d", "a", "a"})
    script.emplace_back("*", fx::block(in));
  auto cfg = scripted_campaign("acc_ratio", "switch10.c", "a", script);
  cfg.fuzz = false;
  auto m = Campaign(cfg).run();
  auto j = nlohmann::json::parse(read_text_file(cfg.output / "summary.json"));
  bool exact = j["effective_ratio"].is_number() && j["effective_ratio"].get<double>() == 0.30;
  return {exact && m.injected == 10 && m.kept == 3,
          fmt::format("{} injected, {} kept, summary effective_ratio {}", m.injected, m.kept,
                      j["effective_ratio"].dump())};
}

Verdict budget_conservation() {
  constexpr int kBudget = 5;
  fx::MockEndpoint mock;
  mock.reply = "The bytes should probably be different.\n" + fx::block("AAAA");
  auto gc = load_case(default_gauntlet_root() / "magic4");
  auto cfg = fx::gauntlet_config(gc, fx::fresh_dir("acc_budget"));
  cfg.goal.clear();
  cfg.max_attempts = 0;
  cfg.max_execs = 6000;
  cfg.plateau_s = 0.05;
  cfg.solver.backend = BackendKind::Remote;
  cfg.solver.endpoint = mock.url();
  cfg.solver.query_budget = kBudget;
  cfg.solver.max_retries = 0;
  cfg.solver.timeout_s = 5;
  auto m = Campaign(cfg).run();
  double last_attempt = m.attempts.empty() ? 0 : m.attempts.back().elapsed_s;
  bool kept_fuzzing = m.execs >= 6000 && m.elapsed_s > last_attempt + 1.0;
  bool exact = mock.hits == kBudget && m.remote_requests == kBudget;
  return {exact && m.solver_hard_stop && kept_fuzzing && m.stop_reason == "max-execs",
          fmt::format("query_budget={}: {} requests at the mock, {} recorded, then {} execs of plain "
                      "fuzzing (stop: {})",
                      kBudget, mock.hits.load(), m.remote_requests, m.execs, m.stop_reason)};
}

Verdict encoding_round_trip() {
  std::mt19937_64 rng(7);
  int ok = 0;
  for (int i = 0; i < 10000; ++i) {
    Bytes b(rng() % 257);
    for (auto& x : b) x = static_cast<std::uint8_t>(rng());
    auto prompt = build_prompt("int main(void) {\n  assert(1);\n}\n", b);
    auto reply = "```input\n" + encode_input(b) + "\n```";
    auto back = decode_response(reply);
    ok += back && *back == b && prompt.user_text.find(encode_input(b)) != std::string::npos;
  }
  return {ok == 10000, fmt::format("{}/10000 random byte strings survived", ok)};
}

Verdict determinism() {
  std::vector<std::pair<std::string, std::string>> script;
  for (const char* in : {"\\x11zzzz", "zz", "\\x11zzzz", "zzz\\x44z", "no block here",
                         "z\\x22zzzzz", "\\x11\\x22\\x33\\x44"})
    script.emplace_back("*", in[0] == 'n' ? std::string(in) : fx::block(in));
  std::string csv[2];
  std::size_t attempts = 0;
  for (int run = 0; run < 2; ++run) {
    auto cfg = scripted_campaign("acc_determinism_" + std::to_string(run), "five_ifs.c", "zzzzz",
                                 script);
    cfg.rng_seed = 99;
    cfg.max_attempts = 7;
    cfg.max_execs = 50000;
    auto m = Campaign(cfg).run();
    attempts = m.attempts.size();
    csv[run] = roadblocks_csv(read_roadblocks_csv(cfg.output / "roadblocks.csv"), false);
  }
  return {csv[0] == csv[1] && attempts == 7,
          fmt::format("{} attempts per run, roadblocks.csv without timing columns {}", attempts,
                      csv[0] == csv[1] ? "identical" : "DIFFERS")};
}

}  // namespace

int main() {
  spdlog::set_level(spdlog::level::err);
  FiveConds five;
  std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
      {"slicer oracle soundness", slicer_soundness},
      {"coverage oracle equivalence", coverage_oracle},
      {"round-robin fairness", [&] { return round_robin(five); }},
      {"reward precedence", [&] { return reward_precedence(five); }},
      {"end-to-end roadblock breaking", end_to_end},
      {"pipeline latency", pipeline_latency},
      {"effective-ratio accounting", effective_ratio},
      {"budget conservation", budget_conservation},
      {"encoding round-trip", encoding_round_trip},
      {"determinism", determinism},
  };
  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    Verdict v;
    try {
      v = fn();
    } catch (const std::exception& e) {
      v = {false, std::string("error: ") + e.what()};
    }
    failed += !v.pass;
    std::printf("%s %-30s %s\n", v.pass ? "PASS" : "FAIL", name.c_str(), v.detail.c_str());
    std::fflush(stdout);
  }
  return failed ? 1 : 0;
}
