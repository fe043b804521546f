#include "slicefuzz/campaign.hpp"

#include <atomic>
#include <chrono>
#include <exception>
#include <fstream>
#include <thread>

#include <fmt/format.h>
#include <json.hpp>
#include <spdlog/spdlog.h>

#include "slicefuzz/fuzzer.hpp"
#include "slicefuzz/slicer.hpp"
#include "slicefuzz/solver.hpp"

namespace slicefuzz {

namespace fs = std::filesystem;
using Steady = std::chrono::steady_clock;

std::unique_ptr<Subject> build_subject(const SubjectConfig& cfg, const fs::path& build_dir) {
  std::vector<std::string> paths;
  for (const auto& s : cfg.sources) paths.push_back(s.string());
  auto subject = std::make_unique<Subject>();
  subject->index = AstIndex::build(paths);
  for (const auto& w : subject->index.warnings()) spdlog::warn("index: {}", w);
  fs::create_directories(build_dir);
  BuildOptions bo;
  bo.compiler = cfg.compiler;
  bo.cflags = cfg.cflags;
  bo.out_dir = build_dir;
  bo.output_name = "subject";
  subject->plain_binary = build_plain(subject->index, bo);
  subject->program = instrument(subject->index, bo);
  subject->program.args = cfg.args;
  return subject;
}

std::string roadblock_key(const AstIndex& ix, const CondId& c, std::uint32_t arm) {
  const Conditional* cond = ix.conditional(c);
  std::string file = fs::path(ix.file(c.file_id).path()).filename().string();
  return fmt::format("{}:{}:{}", file, cond ? cond->guard_line : 0, arm);
}

RunOptions run_options(const CampaignConfig& cfg) {
  RunOptions r;
  r.timeout = std::chrono::milliseconds(cfg.timeout_ms);
  r.trace_cap = cfg.trace_cap;
  return r;
}

namespace {

double seconds_since(Steady::time_point t0) {
  return std::chrono::duration<double>(Steady::now() - t0).count();
}

// Reads "key : value" lines written by Fuzzer::write_stats.
std::optional<double> read_stat(const fs::path& stats, std::string_view key) {
  std::ifstream f(stats);
  std::string line;
  while (std::getline(f, line)) {
    auto colon = line.find(':');
    if (colon == std::string::npos || trim(line.substr(0, colon)) != key) continue;
    try {
      return std::stod(line.substr(colon + 1));
    } catch (const std::exception&) {
      return std::nullopt;
    }
  }
  return std::nullopt;
}

std::vector<CoveragePoint> read_stats_tsv(const fs::path& p) {
  std::vector<CoveragePoint> out;
  std::ifstream f(p);
  std::string line;
  std::getline(f, line);  // header
  while (std::getline(f, line)) {
    std::istringstream is(line);
    CoveragePoint pt;
    std::uint64_t execs = 0, kept = 0;
    if (is >> pt.elapsed_s >> execs >> kept >> pt.arms) out.push_back(pt);
  }
  return out;
}

class Orchestrator {
 public:
  Orchestrator(const CampaignConfig& cfg, const Subject& subject)
      : cfg_(cfg),
        subject_(subject),
        corpus_(cfg.output),
        analyzer_(subject.index, CoverageConfig{2, 1, cfg.rng_seed}) {
    fs::create_directories(cfg.output / "artifacts" / "roadblocks");
    if (fs::exists(cfg.output / "roadblocks.csv")) {
      // restart: keep the attempts already on disk
      metrics_.attempts = read_roadblocks_csv(cfg.output / "roadblocks.csv");
      for (const auto& a : metrics_.attempts) {
        if (a.outcome == AttemptOutcome::Kept || a.outcome == AttemptOutcome::Discarded)
          ++metrics_.injected;
        if (a.outcome == AttemptOutcome::Kept) ++metrics_.kept;
      }
    }
    if (cfg.solver_enabled) {
      const auto& s = cfg.solver;
      int budget = s.backend == BackendKind::Remote ? s.query_budget : s.test_budget;
      if (budget > 0) solver_ = make_solver(s, &subject.program, run_options(cfg));
    }
    if (!solver_) metrics_.solver_hard_stop = cfg.solver_enabled;
    if (!cfg.goal.empty()) {
      auto colon = cfg.goal.rfind(':');
      auto c = colon == std::string::npos
                   ? std::nullopt
                   : subject.program.guards.parse_cond(cfg.goal.substr(0, colon));
      if (!c) throw ConfigError("campaign.goal: unknown conditional " + cfg.goal);
      goal_ = ArmPair{*c, static_cast<std::uint32_t>(std::stoul(cfg.goal.substr(colon + 1)))};
    }
  }

  CampaignMetrics run() {
    write_file_atomic(cfg_.output / "manifest.json", config_json(cfg_) + "\n");
    start_ = Steady::now();
    if (cfg_.mode == CampaignMode::Single) run_single();
    else run_threaded();
    finish();
    return metrics_;
  }

  const std::set<ArmPair>& covered() const { return covered_; }

 private:
  // Seeds on disk from an earlier run are resumed instead of re-imported.
  void start_fuzzer(Fuzzer& f) {
    std::error_code ec;
    if (fs::exists(corpus_.queue_dir()) && !fs::is_empty(corpus_.queue_dir(), ec)) {
      spdlog::info("resuming corpus in {}", corpus_.queue_dir().string());
      f.resume();
      f.write_stats();
      return;
    }
    std::vector<fs::path> seeds;
    if (fs::is_directory(cfg_.seeds)) {
      for (const auto& e : fs::directory_iterator(cfg_.seeds))
        if (e.is_regular_file() && e.path().filename().string()[0] != '.')
          seeds.push_back(e.path());
    } else if (!cfg_.seeds.empty()) {
      seeds.push_back(cfg_.seeds);
    }
    f.load_initial(seeds);
  }

  bool reached_goal(const Fuzzer& f) const { return goal_ && f.covered().count(*goal_); }

  bool solver_active() const { return solver_ && !metrics_.solver_hard_stop; }

  bool attempts_exhausted() const {
    return cfg_.max_attempts > 0 &&
           static_cast<int>(metrics_.attempts.size()) >= cfg_.max_attempts;
  }

  void run_single() {
    if (cfg_.clock == ClockKind::Logical) own_clock_ = std::make_unique<LogicalClock>(cfg_.exec_tick_s);
    else own_clock_ = std::make_unique<SteadyClock>();
    clock_ = own_clock_.get();
    auto& clock = clock_;
    FuzzerConfig fc{cfg_.rng_seed, cfg_.fuzz, cfg_.plateau_s, 4096};
    Fuzzer fuzzer(subject_.program, run_options(cfg_), corpus_, fc, *clock);
    start_fuzzer(fuzzer);
    auto import = [&](std::uint32_t llm_id) -> std::optional<bool> {
      for (const auto& r : fuzzer.sync())
        if (r.llm_id == llm_id) return r.kept;
      return corpus_.import_outcome(llm_id);
    };
    double last_attempt = -1e300;
    double next_flush = cfg_.flush_s;
    while (true) {
      if (seconds_since(start_) > cfg_.budget_s) { stop("budget"); break; }
      if (cfg_.max_execs && fuzzer.execs() >= cfg_.max_execs) { stop("max-execs"); break; }
      if (cfg_.fuzz) fuzzer.fuzz_step();
      if (reached_goal(fuzzer)) { stop("goal"); break; }
      if (clock->now() >= next_flush) {
        next_flush = clock->now() + cfg_.flush_s;
        fuzzer.write_stats();
        flush(fuzzer.execs(), fuzzer.covered().size(), fuzzer.crashes());
      }
      bool plateau = !cfg_.fuzz ||
                     clock->now() - std::max(fuzzer.last_find(), last_attempt) > cfg_.plateau_s;
      if (plateau && solver_active()) {
        bool attempted = attempt(import);
        last_attempt = clock->now();
        if (!attempted && !cfg_.fuzz) { stop("interest-empty"); break; }
        if (attempts_exhausted()) { stop("max-attempts"); break; }
      }
      if (!cfg_.fuzz && !solver_active()) { stop("solver-done"); break; }
    }
    fuzzer.sync();
    fuzzer.write_stats();
    covered_ = fuzzer.covered();
    metrics_.execs = fuzzer.execs();
    metrics_.crashes = fuzzer.crashes();
  }

  void run_threaded() {
    own_clock_ = std::make_unique<SteadyClock>();
    clock_ = own_clock_.get();
    auto& clock = *clock_;
    FuzzerConfig fc{cfg_.rng_seed, cfg_.fuzz, cfg_.plateau_s, 4096};
    Fuzzer fuzzer(subject_.program, run_options(cfg_), corpus_, fc, clock);
    start_fuzzer(fuzzer);

    std::atomic<bool> stop_flag{false};
    std::exception_ptr fuzz_error;
    std::string fuzz_stop;
    std::thread worker([&] {
      try {
        auto last_sync = Steady::now();
        auto last_flush = Steady::now();
        while (!stop_flag.load()) {
          if (cfg_.fuzz) fuzzer.fuzz_step();
          else std::this_thread::sleep_for(std::chrono::milliseconds(2));
          if (seconds_since(last_sync) > 0.02) {
            fuzzer.sync();
            last_sync = Steady::now();
          }
          if (seconds_since(last_flush) > cfg_.flush_s) {
            fuzzer.write_stats();
            last_flush = Steady::now();
          }
          if (cfg_.max_execs && fuzzer.execs() >= cfg_.max_execs) {
            fuzz_stop = "max-execs";
            stop_flag = true;
          }
          if (reached_goal(fuzzer)) {
            fuzz_stop = "goal";
            stop_flag = true;
          }
        }
        fuzzer.sync();
        fuzzer.write_stats();
      } catch (...) {
        fuzz_error = std::current_exception();
        stop_flag = true;
      }
    });

    // The orchestrator only sees the fuzzer through files in the output dir.
    fs::path stats = cfg_.output / "main" / "fuzzer_stats";
    auto import = [&](std::uint32_t llm_id) -> std::optional<bool> {
      while (!stop_flag.load()) {
        if (auto r = corpus_.import_outcome(llm_id)) return r;
        std::this_thread::sleep_for(std::chrono::milliseconds(5));
      }
      return corpus_.import_outcome(llm_id);
    };
    double last_attempt = -1e300;
    auto last_flush = Steady::now();
    try {
      while (!stop_flag.load()) {
        if (seconds_since(start_) > cfg_.budget_s) { stop("budget"); break; }
        double last_find = read_stat(stats, "last_find_s").value_or(0);
        bool plateau = !cfg_.fuzz ||
                       clock.now() - std::max(last_find, last_attempt) > cfg_.plateau_s;
        if (plateau && solver_active()) {
          bool attempted = attempt(import);
          last_attempt = clock.now();
          if (!attempted && !cfg_.fuzz) { stop("interest-empty"); break; }
          if (attempts_exhausted()) { stop("max-attempts"); break; }
        } else {
          std::this_thread::sleep_for(std::chrono::milliseconds(10));
        }
        if (!cfg_.fuzz && !solver_active()) { stop("solver-done"); break; }
        if (seconds_since(last_flush) > cfg_.flush_s) {
          last_flush = Steady::now();
          flush(static_cast<std::uint64_t>(read_stat(stats, "execs_done").value_or(0)),
                static_cast<std::size_t>(read_stat(stats, "arms_covered").value_or(0)),
                static_cast<std::uint64_t>(read_stat(stats, "saved_crashes").value_or(0)));
        }
      }
    } catch (...) {
      stop_flag = true;
      worker.join();
      throw;
    }
    stop_flag = true;
    worker.join();
    if (fuzz_error) std::rethrow_exception(fuzz_error);
    if (!fuzz_stop.empty() && metrics_.stop_reason.empty()) metrics_.stop_reason = fuzz_stop;
    covered_ = fuzzer.covered();
    metrics_.execs = fuzzer.execs();
    metrics_.crashes = fuzzer.crashes();
  }

  void stop(const char* reason) {
    if (metrics_.stop_reason.empty()) metrics_.stop_reason = reason;
  }

  std::optional<ExecutionTrace> trace_seed(const fs::path& p) {
    auto data = read_bytes(p);
    if (!data) return std::nullopt;
    auto t = run_traced(subject_.program, *data, run_options(cfg_));
    t.seed_id = p.filename().string();
    return t;
  }

  // One roadblock attempt. False when there was nothing to attempt.
  template <class Import>
  bool attempt(Import& import) {
    analyzer_.analyze_corpus(corpus_.queue_dir(),
                             [&](const fs::path& p) { return trace_seed(p); });
    analyzer_.save(cfg_.output);
    auto rb = analyzer_.retrieve_roadblock();
    if (!rb) return false;

    const AstIndex& ix = subject_.index;
    AttemptRecord rec;
    rec.attempt = metrics_.attempts.empty() ? 1 : metrics_.attempts.back().attempt + 1;
    rec.cond_id = rb->cond.str();
    rec.arm = rb->target_arm;
    rec.seed = rb->seed;
    std::string key = roadblock_key(ix, rb->cond, rb->target_arm);
    rec.location = key.substr(0, key.rfind(':'));
    fs::path art = cfg_.output / "artifacts" / "roadblocks" / std::to_string(rec.attempt);
    fs::create_directories(art);
    spdlog::info("roadblock {}: {} arm {} witness {}", rec.attempt, rec.location,
                 rec.arm, rec.seed);

    auto finish_attempt = [&](AttemptOutcome o, std::string note = {}) {
      rec.outcome = o;
      rec.note = std::move(note);
      rec.elapsed_s = clock_->now();
      nlohmann::json j{{"attempt", rec.attempt}, {"cond_id", rec.cond_id},
                       {"key", key},            {"arm", rec.arm},
                       {"seed", rec.seed},      {"outcome", std::string(to_string(o))},
                       {"note", rec.note}};
      write_file_atomic(art / "roadblock.json", j.dump(2) + "\n");
      if (o != AttemptOutcome::Kept && o != AttemptOutcome::Skipped)
        spdlog::info("roadblock {}: {}", rec.attempt, to_string(o));
      metrics_.attempts.push_back(rec);
      return true;
    };

    auto t0 = Steady::now();
    auto witness = read_bytes(corpus_.queue_dir() / rb->seed);
    if (!witness) return finish_attempt(AttemptOutcome::Skipped, "witness unreadable");
    RunOptions ro = run_options(cfg_);
    ro.stop_at = rb->cond;
    ExecutionTrace trace = run_traced(subject_.program, *witness, ro);
    if (!trace.truncated_at)
      return finish_attempt(AttemptOutcome::Skipped, "witness does not reach the guard");

    Slice slice;
    Prompt prompt;
    try {
      SliceOptions so;
      slice = build_slice(ix, trace, rb->cond, rb->target_arm, so);
      prompt = build_prompt(slice.flattened, *witness, key);
      std::size_t limit = cfg_.solver.max_prompt_tokens;
      if (prompt.estimated_tokens() > limit) {
        std::size_t overhead = prompt.system_text.size() + prompt.user_text.size() -
                               slice.flattened.size();
        if (limit * 4 <= overhead + 256)
          return finish_attempt(AttemptOutcome::Skipped, "prompt over token limit");
        so.max_chars = limit * 4 - overhead;
        slice = build_slice(ix, trace, rb->cond, rb->target_arm, so);
        prompt = build_prompt(slice.flattened, *witness, key);
        if (prompt.estimated_tokens() > limit)
          return finish_attempt(AttemptOutcome::Skipped, "prompt over token limit");
      }
    } catch (const SliceError& e) {
      return finish_attempt(AttemptOutcome::Skipped, std::string("slice: ") + e.what());
    }
    rec.pipeline_latency_s = seconds_since(t0);
    rec.slice_bytes = slice.flattened.size();
    write_file_atomic(art / "slice.c.txt", slice.flattened);
    write_file_atomic(art / "prompt.txt",
                      "### system\n" + prompt.system_text + "\n### user\n" + prompt.user_text);

    SolveRequest req;
    req.prompt = prompt;
    req.witness = *witness;
    req.cond = rb->cond;
    req.target_arm = rb->target_arm;
    req.flattened_slice = slice.flattened;
    req.record_dir = art;
    SolverResponse resp;
    try {
      resp = solver_->solve(req);
    } catch (const std::exception& e) {
      resp.error = e.what();
    }
    rec.solve_latency_s = resp.latency_s;
    metrics_.remote_requests = solver_->kind() == BackendKind::Remote
                                   ? solver_->requests_issued()
                                   : 0;
    if (!resp.raw_text.empty()) write_file_atomic(art / "response.txt", resp.raw_text);
    if (solver_->budget_left() <= 0) {
      metrics_.solver_hard_stop = true;
      spdlog::info("solver budget exhausted; continuing without the solver");
    }
    if (resp.hard_stop) return finish_attempt(AttemptOutcome::Skipped, "solver budget exhausted");
    if (!resp.extracted_input)
      return finish_attempt(AttemptOutcome::DecodeFailed, resp.error);

    std::uint32_t llm_id = corpus_.inject(*resp.extracted_input);
    ++metrics_.injected;
    auto kept = import(llm_id);
    if (!kept) {
      --metrics_.injected;
      return finish_attempt(AttemptOutcome::Skipped, "campaign stopped before import");
    }
    if (*kept) {
      ++metrics_.kept;
      analyzer_.reward(rb->cond);
      spdlog::info("roadblock {}: kept (llm id {})", rec.attempt, llm_id);
      return finish_attempt(AttemptOutcome::Kept);
    }
    return finish_attempt(AttemptOutcome::Discarded);
  }

  void flush(std::uint64_t execs, std::size_t arms, std::uint64_t crashes) {
    metrics_.execs = execs;
    metrics_.arms_covered = arms;
    metrics_.crashes = crashes;
    metrics_.elapsed_s = clock_->now();
    metrics_.coverage = read_stats_tsv(cfg_.output / "main" / "stats.tsv");
    emit_report(metrics_, cfg_.output);
  }

  void finish() {
    metrics_.elapsed_s = clock_ ? clock_->now() : 0;
    metrics_.arms_covered = covered_.size();
    if (solver_ && solver_->kind() == BackendKind::Remote)
      metrics_.remote_requests = solver_->requests_issued();
    metrics_.coverage = read_stats_tsv(cfg_.output / "main" / "stats.tsv");
    emit_report(metrics_, cfg_.output);
    spdlog::info("campaign done ({}): {} execs, {} arms, {} attempts, {}/{} injected kept",
                 metrics_.stop_reason, metrics_.execs, metrics_.arms_covered,
                 metrics_.attempts.size(), metrics_.kept, metrics_.injected);
  }

  const CampaignConfig& cfg_;
  const Subject& subject_;
  Corpus corpus_;
  CoverageAnalyzer analyzer_;
  std::unique_ptr<Solver> solver_;
  CampaignMetrics metrics_;
  std::set<ArmPair> covered_;
  std::optional<ArmPair> goal_;
  std::unique_ptr<CampaignClock> own_clock_;
  CampaignClock* clock_ = nullptr;
  Steady::time_point start_;
};

}  // namespace

Campaign::Campaign(CampaignConfig cfg) : cfg_(std::move(cfg)) {
  validate_config(cfg_);
  fs::create_directories(cfg_.output);
  subject_ = build_subject(cfg_.subject, cfg_.output / "build");
}

Campaign::~Campaign() = default;

CampaignMetrics Campaign::run() {
  Orchestrator o(cfg_, *subject_);
  auto m = o.run();
  covered_ = o.covered();
  return m;
}

}  // namespace slicefuzz
