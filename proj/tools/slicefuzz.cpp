#include <cstdio>
#include <filesystem>
#include <iostream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "slicefuzz/campaign.hpp"
#include "slicefuzz/config.hpp"
#include "slicefuzz/gauntlet.hpp"
#include "slicefuzz/report.hpp"
#include "slicefuzz/slicer.hpp"
#include "slicefuzz/solver.hpp"

namespace fs = std::filesystem;
using namespace slicefuzz;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitBuild = 3;

// Only `run` needs the solver settings to be complete.
CampaignConfig config_from(const std::string& path, bool for_run = false) {
  auto cfg = load_config(path);
  if (!for_run) cfg.solver_enabled = false;
  validate_config(cfg);
  return cfg;
}

fs::path tool_build_dir(const CampaignConfig& cfg) { return cfg.output / "build"; }

int cmd_run(const std::string& config, const std::string& output, const std::string& mode,
            double budget) {
  auto cfg = config_from(config, true);
  if (!output.empty()) cfg.output = fs::absolute(output);
  if (mode == "single") cfg.mode = CampaignMode::Single;
  if (mode == "threaded") {
    cfg.mode = CampaignMode::Threaded;
    cfg.clock = ClockKind::Wall;
  }
  if (budget > 0) cfg.budget_s = budget;
  Campaign c(cfg);
  auto m = c.run();
  std::cout << summary_json(m);
  return 0;
}

int cmd_trace(const std::string& target, const std::string& config, const std::string& input,
              const std::string& stop_at, bool arms) {
  Program prog;
  std::unique_ptr<Subject> subject;
  RunOptions ro;
  if (!config.empty()) {
    auto cfg = config_from(config);
    subject = build_subject(cfg.subject, tool_build_dir(cfg));
    prog = subject->program;
    ro = run_options(cfg);
  } else {
    prog.binary = fs::absolute(target);
    prog.guards = GuardTable::load(prog.binary.string() + ".guards.json");
  }
  if (!stop_at.empty()) {
    auto c = prog.guards.parse_cond(stop_at);
    if (!c) throw ConfigError("unknown conditional " + stop_at);
    ro.stop_at = *c;
  }
  auto data = read_bytes(input);
  if (!data) throw ConfigError("cannot read " + input);
  auto t = run_traced(prog, *data, ro);
  const auto& names = prog.guards.file_names();
  for (const auto& r : t.records) {
    std::string f = r.file_id < names.size() ? fs::path(names[r.file_id]).filename().string()
                                             : std::to_string(r.file_id);
    std::cout << fmt::format("{}:{}:{}\n", f, r.line, r.ordinal);
  }
  if (arms)
    for (const auto& e : t.arm_events) std::cout << fmt::format("arm {} {}\n", e.cond.str(), e.arm);
  std::cerr << fmt::format("status {} records {}{}\n", to_string(t.exit_status), t.records.size(),
                           t.truncated_at ? " truncated at " + t.truncated_at->str() : "");
  return 0;
}

int cmd_slice(const std::string& config, const std::string& cond_text, std::uint32_t arm,
              const std::string& seed, bool prompt) {
  auto cfg = config_from(config);
  auto subject = build_subject(cfg.subject, tool_build_dir(cfg));
  auto cond = subject->program.guards.parse_cond(cond_text);
  if (!cond) throw ConfigError("unknown conditional " + cond_text);
  auto data = read_bytes(seed);
  if (!data) throw ConfigError("cannot read " + seed);
  RunOptions ro = run_options(cfg);
  ro.stop_at = *cond;
  auto trace = run_traced(subject->program, *data, ro);
  if (!trace.truncated_at) {
    std::cerr << "the seed does not reach " << cond_text << "\n";
    return 1;
  }
  auto slice = build_slice(subject->index, trace, *cond, arm);
  for (const auto& w : slice.warnings) spdlog::warn("{}", w);
  if (prompt) {
    auto p = build_prompt(slice.flattened, *data, roadblock_key(subject->index, *cond, arm));
    std::cout << "### system\n" << p.system_text << "\n### user\n" << p.user_text;
  } else {
    std::cout << slice.flattened;
  }
  return 0;
}

int cmd_index(const std::string& config, const std::vector<std::string>& sources, bool dump) {
  AstIndex ix;
  if (!config.empty()) {
    auto cfg = config_from(config);
    std::vector<std::string> paths;
    for (const auto& s : cfg.subject.sources) paths.push_back(s.string());
    ix = AstIndex::build(paths);
  } else {
    ix = AstIndex::build(sources);
  }
  for (const auto& w : ix.warnings()) spdlog::warn("{}", w);
  if (dump) {
    std::cout << ix.dump_json() << "\n";
    return 0;
  }
  for (const auto& [id, c] : ix.conditionals())
    std::cout << fmt::format("{} {}:{} {} arms={}\n", id.str(),
                             fs::path(ix.file(id.file_id).path()).filename().string(),
                             c.guard_line, to_string(c.kind), c.arms.size());
  return 0;
}

int cmd_report(const std::string& out_dir) {
  auto m = load_metrics(out_dir);
  std::cout << fmt::format("{:>7} {:<22} {:>3} {:>8} {:>10} {:>10}  {}\n", "attempt", "location",
                           "arm", "slice_b", "pipeline_s", "solve_s", "outcome");
  for (const auto& a : m.attempts)
    std::cout << fmt::format("{:>7} {:<22} {:>3} {:>8} {:>10.4f} {:>10.4f}  {}\n", a.attempt,
                             a.location, a.arm, a.slice_bytes, a.pipeline_latency_s,
                             a.solve_latency_s, to_string(a.outcome));
  std::cout << "\n" << summary_json(m);
  return 0;
}

int cmd_validate(const std::string& root, const std::vector<std::string>& only, bool write,
                 int trials, int hash_trials) {
  ValidationOptions vo;
  vo.only = only;
  vo.write_expectations = write;
  vo.trials = trials;
  vo.hash_trials = hash_trials;
  auto results = validate_corpus(root.empty() ? default_gauntlet_root() : fs::path(root), vo);
  int bad = 0;
  for (const auto& r : results) {
    std::cout << fmt::format("{:<14} {:<15} loc={:<4} solved=[{}] unsolved=[{}] {}\n", r.name,
                             to_string(r.difficulty), r.loc, fmt::join(r.solved, " "),
                             fmt::join(r.unsolved, " "), r.issues.empty() ? "ok" : "FAIL");
    for (const auto& i : r.issues) std::cout << "    " << i.message << "\n";
    bad += !r.issues.empty();
  }
  return bad ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"slicefuzz: hybrid fuzzer with slice-guided roadblock solving"};
  app.require_subcommand(1);
  bool verbose = false, quiet = false;
  app.add_flag("-v,--verbose", verbose, "Debug logging");
  app.add_flag("-q,--quiet", quiet, "Warnings and errors only");

  std::string config, output, mode, target, input, stop_at, cond, seed, out_dir, root;
  std::vector<std::string> sources, only;
  double budget = 0;
  std::uint32_t arm = 0;
  bool dump = false, prompt = false, arms = false, write = false;
  int trials = 20000, hash_trials = 100000;

  auto* run = app.add_subcommand("run", "Run a campaign");
  run->add_option("-c,--config", config, "Campaign file")->required();
  run->add_option("-o,--output", output, "Override the output directory");
  run->add_option("--mode", mode, "single or threaded")->check(CLI::IsMember({"single", "threaded"}));
  run->add_option("--budget", budget, "Wall-clock budget in seconds");

  auto* trace = app.add_subcommand("trace", "Run one input and print its trace");
  auto* tgt = trace->add_option("--target", target, "Instrumented binary (with .guards.json)");
  trace->add_option("-c,--config", config, "Build the subject from a campaign file")->excludes(tgt);
  trace->add_option("-i,--input", input, "Input file")->required();
  trace->add_option("--stop-at", stop_at, "Conditional id or name.c:line");
  trace->add_flag("--arms", arms, "Also print arm events");

  auto* slice = app.add_subcommand("slice", "Print the flattened slice for a roadblock");
  slice->add_option("-c,--config", config, "Campaign file")->required();
  slice->add_option("--target-cond", cond, "Conditional id or name.c:line")->required();
  slice->add_option("--arm", arm, "Target arm id")->required();
  slice->add_option("--seed", seed, "Witness input")->required();
  slice->add_flag("--prompt", prompt, "Print the full prompt instead");

  auto* report = app.add_subcommand("report", "Summarize a campaign output directory");
  report->add_option("outdir", out_dir)->required();

  auto* index = app.add_subcommand("index", "List the conditionals of the subject");
  auto* icfg = index->add_option("-c,--config", config, "Campaign file");
  index->add_option("sources", sources, "C files")->excludes(icfg);
  index->add_flag("--dump-index", dump, "Print the index as JSON");

  auto* validate = app.add_subcommand("validate", "Check the gauntlet corpus");
  validate->add_option("--gauntlet", root, "Gauntlet directory");
  validate->add_option("--case", only, "Only these cases");
  validate->add_flag("--write-expect", write, "Rewrite expect/slice.*.txt from the oracle");
  validate->add_option("--trials", trials, "Bruteforce trials per target");
  validate->add_option("--hash-trials", hash_trials, "Bruteforce trials on hash gates");

  CLI11_PARSE(app, argc, argv);
  spdlog::set_level(verbose ? spdlog::level::debug
                            : quiet ? spdlog::level::warn : spdlog::level::info);
  spdlog::set_pattern("[%H:%M:%S] %^%l%$ %v");

  try {
    if (*run) return cmd_run(config, output, mode, budget);
    if (*trace) {
      if (target.empty() && config.empty()) throw ConfigError("trace needs --target or --config");
      return cmd_trace(target, config, input, stop_at, arms);
    }
    if (*slice) return cmd_slice(config, cond, arm, seed, prompt);
    if (*report) return cmd_report(out_dir);
    if (*index) {
      if (config.empty() && sources.empty()) throw ConfigError("index needs --config or sources");
      return cmd_index(config, sources, dump);
    }
    if (*validate) return cmd_validate(root, only, write, trials, hash_trials);
  } catch (const ConfigError& e) {
    spdlog::error("config: {}", e.what());
    return kExitConfig;
  } catch (const BuildError& e) {
    spdlog::error("build: {}\n{}", e.what(), e.diagnostics());
    return kExitBuild;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 1;
  }
  return 0;
}
