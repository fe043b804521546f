#include "slicefuzz/config.hpp"

#include <cstdlib>
#include <set>

#include <fmt/format.h>
#include <json.hpp>
#include <toml.hpp>

namespace slicefuzz {

namespace fs = std::filesystem;

namespace {

void check_keys(const toml::table& t, std::string_view table,
                const std::set<std::string, std::less<>>& allowed) {
  for (const auto& [k, v] : t) {
    (void)v;
    if (!allowed.count(k.str()))
      throw ConfigError(fmt::format("unknown key [{}].{}", table, k.str()));
  }
}

template <class T>
void read_int(const toml::table& t, std::string_view key, T& out) {
  const toml::node* n = t.get(key);
  if (!n) return;
  auto v = n->value<std::int64_t>();
  if (!v) throw ConfigError(fmt::format("{} must be an integer", key));
  if (*v < 0) throw ConfigError(fmt::format("{} must not be negative", key));
  out = static_cast<T>(*v);
}

void read_double(const toml::table& t, std::string_view key, double& out) {
  const toml::node* n = t.get(key);
  if (!n) return;
  auto v = n->value<double>();  // integers convert
  if (!v) throw ConfigError(fmt::format("{} must be a number", key));
  out = *v;
}

void read_bool(const toml::table& t, std::string_view key, bool& out) {
  const toml::node* n = t.get(key);
  if (!n) return;
  auto v = n->value<bool>();
  if (!v) throw ConfigError(fmt::format("{} must be true or false", key));
  out = *v;
}

bool read_string(const toml::table& t, std::string_view key, std::string& out) {
  const toml::node* n = t.get(key);
  if (!n) return false;
  auto v = n->value<std::string>();
  if (!v) throw ConfigError(fmt::format("{} must be a string", key));
  out = *v;
  return true;
}

std::vector<std::string> read_strings(const toml::table& t, std::string_view key) {
  std::vector<std::string> out;
  const toml::node* n = t.get(key);
  if (!n) return out;
  if (auto s = n->value<std::string>()) return {*s};
  const toml::array* arr = n->as_array();
  if (!arr) throw ConfigError(fmt::format("{} must be a string array", key));
  for (const auto& e : *arr) {
    auto s = e.value<std::string>();
    if (!s) throw ConfigError(fmt::format("{} must be a string array", key));
    out.push_back(*s);
  }
  return out;
}

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path q(p);
  return q.is_absolute() ? q : (base / q).lexically_normal();
}

}  // namespace

std::string_view to_string(CampaignMode m) {
  return m == CampaignMode::Single ? "single" : "threaded";
}

CampaignConfig parse_config(std::string_view text, const fs::path& base_dir) {
  toml::table root;
  try {
    root = toml::parse(text);
  } catch (const toml::parse_error& e) {
    throw ConfigError(fmt::format("line {}: {}", e.source().begin.line,
                                  e.description()));
  }

  CampaignConfig c;
  c.mode = CampaignMode::Threaded;
  bool clock_set = false;

  const toml::table* subject = root["subject"].as_table();
  if (!subject) throw ConfigError("missing [subject] table");
  check_keys(*subject, "subject", {"sources", "cflags", "compiler", "args"});
  for (const auto& s : read_strings(*subject, "sources"))
    c.subject.sources.push_back(resolve(base_dir, s));
  if (c.subject.sources.empty()) throw ConfigError("subject.sources is empty");
  for (auto f : read_strings(*subject, "cflags")) {
    // -I/-include arguments name files next to the config
    if (f.starts_with("-I") && f.size() > 2 && f[2] != '/')
      f = "-I" + resolve(base_dir, f.substr(2)).string();
    c.subject.cflags.push_back(f);
  }
  for (std::size_t i = 0; i + 1 < c.subject.cflags.size(); ++i)
    if (c.subject.cflags[i] == "-include" && c.subject.cflags[i + 1][0] != '/')
      c.subject.cflags[i + 1] = resolve(base_dir, c.subject.cflags[i + 1]).string();
  read_string(*subject, "compiler", c.subject.compiler);
  c.subject.args = read_strings(*subject, "args");

  if (const toml::table* camp = root["campaign"].as_table()) {
    check_keys(*camp, "campaign",
               {"seeds", "output", "plateau_s", "trace_cap", "timeout_ms", "rng_seed",
                "budget_s", "mode", "clock", "exec_tick_s", "max_execs",
                "max_attempts", "fuzz", "flush_s", "goal"});
    std::string s;
    if (read_string(*camp, "seeds", s)) c.seeds = resolve(base_dir, s);
    if (read_string(*camp, "output", s)) c.output = resolve(base_dir, s);
    read_double(*camp, "plateau_s", c.plateau_s);
    read_int(*camp, "trace_cap", c.trace_cap);
    read_int(*camp, "timeout_ms", c.timeout_ms);
    read_int(*camp, "rng_seed", c.rng_seed);
    read_double(*camp, "budget_s", c.budget_s);
    read_double(*camp, "exec_tick_s", c.exec_tick_s);
    read_int(*camp, "max_execs", c.max_execs);
    read_int(*camp, "max_attempts", c.max_attempts);
    read_bool(*camp, "fuzz", c.fuzz);
    read_double(*camp, "flush_s", c.flush_s);
    read_string(*camp, "goal", c.goal);
    if (read_string(*camp, "mode", s)) {
      if (s == "single") c.mode = CampaignMode::Single;
      else if (s == "threaded") c.mode = CampaignMode::Threaded;
      else throw ConfigError("campaign.mode must be \"single\" or \"threaded\"");
    }
    if (read_string(*camp, "clock", s)) {
      clock_set = true;
      if (s == "logical") c.clock = ClockKind::Logical;
      else if (s == "wall") c.clock = ClockKind::Wall;
      else throw ConfigError("campaign.clock must be \"logical\" or \"wall\"");
    }
  }
  if (c.output.empty()) c.output = resolve(base_dir, "out");
  if (!clock_set)
    c.clock = c.mode == CampaignMode::Single ? ClockKind::Logical : ClockKind::Wall;
  if (c.mode == CampaignMode::Threaded && c.clock == ClockKind::Logical)
    throw ConfigError("the logical clock needs mode = \"single\"");
  if (c.plateau_s < 0 || c.budget_s <= 0 || c.exec_tick_s <= 0)
    throw ConfigError("plateau_s, budget_s and exec_tick_s must be positive");
  if (c.timeout_ms == 0 || c.trace_cap == 0)
    throw ConfigError("timeout_ms and trace_cap must be positive");

  if (const toml::table* sol = root["solver"].as_table()) {
    check_keys(*sol, "solver",
               {"backend", "enabled", "model", "max_tokens", "temperature",
                "query_budget", "test_budget", "timeout_s", "max_retries", "script",
                "trials", "max_prompt_tokens", "endpoint"});
    auto& s = c.solver;
    std::string v;
    if (read_string(*sol, "backend", v)) {
      auto k = parse_backend(v);
      if (!k) throw ConfigError("solver.backend must be remote, scripted or bruteforce");
      s.backend = *k;
    }
    read_bool(*sol, "enabled", c.solver_enabled);
    read_string(*sol, "model", s.model);
    read_int(*sol, "max_tokens", s.max_tokens);
    read_double(*sol, "temperature", s.temperature);
    read_int(*sol, "query_budget", s.query_budget);
    read_int(*sol, "test_budget", s.test_budget);
    read_double(*sol, "timeout_s", s.timeout_s);
    read_int(*sol, "max_retries", s.max_retries);
    if (read_string(*sol, "script", v)) s.script = resolve(base_dir, v);
    read_int(*sol, "trials", s.trials);
    read_int(*sol, "max_prompt_tokens", s.max_prompt_tokens);
    read_string(*sol, "endpoint", s.endpoint);
  }
  if (const char* e = std::getenv("SOLVER_ENDPOINT"); e && *e) c.solver.endpoint = e;
  if (const char* k = std::getenv("SOLVER_API_KEY"); k && *k) c.solver.api_key = k;
  return c;
}

CampaignConfig load_config(const fs::path& path) {
  std::string text;
  try {
    text = read_text_file(path);
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  fs::path base = fs::absolute(path).parent_path();
  CampaignConfig c;
  try {
    c = parse_config(text, base);
  } catch (const ConfigError& e) {
    throw ConfigError(fmt::format("{}: {}", path.string(), e.what()));
  }
  c.config_path = fs::absolute(path);
  return c;
}

void validate_config(const CampaignConfig& c) {
  for (const auto& s : c.subject.sources)
    if (!fs::is_regular_file(s)) throw ConfigError("source not found: " + s.string());
  if (!c.seeds.empty() && !fs::exists(c.seeds))
    throw ConfigError("seeds not found: " + c.seeds.string());
  if (c.solver_enabled && c.solver.backend == BackendKind::Scripted && c.solver.script.empty())
    throw ConfigError("the scripted backend needs solver.script");
  if (c.solver_enabled && c.solver.backend == BackendKind::Scripted &&
      !fs::is_regular_file(c.solver.script))
    throw ConfigError("solver.script not found: " + c.solver.script.string());
  if (c.solver_enabled && c.solver.backend == BackendKind::Remote &&
      c.solver.endpoint.empty())
    throw ConfigError("remote solver needs SOLVER_ENDPOINT or solver.endpoint");
}

std::string config_json(const CampaignConfig& c) {
  nlohmann::json j;
  j["config"] = c.config_path.string();
  std::vector<std::string> srcs;
  for (const auto& s : c.subject.sources) srcs.push_back(s.string());
  j["subject"] = {{"sources", srcs},
                  {"cflags", c.subject.cflags},
                  {"compiler", c.subject.compiler},
                  {"args", c.subject.args}};
  j["campaign"] = {{"seeds", c.seeds.string()},
                   {"output", c.output.string()},
                   {"plateau_s", c.plateau_s},
                   {"trace_cap", c.trace_cap},
                   {"timeout_ms", c.timeout_ms},
                   {"rng_seed", c.rng_seed},
                   {"budget_s", c.budget_s},
                   {"mode", std::string(to_string(c.mode))},
                   {"clock", c.clock == ClockKind::Logical ? "logical" : "wall"},
                   {"exec_tick_s", c.exec_tick_s},
                   {"max_execs", c.max_execs},
                   {"max_attempts", c.max_attempts},
                   {"fuzz", c.fuzz},
                   {"goal", c.goal}};
  j["solver"] = {{"enabled", c.solver_enabled},
                 {"backend", std::string(to_string(c.solver.backend))},
                 {"model", c.solver.model},
                 {"max_tokens", c.solver.max_tokens},
                 {"temperature", c.solver.temperature},
                 {"query_budget", c.solver.query_budget},
                 {"test_budget", c.solver.test_budget},
                 {"timeout_s", c.solver.timeout_s},
                 {"max_retries", c.solver.max_retries},
                 {"script", c.solver.script.string()},
                 {"trials", c.solver.trials},
                 {"max_prompt_tokens", c.solver.max_prompt_tokens},
                 {"endpoint", c.solver.endpoint}};
  return j.dump(2);
}

}  // namespace slicefuzz
