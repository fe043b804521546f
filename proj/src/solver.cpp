#include <httplib.h>

#include "slicefuzz/solver.hpp"

#include <cctype>
#include <chrono>
#include <set>

#include <fmt/format.h>
#include <json.hpp>
#include <spdlog/spdlog.h>

#include "slicefuzz/lexer.hpp"

namespace slicefuzz {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

std::string_view to_string(BackendKind k) {
  switch (k) {
    case BackendKind::Remote: return "remote";
    case BackendKind::Scripted: return "scripted";
    case BackendKind::Bruteforce: return "bruteforce";
  }
  return "?";
}

std::optional<BackendKind> parse_backend(std::string_view s) {
  if (s == "remote") return BackendKind::Remote;
  if (s == "scripted") return BackendKind::Scripted;
  if (s == "bruteforce") return BackendKind::Bruteforce;
  return std::nullopt;
}

void record_exchange(const fs::path& dir, const std::string& name,
                     std::string_view content) {
  if (dir.empty()) return;
  fs::create_directories(dir);
  write_file_atomic(dir / name, content);
}

namespace {

double seconds_since(Clock::time_point t) {
  return std::chrono::duration<double>(Clock::now() - t).count();
}

void record_prompt(const SolveRequest& req) {
  record_exchange(req.record_dir, "prompt.txt",
                  "[system]\n" + req.prompt.system_text + "\n[user]\n" +
                      req.prompt.user_text);
}

}  // namespace

// ---- remote ----

RemoteSolver::RemoteSolver(SolverConfig cfg)
    : Solver(cfg.query_budget), cfg_(std::move(cfg)) {}

std::string RemoteSolver::request_body(const Prompt& p) const {
  nlohmann::json j = {
      {"model", cfg_.model},
      {"messages",
       {{{"role", "system"}, {"content", p.system_text}},
        {{"role", "user"}, {"content", p.user_text}}}},
      {"max_tokens", cfg_.max_tokens},
      {"temperature", cfg_.temperature}};
  return j.dump();
}

SolverResponse RemoteSolver::solve(const SolveRequest& req) {
  SolverResponse out;
  if (budget_ <= 0) {
    out.hard_stop = true;
    return out;
  }
  auto scheme_end = cfg_.endpoint.find("://");
  if (cfg_.endpoint.empty() || scheme_end == std::string::npos) {
    out.error = "SOLVER_ENDPOINT is not a URL";
    return out;
  }
  auto path_start = cfg_.endpoint.find('/', scheme_end + 3);
  std::string origin = cfg_.endpoint.substr(0, path_start);
  std::string path = path_start == std::string::npos ? "/" : cfg_.endpoint.substr(path_start);

  httplib::Client cli(origin);
  auto secs = static_cast<time_t>(cfg_.timeout_s);
  auto usecs = static_cast<time_t>((cfg_.timeout_s - static_cast<double>(secs)) * 1e6);
  cli.set_connection_timeout(secs, usecs);
  cli.set_read_timeout(secs, usecs);
  cli.set_write_timeout(secs, usecs);
  httplib::Headers headers;
  if (!cfg_.api_key.empty())
    headers.emplace("Authorization", "Bearer " + cfg_.api_key);

  std::string body = request_body(req.prompt);
  record_prompt(req);
  auto start = Clock::now();
  for (int attempt = 0; attempt <= cfg_.max_retries && budget_ > 0; ++attempt) {
    --budget_;
    ++issued_;
    ++out.requests;
    record_exchange(req.record_dir, fmt::format("request-{}.json", attempt), body);
    auto res = cli.Post(path, headers, body, "application/json");
    if (!res) {
      out.error = fmt::format("request failed: {}", httplib::to_string(res.error()));
    } else if (res->status != 200) {
      out.error = fmt::format("HTTP {}", res->status);
      record_exchange(req.record_dir, fmt::format("response-{}.json", attempt), res->body);
    } else {
      record_exchange(req.record_dir, fmt::format("response-{}.json", attempt), res->body);
      try {
        auto j = nlohmann::json::parse(res->body);
        out.raw_text = j.at("choices").at(0).at("message").at("content").get<std::string>();
        out.error.clear();
        break;
      } catch (const std::exception& e) {
        out.error = fmt::format("malformed reply: {}", e.what());
      }
    }
    spdlog::warn("solver attempt {} failed: {}", attempt + 1, out.error);
  }
  out.latency_s = seconds_since(start);
  if (out.error.empty()) {
    record_exchange(req.record_dir, "response.txt", out.raw_text);
    out.extracted_input = decode_response(out.raw_text);
  }
  return out;
}

// ---- scripted ----

ScriptedSolver::ScriptedSolver(std::vector<ScriptEntry> entries, int test_budget)
    : Solver(test_budget) {
  for (auto& e : entries) queues_[e.roadblock_key].push_back(std::move(e.response_text));
}

std::vector<ScriptEntry> ScriptedSolver::load(const fs::path& p) {
  auto text = read_text_file(p);
  std::vector<ScriptEntry> out;
  try {
    auto j = nlohmann::json::parse(text);
    for (const auto& e : j)
      out.push_back({e.at("roadblock_key").get<std::string>(),
                     e.at("response_text").get<std::string>()});
  } catch (const nlohmann::json::exception& e) {
    throw Error(fmt::format("{}: bad replay fixture: {}", p.string(), e.what()));
  }
  return out;
}

SolverResponse ScriptedSolver::solve(const SolveRequest& req) {
  SolverResponse out;
  if (budget_ <= 0) {
    out.hard_stop = true;
    return out;
  }
  --budget_;
  ++issued_;
  auto start = Clock::now();
  record_prompt(req);
  std::deque<std::string>* q = nullptr;
  if (auto it = queues_.find(req.prompt.roadblock_key); it != queues_.end() && !it->second.empty())
    q = &it->second;
  else if (auto st = queues_.find("*"); st != queues_.end() && !st->second.empty())
    q = &st->second;
  if (!q) {
    out.error = "no scripted reply left";
    return out;
  }
  out.raw_text = std::move(q->front());
  q->pop_front();
  record_exchange(req.record_dir, "response.txt", out.raw_text);
  out.extracted_input = decode_response(out.raw_text);
  out.latency_s = seconds_since(start);
  return out;
}

// ---- bruteforce ----

namespace {

std::optional<Bytes> unescape_c_literal(std::string_view body) {
  Bytes out;
  for (std::size_t i = 0; i < body.size(); ++i) {
    char c = body[i];
    if (c != '\\') {
      out.push_back(static_cast<std::uint8_t>(c));
      continue;
    }
    if (++i >= body.size()) return std::nullopt;
    char e = body[i];
    switch (e) {
      case 'n': out.push_back('\n'); break;
      case 't': out.push_back('\t'); break;
      case 'r': out.push_back('\r'); break;
      case 'a': out.push_back('\a'); break;
      case 'b': out.push_back('\b'); break;
      case 'f': out.push_back('\f'); break;
      case 'v': out.push_back('\v'); break;
      case 'x': {
        unsigned v = 0;
        std::size_t k = i + 1;
        while (k < body.size() && std::isxdigit(static_cast<unsigned char>(body[k]))) {
          char h = static_cast<char>(std::tolower(static_cast<unsigned char>(body[k++])));
          v = v * 16 + static_cast<unsigned>(h <= '9' ? h - '0' : h - 'a' + 10);
        }
        if (k == i + 1) return std::nullopt;
        out.push_back(static_cast<std::uint8_t>(v));
        i = k - 1;
        break;
      }
      default:
        if (e >= '0' && e <= '7') {
          unsigned v = 0;
          std::size_t k = i;
          while (k < body.size() && k < i + 3 && body[k] >= '0' && body[k] <= '7')
            v = v * 8 + static_cast<unsigned>(body[k++] - '0');
          out.push_back(static_cast<std::uint8_t>(v));
          i = k - 1;
        } else {
          out.push_back(static_cast<std::uint8_t>(e));  // \\ \' \" \?
        }
    }
  }
  return out;
}

std::optional<std::uint64_t> parse_int_literal(std::string_view t) {
  std::string s(t);
  while (!s.empty() && (s.back() == 'u' || s.back() == 'U' || s.back() == 'l' ||
                        s.back() == 'L'))
    s.pop_back();
  if (s.empty() || s.find_first_of(".pP") != std::string::npos) return std::nullopt;
  bool hex = s.size() > 1 && (s[1] == 'x' || s[1] == 'X');
  if (!hex && s.find_first_of("eE") != std::string::npos) return std::nullopt;
  try {
    std::size_t used = 0;
    auto v = std::stoull(s, &used, 0);
    if (used != s.size()) return std::nullopt;
    return v;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

void add_encodings(std::vector<Bytes>& out, std::uint64_t v) {
  out.push_back(string_to_bytes(std::to_string(v)));
  out.push_back(string_to_bytes(fmt::format("{:x}", v)));
  out.push_back(string_to_bytes(fmt::format("{:X}", v)));
  for (int w : {1, 2, 4, 8}) {
    if (w < 8 && v >> (8 * w)) continue;
    Bytes le, be;
    for (int i = 0; i < w; ++i) le.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    be.assign(le.rbegin(), le.rend());
    out.push_back(le);
    out.push_back(be);
  }
}

}  // namespace

std::vector<Bytes> BruteforceSolver::candidates(std::string_view slice) {
  auto lx = lex_c(slice);
  // literals of the assertion come first
  std::vector<const Token*> ordered;
  for (std::size_t i = 0; i < lx.tokens.size(); ++i) {
    if (!(lx.tokens[i].is_ident() && lx.tokens[i].text == "assert")) continue;
    int depth = 0;
    for (std::size_t k = i + 1; k < lx.tokens.size(); ++k) {
      const Token& t = lx.tokens[k];
      if (t.is("(")) ++depth;
      if (t.is(")") && --depth == 0) break;
      ordered.push_back(&t);
    }
  }
  for (const auto& t : lx.tokens) ordered.push_back(&t);

  std::vector<Bytes> strings;
  std::vector<std::uint64_t> numbers;
  std::set<std::uint64_t> seen_numbers;
  for (const Token* t : ordered) {
    if (t->kind == TokenKind::String && t->text.size() >= 2) {
      std::string_view body = t->text.substr(t->text.find('"') + 1);
      body.remove_suffix(1);
      if (auto b = unescape_c_literal(body); b && !b->empty()) strings.push_back(*b);
    } else if (t->kind == TokenKind::Char && t->text.size() >= 3) {
      std::string_view body = t->text.substr(t->text.find('\'') + 1);
      body.remove_suffix(1);
      if (auto b = unescape_c_literal(body); b && b->size() == 1)
        if (seen_numbers.insert((*b)[0]).second) numbers.push_back((*b)[0]);
    } else if (t->kind == TokenKind::Number) {
      if (auto v = parse_int_literal(t->text); v && seen_numbers.insert(*v).second)
        numbers.push_back(*v);
    }
  }

  std::vector<Bytes> out = strings;
  for (auto v : numbers) add_encodings(out, v);
  std::size_t n = std::min<std::size_t>(numbers.size(), 16);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      std::uint64_t a = numbers[i], b = numbers[j];
      std::vector<std::uint64_t> folds{a + b, a ^ b, a * b};
      if (a > b) folds.push_back(a - b);
      if (b > a) folds.push_back(b - a);
      if (b && a % b == 0) folds.push_back(a / b);
      if (a && b % a == 0) folds.push_back(b / a);
      for (auto f : folds) add_encodings(out, f);
    }
  }
  std::set<Bytes> dedup;
  std::vector<Bytes> uniq;
  for (auto& c : out)
    if (!c.empty() && dedup.insert(c).second) uniq.push_back(std::move(c));
  return uniq;
}

BruteforceSolver::BruteforceSolver(const Program& program, RunOptions run,
                                   int trials, int test_budget)
    : Solver(test_budget), program_(program), run_(run), trials_(trials) {
  run_.stop_at.reset();
}

SolverResponse BruteforceSolver::solve(const SolveRequest& req) {
  SolverResponse out;
  if (budget_ <= 0) {
    out.hard_stop = true;
    return out;
  }
  --budget_;
  ++issued_;
  auto start = Clock::now();
  record_prompt(req);

  const Bytes& w = req.witness;
  std::set<Bytes> tried;
  int runs = 0;
  auto hits = [&](const Bytes& m) {
    if (runs >= trials_ || !tried.insert(m).second) return false;
    ++runs;
    ++execs_;
    auto t = run_traced(program_, m, run_);
    for (const auto& e : t.arm_events)
      if (e.cond == req.cond && e.arm == req.target_arm) return true;
    return false;
  };

  std::optional<Bytes> found;
  auto cands = candidates(req.flattened_slice);
  for (const auto& c : cands) {
    // replace w[pos, pos+len) by c: overwrite first, then insert, then
    // windows of other widths so fields can shrink or grow
    std::vector<std::size_t> lens{c.size(), 0};
    for (std::size_t len = 1; len <= c.size() + 8; ++len)
      if (len != c.size()) lens.push_back(len);
    for (std::size_t len : lens) {
      for (std::size_t pos = 0; pos <= w.size() && !found && runs < trials_; ++pos) {
        Bytes m(w.begin(), w.begin() + static_cast<std::ptrdiff_t>(pos));
        m.insert(m.end(), c.begin(), c.end());
        if (pos + len < w.size())
          m.insert(m.end(), w.begin() + static_cast<std::ptrdiff_t>(pos + len), w.end());
        if (hits(m)) found = m;
      }
      if (found || runs >= trials_) break;
    }
    if (found || runs >= trials_) break;
  }
  for (std::size_t pos = 0; pos < w.size() && !found && runs < trials_; ++pos) {
    for (int b = 0; b < 256 && !found && runs < trials_; ++b) {
      if (w[pos] == b) continue;
      Bytes m = w;
      m[pos] = static_cast<std::uint8_t>(b);
      if (hits(m)) found = m;
    }
  }

  if (found) {
    out.raw_text = fmt::format("```input\n{}\n```\n", encode_input(*found));
    out.extracted_input = found;
  } else {
    out.raw_text = fmt::format("no input found after {} executions\n", runs);
  }
  record_exchange(req.record_dir, "response.txt", out.raw_text);
  out.latency_s = seconds_since(start);
  return out;
}

std::unique_ptr<Solver> make_solver(const SolverConfig& cfg, const Program* program,
                                    const RunOptions& run) {
  switch (cfg.backend) {
    case BackendKind::Remote:
      return std::make_unique<RemoteSolver>(cfg);
    case BackendKind::Scripted:
      return std::make_unique<ScriptedSolver>(ScriptedSolver::load(cfg.script),
                                              cfg.test_budget);
    case BackendKind::Bruteforce:
      if (!program) throw Error("bruteforce solver needs the instrumented subject");
      return std::make_unique<BruteforceSolver>(*program, run, cfg.trials,
                                                cfg.test_budget);
  }
  throw Error("unknown solver backend");
}

}  // namespace slicefuzz
