#include "slicefuzz/tracer.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <spawn.h>
#include <sys/syscall.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <thread>

#include <fmt/format.h>
#include <json.hpp>
#include <spdlog/spdlog.h>

extern char** environ;

namespace slicefuzz {

namespace fs = std::filesystem;

#ifdef SLICEFUZZ_TEXT_TRACE
constexpr bool kTextTrace = true;
#else
constexpr bool kTextTrace = false;
#endif
constexpr int kCapExit = 125;  // SF_CAP_EXIT in the runtime

std::string_view to_string(ExitStatus s) {
  switch (s) {
    case ExitStatus::Normal: return "normal";
    case ExitStatus::Crash: return "crash";
    case ExitStatus::Timeout: return "timeout";
    case ExitStatus::TraceCap: return "trace-cap";
  }
  return "?";
}

// ---- guard table ----

GuardTable GuardTable::from_index(const AstIndex& ix) {
  GuardTable t;
  for (const auto& f : ix.files()) t.files_.push_back(f->name());
  for (const auto& [id, c] : ix.conditionals()) {
    const StmtNode& n = ix.node(c.node);
    TraceRecord r{n.file_id, n.line, n.ordinal};
    t.by_record_[r] = id;
    t.by_cond_[id] = r;
  }
  return t;
}

void GuardTable::save(const fs::path& sidecar) const {
  nlohmann::json j;
  j["files"] = files_;
  nlohmann::json guards = nlohmann::json::object();
  for (const auto& [id, r] : by_cond_)
    guards[id.str()] = {r.file_id, r.line, r.ordinal};
  j["guards"] = std::move(guards);
  write_file_atomic(sidecar, j.dump(1));
}

GuardTable GuardTable::load(const fs::path& sidecar) {
  GuardTable t;
  auto j = nlohmann::json::parse(read_text_file(sidecar));
  t.files_ = j.at("files").get<std::vector<std::string>>();
  for (const auto& [key, v] : j.at("guards").items()) {
    auto id = CondId::parse(key);
    if (!id) throw Error("bad guard id in " + sidecar.string() + ": " + key);
    TraceRecord r{v.at(0).get<FileId>(), v.at(1).get<std::uint32_t>(),
                  v.at(2).get<std::uint16_t>()};
    t.by_record_[r] = *id;
    t.by_cond_[*id] = r;
  }
  return t;
}

std::optional<CondId> GuardTable::cond_of(const TraceRecord& r) const {
  auto it = by_record_.find(r);
  if (it == by_record_.end()) return std::nullopt;
  return it->second;
}

std::optional<TraceRecord> GuardTable::record_of(const CondId& c) const {
  auto it = by_cond_.find(c);
  if (it == by_cond_.end()) return std::nullopt;
  return it->second;
}

std::optional<CondId> GuardTable::parse_cond(std::string_view text) const {
  if (auto id = CondId::parse(text); id && by_cond_.count(*id)) return id;
  auto colon = text.rfind(':');
  if (colon == std::string_view::npos) return std::nullopt;
  std::string name(text.substr(0, colon));
  std::uint32_t line = 0;
  auto num = text.substr(colon + 1);
  for (char ch : num) {
    if (ch < '0' || ch > '9') return std::nullopt;
    line = line * 10 + static_cast<std::uint32_t>(ch - '0');
  }
  for (std::size_t f = 0; f < files_.size(); ++f) {
    if (files_[f] != name) continue;
    auto it = by_record_.lower_bound(TraceRecord{static_cast<FileId>(f), line, 0});
    if (it != by_record_.end() && it->first.file_id == f &&
        it->first.line == line)
      return it->second;
  }
  return std::nullopt;
}

// ---- instrumentation ----

namespace {

struct Insertion {
  std::uint32_t offset;
  bool close;
  std::uint32_t span_start;
  std::uint32_t span_end;
  std::string text;
};

void wrap(std::vector<Insertion>& out, std::uint32_t a, std::uint32_t b,
          std::string open, std::string close) {
  out.push_back({a, false, a, b, std::move(open)});
  out.push_back({b, true, a, b, std::move(close)});
}

std::string trace_call(const StmtNode& n) {
  return fmt::format("__sf_t({}u,{}u,{}u)", n.file_id, n.line, n.ordinal);
}

std::string escape_c_string(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out;
}

}  // namespace

std::string instrument_source(const AstIndex& ix, FileId file) {
  const SourceFile& src = ix.file(file);
  std::vector<Insertion> ins;
  for (const StmtNode& n : ix.nodes()) {
    if (n.file_id != file) continue;
    std::string t = trace_call(n);
    switch (n.kind) {
      case NodeKind::Expression:
      case NodeKind::Return:
      case NodeKind::Break:
      case NodeKind::Continue:
      case NodeKind::Goto:
        wrap(ins, n.range.start_byte, n.range.end_byte, "{ " + t + "; ", " }");
        break;
      case NodeKind::Declaration:
        ins.push_back({n.range.start_byte, false, n.range.start_byte,
                       n.range.start_byte, t + "; "});
        break;
      case NodeKind::ForInit:
        if (!n.outer_range.empty())
          wrap(ins, n.outer_range.start_byte, n.outer_range.end_byte,
               "{ " + t + "; ", " }");
        else
          wrap(ins, n.range.start_byte, n.range.end_byte, "(" + t + ",(", "))");
        break;
      case NodeKind::ForStep:
        wrap(ins, n.range.start_byte, n.range.end_byte, "(" + t + ",(", "))");
        break;
      case NodeKind::Guard: {
        const Conditional& c = *ix.conditional(*n.cond);
        std::uint32_t a = c.expr_range.start_byte;
        std::uint32_t b = c.expr_range.end_byte;
        if (c.kind != CondKind::For) {
          // keep the original parentheses, instrument what is inside
          a = c.guard_range.start_byte + 1;
          b = c.guard_range.end_byte - 1;
        }
        if (c.kind == CondKind::Switch) {
          std::string chain;
          std::uint32_t fallback = 0;
          for (const Arm& arm : c.arms) {
            if (arm.kind == ArmKind::Default) {
              fallback = arm.arm_id;
              continue;
            }
            chain += fmt::format("__sf_v == (long long)({}) ? {} : ",
                                 *arm.guard_value, arm.arm_id);
          }
          wrap(ins, a, b,
               "({ long long __sf_v = (long long)(" + t + ",(",
               fmt::format(")); __sf_arm({}u,{}u,{}{}); __sf_v; }})",
                           c.cond_id.file_id, c.cond_id.start_byte, chain,
                           fallback));
        } else {
          wrap(ins, a, b,
               fmt::format("__sf_arm({}u,{}u,({},(", c.cond_id.file_id,
                           c.cond_id.start_byte, t),
               ")) ? 0 : 1) == 0");
        }
        break;
      }
    }
  }
  std::stable_sort(ins.begin(), ins.end(),
                   [](const Insertion& x, const Insertion& y) {
                     if (x.offset != y.offset) return x.offset < y.offset;
                     if (x.close != y.close) return x.close;
                     if (x.close) return x.span_start > y.span_start;
                     return x.span_end > y.span_end;
                   });
  const std::string& text = src.content();
  std::string out = fmt::format(
      "extern void __sf_t(unsigned int, unsigned int, unsigned int);\n"
      "extern int __sf_arm(unsigned int, unsigned int, int);\n"
      "#line 1 \"{}\"\n",
      escape_c_string(fs::absolute(src.path()).string()));
  out.reserve(out.size() + text.size() * 2);
  std::uint32_t pos = 0;
  for (const auto& i : ins) {
    out.append(text, pos, i.offset - pos);
    out += i.text;
    pos = i.offset;
  }
  out.append(text, pos, std::string::npos);
  return out;
}

std::string trace_runtime_source() {
  return R"RT(#include <fcntl.h>
#include <signal.h>
#include <stdio.h>
#include <stdlib.h>
#include <string.h>
#include <unistd.h>

#define SF_BUF 65536
#define SF_CAP_EXIT 125

static int sf_trace_fd = -1;
static int sf_arm_fd = -1;
static unsigned char sf_tbuf[SF_BUF];
static unsigned sf_tlen;
static unsigned char sf_abuf[SF_BUF];
static unsigned sf_alen;
static unsigned long long sf_count;
static unsigned long long sf_arm_count;
static unsigned long long sf_cap = 1000000ULL;
static int sf_ready;

static void sf_write_all(int fd, const unsigned char *p, unsigned n) {
  while (n > 0) {
    ssize_t w = write(fd, p, n);
    if (w <= 0) return;
    p += w;
    n -= (unsigned)w;
  }
}

static void sf_flush(void) {
  if (sf_trace_fd >= 0 && sf_tlen) sf_write_all(sf_trace_fd, sf_tbuf, sf_tlen);
  if (sf_arm_fd >= 0 && sf_alen) sf_write_all(sf_arm_fd, sf_abuf, sf_alen);
  sf_tlen = 0;
  sf_alen = 0;
}

static void sf_on_signal(int sig) {
  sf_flush();
  signal(sig, SIG_DFL);
  raise(sig);
}

static void sf_init(void) {
  const char *p;
  int sigs[] = {SIGSEGV, SIGABRT, SIGFPE, SIGBUS, SIGILL, SIGTERM};
  unsigned i;
  sf_ready = 1;
  p = getenv("TRACE_OUT");
  if (p && *p) sf_trace_fd = open(p, O_WRONLY | O_CREAT | O_TRUNC, 0644);
  p = getenv("ARMS_OUT");
  if (p && *p) sf_arm_fd = open(p, O_WRONLY | O_CREAT | O_TRUNC, 0644);
  p = getenv("TRACE_CAP");
  if (p && *p) sf_cap = strtoull(p, NULL, 10);
  atexit(sf_flush);
  for (i = 0; i < sizeof(sigs) / sizeof(sigs[0]); i++) signal(sigs[i], sf_on_signal);
}

__attribute__((constructor)) static void sf_ctor(void) {
  if (!sf_ready) sf_init();
}

static void sf_put(unsigned char *buf, unsigned *len, unsigned v, int width) {
  int i;
  for (i = 0; i < width; i++) buf[(*len)++] = (unsigned char)(v >> (8 * i));
}

void __sf_t(unsigned int f, unsigned int l, unsigned int o) {
  if (!sf_ready) sf_init();
  if (sf_count >= sf_cap) {
    /* the trace is full: nothing further is observable */
    sf_flush();
    _exit(SF_CAP_EXIT);
  }
  sf_count++;
  if (sf_trace_fd < 0) return;
#ifdef SF_TRACE_TEXT
  if (sf_tlen + 40 > SF_BUF) sf_flush();
  sf_tlen += (unsigned)snprintf((char *)sf_tbuf + sf_tlen, 40, "%u:%u:%u\n", f, l, o);
#else
  if (sf_tlen + 10 > SF_BUF) sf_flush();
  sf_put(sf_tbuf, &sf_tlen, f, 4);
  sf_put(sf_tbuf, &sf_tlen, l, 4);
  sf_put(sf_tbuf, &sf_tlen, o, 2);
#endif
}

int __sf_arm(unsigned int f, unsigned int b, int arm) {
  if (!sf_ready) sf_init();
  if (sf_arm_fd < 0 || sf_arm_count >= sf_cap) return arm;
  sf_arm_count++;
#ifdef SF_TRACE_TEXT
  if (sf_alen + 40 > SF_BUF) sf_flush();
  sf_alen += (unsigned)snprintf((char *)sf_abuf + sf_alen, 40, "%u:%u:%d\n", f, b, arm);
#else
  if (sf_alen + 10 > SF_BUF) sf_flush();
  sf_put(sf_abuf, &sf_alen, f, 4);
  sf_put(sf_abuf, &sf_alen, b, 4);
  sf_put(sf_abuf, &sf_alen, (unsigned)arm, 2);
#endif
  return arm;
}
)RT";
}

namespace {

std::string run_compiler(const std::vector<std::string>& argv, int& status) {
  fs::path log = scratch_dir() / fmt::format("cc-{}.log", ::getpid());
  std::string cmd;
  for (const auto& a : argv) {
    std::string q = "'";
    for (char c : a) {
      if (c == '\'') q += "'\\''";
      else q += c;
    }
    cmd += q + "' ";
  }
  cmd += "> '" + log.string() + "' 2>&1";
  status = std::system(cmd.c_str());
  std::string out;
  if (fs::exists(log)) {
    out = read_text_file(log);
    fs::remove(log);
  }
  return out;
}

std::vector<std::string> compile_args(const BuildOptions& opts) {
  std::vector<std::string> argv{opts.compiler};
  argv.insert(argv.end(), opts.cflags.begin(), opts.cflags.end());
  return argv;
}

}  // namespace

Program instrument(const AstIndex& ix, const BuildOptions& opts) {
  fs::path dir = opts.out_dir / "instrumented";
  fs::create_directories(dir);
  auto argv = compile_args(opts);
  for (const auto& f : ix.files()) {
    fs::path p = dir / fmt::format("{}_{}", f->id(), f->name());
    write_file_atomic(p, instrument_source(ix, f->id()));
    argv.push_back(p.string());
    // headers next to the original sources stay reachable
    argv.push_back("-I" + fs::absolute(f->path()).parent_path().string());
  }
  fs::path rt = dir / "__sf_runtime.c";
  write_file_atomic(rt, trace_runtime_source());
  argv.push_back(rt.string());
  if (kTextTrace) argv.push_back("-DSF_TRACE_TEXT");
  Program prog;
  prog.binary = fs::absolute(opts.out_dir / (opts.output_name + ".trace"));
  argv.push_back("-o");
  argv.push_back(prog.binary.string());
  int status = 0;
  std::string diag = run_compiler(argv, status);
  if (status != 0)
    throw BuildError("compiling instrumented subject failed", diag);
  prog.guards = GuardTable::from_index(ix);
  prog.guards.save(prog.binary.string() + ".guards.json");
  return prog;
}

fs::path build_plain(const AstIndex& ix, const BuildOptions& opts) {
  fs::create_directories(opts.out_dir);
  auto argv = compile_args(opts);
  for (const auto& f : ix.files()) argv.push_back(fs::absolute(f->path()).string());
  fs::path out = fs::absolute(opts.out_dir / (opts.output_name + ".plain"));
  argv.push_back("-o");
  argv.push_back(out.string());
  int status = 0;
  std::string diag = run_compiler(argv, status);
  if (status != 0) throw BuildError("compiling subject failed", diag);
  return out;
}

// ---- running ----

std::vector<TraceRecord> parse_trace_bytes(const Bytes& data, bool text) {
  std::vector<TraceRecord> out;
  if (text) {
    std::string s = bytes_to_string(data);
    std::size_t pos = 0;
    while (pos < s.size()) {
      auto nl = s.find('\n', pos);
      if (nl == std::string::npos) break;  // partial final line
      unsigned f = 0, l = 0, o = 0;
      if (std::sscanf(s.c_str() + pos, "%u:%u:%u", &f, &l, &o) == 3)
        out.push_back({f, l, static_cast<std::uint16_t>(o)});
      pos = nl + 1;
    }
    return out;
  }
  auto u32 = [&](std::size_t i) {
    return static_cast<std::uint32_t>(data[i]) |
           static_cast<std::uint32_t>(data[i + 1]) << 8 |
           static_cast<std::uint32_t>(data[i + 2]) << 16 |
           static_cast<std::uint32_t>(data[i + 3]) << 24;
  };
  out.reserve(data.size() / 10);
  for (std::size_t i = 0; i + 10 <= data.size(); i += 10) {
    out.push_back({u32(i), u32(i + 4),
                   static_cast<std::uint16_t>(data[i + 8] | data[i + 9] << 8)});
  }
  return out;
}

std::vector<ArmEvent> parse_arm_bytes(const Bytes& data, bool text) {
  std::vector<ArmEvent> out;
  for (const auto& r : parse_trace_bytes(data, text))
    out.push_back({CondId{r.file_id, r.line}, r.ordinal});
  return out;
}

namespace {

std::atomic<std::uint64_t> g_run_counter{0};

int pidfd_open(pid_t pid) {
#ifdef SYS_pidfd_open
  return static_cast<int>(::syscall(SYS_pidfd_open, pid, 0));
#else
  (void)pid;
  errno = ENOSYS;
  return -1;
#endif
}

// Waits up to `timeout`; returns true when the child exited in time.
bool wait_for_exit(pid_t pid, std::chrono::milliseconds timeout, int& status) {
  int fd = pidfd_open(pid);
  if (fd >= 0) {
    pollfd p{fd, POLLIN, 0};
    int r;
    do {
      r = ::poll(&p, 1, static_cast<int>(timeout.count()));
    } while (r < 0 && errno == EINTR);
    ::close(fd);
    if (r == 0) return false;
    ::waitpid(pid, &status, 0);
    return true;
  }
  auto deadline = std::chrono::steady_clock::now() + timeout;
  for (;;) {
    pid_t w = ::waitpid(pid, &status, WNOHANG);
    if (w == pid) return true;
    if (std::chrono::steady_clock::now() >= deadline) return false;
    std::this_thread::sleep_for(std::chrono::microseconds(200));
  }
}

}  // namespace

ExecutionTrace run_traced(const Program& program, const Bytes& input,
                          const RunOptions& opts) {
  fs::path scratch = scratch_dir();
  std::string stem = fmt::format(
      "run-{}-{}", std::hash<std::thread::id>{}(std::this_thread::get_id()) % 100000,
      g_run_counter.fetch_add(1));
  fs::path in_path = scratch / (stem + ".in");
  fs::path trace_path = scratch / (stem + ".trace");
  fs::path arms_path = scratch / (stem + ".arms");
  {
    std::ofstream f(in_path, std::ios::binary | std::ios::trunc);
    f.write(reinterpret_cast<const char*>(input.data()),
            static_cast<std::streamsize>(input.size()));
  }

  std::vector<std::string> args{program.binary.string()};
  bool file_arg = false;
  for (const auto& a : program.args) {
    if (a == "@@") {
      args.push_back(in_path.string());
      file_arg = true;
    } else {
      args.push_back(a);
    }
  }
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  argv.push_back(nullptr);

  std::vector<std::string> env_store;
  for (char** e = environ; *e; ++e) {
    std::string_view v(*e);
    if (v.starts_with("TRACE_OUT=") || v.starts_with("ARMS_OUT=") ||
        v.starts_with("TRACE_CAP="))
      continue;
    env_store.emplace_back(v);
  }
  if (opts.record_statements)
    env_store.push_back("TRACE_OUT=" + trace_path.string());
  env_store.push_back("ARMS_OUT=" + arms_path.string());
  env_store.push_back(fmt::format("TRACE_CAP={}", opts.trace_cap));
  std::vector<char*> envp;
  for (auto& e : env_store) envp.push_back(e.data());
  envp.push_back(nullptr);

  posix_spawn_file_actions_t fa;
  posix_spawn_file_actions_init(&fa);
  posix_spawn_file_actions_addopen(&fa, 0,
                                   file_arg ? "/dev/null" : in_path.c_str(),
                                   O_RDONLY, 0);
  posix_spawn_file_actions_addopen(&fa, 1, "/dev/null", O_WRONLY, 0);
  posix_spawn_file_actions_addopen(&fa, 2, "/dev/null", O_WRONLY, 0);
  posix_spawnattr_t attr;
  posix_spawnattr_init(&attr);
  sigset_t none;
  sigemptyset(&none);
  posix_spawnattr_setsigmask(&attr, &none);
  sigset_t defaults;
  sigemptyset(&defaults);
  sigaddset(&defaults, SIGPIPE);
  sigaddset(&defaults, SIGTERM);
  posix_spawnattr_setsigdefault(&attr, &defaults);
  posix_spawnattr_setflags(&attr, POSIX_SPAWN_SETSIGMASK | POSIX_SPAWN_SETSIGDEF);

  pid_t pid = 0;
  int rc = posix_spawn(&pid, argv[0], &fa, &attr, argv.data(), envp.data());
  posix_spawn_file_actions_destroy(&fa);
  posix_spawnattr_destroy(&attr);
  if (rc != 0) {
    fs::remove(in_path);
    throw Error(fmt::format("cannot execute {}: {}", program.binary.string(),
                            std::strerror(rc)));
  }

  ExecutionTrace trace;
  int status = 0;
  bool timed_out = false;
  if (!wait_for_exit(pid, opts.timeout, status)) {
    timed_out = true;
    // nothing worth flushing: records already written stay in the file
    ::kill(pid, SIGKILL);
    ::waitpid(pid, &status, 0);
  }

  auto read_and_remove = [](const fs::path& p) {
    auto b = read_bytes(p);
    std::error_code ec;
    fs::remove(p, ec);
    return b.value_or(Bytes{});
  };
  trace.records = parse_trace_bytes(read_and_remove(trace_path), kTextTrace);
  trace.arm_events = parse_arm_bytes(read_and_remove(arms_path), kTextTrace);
  std::error_code ec;
  fs::remove(in_path, ec);

  if (timed_out) {
    trace.exit_status = ExitStatus::Timeout;
  } else if (WIFSIGNALED(status)) {
    trace.exit_status = ExitStatus::Crash;
    trace.signal = WTERMSIG(status);
  } else if (WIFEXITED(status) && WEXITSTATUS(status) == kCapExit &&
             (trace.records.size() >= opts.trace_cap || !opts.record_statements)) {
    trace.exit_status = ExitStatus::TraceCap;
  }
  if (WIFEXITED(status)) trace.exit_code = WEXITSTATUS(status);

  if (opts.stop_at) truncate_trace(trace, program.guards, *opts.stop_at);
  return trace;
}

void truncate_trace(ExecutionTrace& trace, const GuardTable& guards,
                    const CondId& cond) {
  auto stop = guards.record_of(cond);
  if (!stop) return;
  auto it = std::find(trace.records.begin(), trace.records.end(), *stop);
  if (it == trace.records.end()) return;
  trace.records.erase(it + 1, trace.records.end());
  trace.truncated_at = cond;
  // Evaluations that finished before the final record: one per guard
  // record of each conditional, minus the final (unevaluated) one.
  std::map<CondId, std::size_t> allowed;
  for (const auto& r : trace.records)
    if (auto c = guards.cond_of(r)) ++allowed[*c];
  --allowed[cond];
  std::map<CondId, std::size_t> seen;
  std::vector<ArmEvent> kept;
  for (const auto& e : trace.arm_events)
    if (seen[e.cond]++ < allowed[e.cond]) kept.push_back(e);
  trace.arm_events = std::move(kept);
}

// ---- frames ----

bool FrameMap::is_descendant(std::int32_t frame, std::int32_t ancestor) const {
  while (frame >= 0) {
    if (frame == ancestor) return true;
    frame = frames[frame].parent;
  }
  return false;
}

FrameMap reconstruct_frames(const AstIndex& ix,
                            const std::vector<TraceRecord>& records) {
  FrameMap m;
  m.node_of.resize(records.size(), -1);
  m.frame_of.resize(records.size(), -1);
  std::vector<std::int32_t> stack;
  std::vector<bool> returned;
  std::int32_t prev_node = -1;
  auto push = [&](std::int32_t fn, std::uint32_t pos) {
    Frame f;
    f.function = fn;
    f.parent = stack.empty() ? -1 : stack.back();
    f.call_pos = stack.empty()
                     ? -1
                     : static_cast<std::int32_t>(m.frames[stack.back()].last_pos);
    f.first_pos = f.last_pos = pos;
    m.frames.push_back(f);
    returned.push_back(false);
    stack.push_back(static_cast<std::int32_t>(m.frames.size() - 1));
  };
  for (std::uint32_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    auto nid = ix.node_at(r.file_id, r.line, r.ordinal);
    std::int32_t node = nid ? static_cast<std::int32_t>(*nid) : -1;
    m.node_of[i] = node;
    std::int32_t fn = node >= 0 ? ix.node(node).function : -1;
    if (fn < 0 && !stack.empty()) fn = m.frames[stack.back()].function;
    if (stack.empty()) {
      push(fn, i);
    } else if (m.frames[stack.back()].function == fn) {
      bool recursive_entry = false;
      if (node >= 0 && ix.functions()[fn].entry_node == node && prev_node >= 0) {
        const auto& name = ix.functions()[fn].name;
        for (const auto& c : ix.node(prev_node).calls)
          if (c.callee == name) recursive_entry = true;
      }
      if (recursive_entry) {
        push(fn, i);
      } else if (returned[stack.back()] && stack.size() > 1 &&
                 m.frames[stack[stack.size() - 2]].function == fn) {
        stack.pop_back();
      }
    } else {
      auto found = std::find_if(stack.rbegin(), stack.rend(), [&](auto f) {
        return m.frames[f].function == fn;
      });
      if (found != stack.rend()) {
        while (m.frames[stack.back()].function != fn) stack.pop_back();
      } else {
        push(fn, i);
      }
    }
    std::int32_t top = stack.back();
    m.frame_of[i] = top;
    m.frames[top].last_pos = i;
    if (node >= 0 && ix.node(node).kind == NodeKind::Return) returned[top] = true;
    prev_node = node;
  }
  for (auto f : stack) m.frames[f].active_at_end = true;
  return m;
}

}  // namespace slicefuzz
