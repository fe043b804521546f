#include "slicefuzz/fuzzer.hpp"

#include <algorithm>
#include <fstream>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

namespace slicefuzz {

namespace fs = std::filesystem;

Fuzzer::Fuzzer(const Program& program, RunOptions run, Corpus& corpus,
               FuzzerConfig cfg, CampaignClock& clock)
    : program_(program),
      run_(run),
      corpus_(corpus),
      cfg_(cfg),
      clock_(clock),
      rng_(cfg.rng_seed) {
  run_.record_statements = false;
  run_.stop_at.reset();
}

Fuzzer::Outcome Fuzzer::execute(const Bytes& input) {
  auto t = run_traced(program_, input, run_);
  ++execs_;
  clock_.on_exec();
  Outcome o;
  o.status = t.exit_status;
  for (const auto& e : t.arm_events) o.pairs.emplace(e.cond, e.arm);
  return o;
}

std::set<ArmPair> Fuzzer::novel(const std::set<ArmPair>& pairs) const {
  std::set<ArmPair> out;
  std::set_difference(pairs.begin(), pairs.end(), covered_.begin(), covered_.end(),
                      std::inserter(out, out.end()));
  return out;
}

SeedEntry Fuzzer::keep(const Bytes& data, const std::string& suffix,
                       SeedOrigin origin, std::set<ArmPair> pairs) {
  SeedEntry e;
  e.id = corpus_.next_id();
  e.path = corpus_.add(data, suffix);
  e.origin = origin;
  e.discovery_time = clock_.now();
  covered_.insert(pairs.begin(), pairs.end());
  e.fingerprint = std::move(pairs);
  seeds_.push_back(e);
  data_.push_back(data);
  return e;
}

void Fuzzer::load_initial(const std::vector<fs::path>& seeds) {
  std::vector<fs::path> sorted = seeds;
  std::sort(sorted.begin(), sorted.end());
  for (const auto& p : sorted) {
    auto data = read_bytes(p);
    if (!data) throw Error("cannot read seed " + p.string());
    auto o = execute(*data);
    keep(*data, "orig:" + p.filename().string(), SeedOrigin::Initial, std::move(o.pairs));
  }
  if (seeds_.empty()) {
    // an empty corpus still needs something to mutate
    auto o = execute({});
    keep({}, "orig:empty", SeedOrigin::Initial, std::move(o.pairs));
  }
  last_find_ = clock_.now();
  write_stats();
}

void Fuzzer::resume() {
  std::vector<std::pair<std::uint32_t, fs::path>> files;
  std::error_code ec;
  for (const auto& e : fs::directory_iterator(corpus_.queue_dir(), ec))
    if (auto id = parse_seed_id(e.path().filename().string()))
      files.emplace_back(*id, e.path());
  std::sort(files.begin(), files.end());
  for (const auto& [id, p] : files) {
    auto data = read_bytes(p);
    if (!data) continue;
    auto o = execute(*data);
    SeedEntry s;
    s.id = id;
    s.path = p;
    std::string n = p.filename().string();
    s.origin = n.find(",orig:") != std::string::npos     ? SeedOrigin::Initial
               : n.find(",sync:llm") != std::string::npos ? SeedOrigin::Injected
                                                          : SeedOrigin::Mutation;
    covered_.insert(o.pairs.begin(), o.pairs.end());
    s.fingerprint = std::move(o.pairs);
    seeds_.push_back(s);
    data_.push_back(*data);
  }
  last_find_ = clock_.now();
}

std::size_t Fuzzer::pick_seed() {
  std::vector<std::size_t> recent;
  for (std::size_t i = seeds_.size(); i-- > 0 && recent.size() < 4;)
    if (seeds_[i].origin != SeedOrigin::Initial) recent.push_back(i);
  if (!recent.empty() && rng_() % 2 == 0) return recent[rng_() % recent.size()];
  std::size_t i = cursor_ % seeds_.size();
  ++cursor_;
  return i;
}

Bytes Fuzzer::mutate(const Bytes& input, std::string& op) {
  Bytes m = input;
  int depth = 1;
  while (depth < 8 && rng_() % 2 == 0) ++depth;
  static constexpr const char* kOps[] = {"flip", "subst", "insert", "delete", "dup", "splice"};
  std::string last;
  auto below = [&](std::size_t n) { return n == 0 ? 0 : static_cast<std::size_t>(rng_() % n); };
  for (int d = 0; d < depth; ++d) {
    int k = static_cast<int>(rng_() % 6);
    if (m.empty() && k != 2 && k != 5) k = 2;
    switch (k) {
      case 0: {
        std::size_t bit = below(m.size() * 8);
        m[bit / 8] ^= static_cast<std::uint8_t>(1u << (bit % 8));
        break;
      }
      case 1:
        m[below(m.size())] = static_cast<std::uint8_t>(rng_());
        break;
      case 2: {
        std::size_t pos = below(m.size() + 1);
        std::size_t n = 1 + below(4);
        Bytes ins(n);
        for (auto& b : ins) b = static_cast<std::uint8_t>(rng_());
        m.insert(m.begin() + static_cast<std::ptrdiff_t>(pos), ins.begin(), ins.end());
        break;
      }
      case 3: {
        std::size_t pos = below(m.size());
        std::size_t n = std::min<std::size_t>(1 + below(4), m.size() - pos);
        m.erase(m.begin() + static_cast<std::ptrdiff_t>(pos),
                m.begin() + static_cast<std::ptrdiff_t>(pos + n));
        break;
      }
      case 4: {
        std::size_t from = below(m.size());
        std::size_t n = std::min<std::size_t>(1 + below(16), m.size() - from);
        Bytes block(m.begin() + static_cast<std::ptrdiff_t>(from),
                    m.begin() + static_cast<std::ptrdiff_t>(from + n));
        std::size_t to = below(m.size() + 1);
        m.insert(m.begin() + static_cast<std::ptrdiff_t>(to), block.begin(), block.end());
        break;
      }
      case 5: {
        const Bytes& other = data_[below(data_.size())];
        std::size_t a = below(m.size() + 1);
        std::size_t b = below(other.size() + 1);
        m.resize(a);
        m.insert(m.end(), other.begin() + static_cast<std::ptrdiff_t>(b), other.end());
        break;
      }
    }
    last = kOps[k];
    if (m.size() > cfg_.max_input) m.resize(cfg_.max_input);
  }
  op = depth == 1 ? last : "havoc";
  return m;
}

std::optional<SeedEntry> Fuzzer::fuzz_step() {
  if (!cfg_.mutate || seeds_.empty()) return std::nullopt;
  std::size_t parent = pick_seed();
  std::string op;
  Bytes child = mutate(data_[parent], op);
  auto o = execute(child);
  std::string origin = fmt::format("src:{:06},op:{}", seeds_[parent].id, op);
  if (o.status == ExitStatus::Crash) {
    std::set<ArmPair> fresh;
    std::set_difference(o.pairs.begin(), o.pairs.end(), crash_pairs_.begin(),
                        crash_pairs_.end(), std::inserter(fresh, fresh.end()));
    if (!fresh.empty() || crashes_ == 0) {
      crash_pairs_.insert(o.pairs.begin(), o.pairs.end());
      corpus_.add_crash(child, origin);
      ++crashes_;
      spdlog::info("crash saved ({} so far)", crashes_);
    }
  }
  if (o.status == ExitStatus::Timeout || novel(o.pairs).empty()) return std::nullopt;
  auto e = keep(child, origin, SeedOrigin::Mutation, std::move(o.pairs));
  last_find_ = clock_.now();
  write_stats();
  return e;
}

std::vector<ImportResult> Fuzzer::sync() {
  std::vector<ImportResult> out;
  auto upto = corpus_.synced_upto();
  std::vector<std::pair<std::uint32_t, fs::path>> files;
  std::error_code ec;
  for (const auto& e : fs::directory_iterator(corpus_.llm_queue_dir(), ec)) {
    auto id = parse_seed_id(e.path().filename().string());
    if (id && (!upto || *id > *upto)) files.emplace_back(*id, e.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& [id, p] : files) {
    auto data = read_bytes(p);
    if (!data) break;  // not fully visible yet; retry next pass
    ImportResult r;
    r.llm_id = id;
    auto o = execute(*data);
    r.new_pairs = novel(o.pairs);
    if (o.status != ExitStatus::Timeout && !r.new_pairs.empty()) {
      keep(*data, fmt::format("sync:llm,src:{:06}", id), SeedOrigin::Injected,
           std::move(o.pairs));
      last_find_ = clock_.now();
      r.kept = true;
    }
    write_file_atomic(corpus_.synced_marker(), std::to_string(id) + "\n");
    out.push_back(std::move(r));
  }
  if (!out.empty()) write_stats();
  return out;
}

bool Fuzzer::plateau() const {
  return clock_.now() - last_find_ > cfg_.plateau_s;
}

void Fuzzer::write_stats() {
  fs::path tsv = corpus_.out_dir() / "main" / "stats.tsv";
  if (!stats_header_ && !fs::exists(tsv)) {
    std::ofstream(tsv) << "elapsed_s\texecs\tkept\tarms_covered\n";
  }
  stats_header_ = true;
  std::ofstream(tsv, std::ios::app)
      << fmt::format("{:.3f}\t{}\t{}\t{}\n", clock_.now(), execs_, seeds_.size(),
                     covered_.size());
  write_file_atomic(corpus_.out_dir() / "main" / "fuzzer_stats",
                    fmt::format("elapsed_s         : {:.3f}\n"
                                "execs_done        : {}\n"
                                "corpus_count      : {}\n"
                                "arms_covered      : {}\n"
                                "saved_crashes     : {}\n"
                                "last_find_s       : {:.3f}\n",
                                clock_.now(), execs_, seeds_.size(), covered_.size(),
                                crashes_, last_find_));
}

}  // namespace slicefuzz
