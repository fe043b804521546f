#include <algorithm>
#include <charconv>

#include <fmt/format.h>

#include "slicefuzz/fuzzer.hpp"

namespace slicefuzz {

namespace fs = std::filesystem;

std::string seed_name(std::uint32_t id, const std::string& suffix) {
  return suffix.empty() ? fmt::format("id:{:06}", id)
                        : fmt::format("id:{:06},{}", id, suffix);
}

std::optional<std::uint32_t> parse_seed_id(const std::string& name) {
  if (!name.starts_with("id:") || name.size() < 9) return std::nullopt;
  std::uint32_t v = 0;
  auto [p, ec] = std::from_chars(name.data() + 3, name.data() + 9, v);
  if (ec != std::errc{} || p != name.data() + 9) return std::nullopt;
  if (name.size() > 9 && name[9] != ',') return std::nullopt;
  return v;
}

namespace {

std::uint32_t next_free_id(const fs::path& dir) {
  std::uint32_t next = 0;
  std::error_code ec;
  for (const auto& e : fs::directory_iterator(dir, ec))
    if (auto id = parse_seed_id(e.path().filename().string()))
      next = std::max(next, *id + 1);
  return next;
}

}  // namespace

Corpus::Corpus(fs::path out_dir) : out_(std::move(out_dir)) {
  fs::create_directories(queue_dir());
  fs::create_directories(crash_dir());
  fs::create_directories(llm_queue_dir());
  fs::create_directories(synced_marker().parent_path());
  next_id_ = next_free_id(queue_dir());
  next_crash_ = next_free_id(crash_dir());
  next_llm_ = next_free_id(llm_queue_dir());
}

fs::path Corpus::add(const Bytes& data, const std::string& suffix) {
  fs::path p = queue_dir() / seed_name(next_id_++, suffix);
  write_file_atomic(p, data);
  return p;
}

fs::path Corpus::add_crash(const Bytes& data, const std::string& suffix) {
  fs::path p = crash_dir() / seed_name(next_crash_++, suffix);
  write_file_atomic(p, data);
  return p;
}

std::uint32_t Corpus::inject(const Bytes& data) {
  std::uint32_t id = next_llm_++;
  fs::path p = llm_queue_dir() / seed_name(id);
  try {
    write_file_atomic(p, data);
  } catch (const Error&) {
    write_file_atomic(p, data);  // one retry, then the error propagates
  }
  return id;
}

std::optional<std::uint32_t> Corpus::synced_upto() const {
  auto b = read_bytes(synced_marker());
  if (!b) return std::nullopt;
  std::string s = trim(bytes_to_string(*b));
  std::uint32_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || s.empty()) return std::nullopt;
  return v;
}

std::optional<bool> Corpus::import_outcome(std::uint32_t llm_id) const {
  auto upto = synced_upto();
  if (!upto || *upto < llm_id) return std::nullopt;
  std::string tag = fmt::format(",sync:llm,src:{:06}", llm_id);
  std::error_code ec;
  for (const auto& e : fs::directory_iterator(queue_dir(), ec)) {
    std::string n = e.path().filename().string();
    if (n.size() >= tag.size() && n.compare(n.size() - tag.size(), tag.size(), tag) == 0)
      return true;
  }
  return false;
}

}  // namespace slicefuzz
