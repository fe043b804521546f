#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "slicefuzz/campaign.hpp"
#include "slicefuzz/util.hpp"

namespace testing {

namespace fs = std::filesystem;
using namespace slicefuzz;

inline fs::path fixture(const std::string& name) {
  return fs::path(SLICEFUZZ_FIXTURES) / name;
}
inline fs::path fixture_src(const std::string& name) { return fixture("src") / name; }

/// Fresh per-test scratch directory.
inline fs::path scratch(const std::string& name) {
  fs::path p = scratch_dir() / "slicefuzz-tests" / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

/// Builds fixture sources once per process.
inline const Subject& subject(const std::vector<std::string>& files,
                              std::vector<std::string> cflags = {"-O0", "-w"}) {
  static std::map<std::vector<std::string>, std::unique_ptr<Subject>> cache;
  auto& slot = cache[files];
  if (!slot) {
    SubjectConfig sc;
    for (const auto& f : files)
      sc.sources.push_back(fs::path(f).is_absolute() ? fs::path(f) : fixture_src(f));
    sc.cflags = std::move(cflags);
    std::string key;
    for (const auto& f : files) key += fs::path(f).stem().string() + "_";
    slot = build_subject(sc, scratch("build_" + key));
  }
  return *slot;
}
inline const Subject& subject(const std::string& file) {
  return subject(std::vector<std::string>{file});
}

inline Bytes bytes(std::string_view s) { return string_to_bytes(s); }

inline CondId cond_at(const AstIndex& ix, const std::string& file, std::uint32_t line) {
  auto f = ix.find_file(file);
  if (!f) throw Error("no file " + file);
  const Conditional* c = ix.conditional_at(*f, line);
  if (!c) throw Error("no conditional at " + file + ":" + std::to_string(line));
  return c->cond_id;
}

inline std::vector<std::string> lines_of(const AstIndex& ix,
                                         const std::vector<TraceRecord>& rs) {
  std::vector<std::string> out;
  for (const auto& r : rs)
    out.push_back(ix.file(r.file_id).name() + ":" + std::to_string(r.line) + ":" +
                  std::to_string(r.ordinal));
  return out;
}

}  // namespace testing
