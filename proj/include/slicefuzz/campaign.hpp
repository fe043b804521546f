#pragma once

#include <filesystem>
#include <memory>
#include <set>
#include <string>

#include "slicefuzz/ast_index.hpp"
#include "slicefuzz/config.hpp"
#include "slicefuzz/coverage.hpp"
#include "slicefuzz/report.hpp"
#include "slicefuzz/tracer.hpp"

namespace slicefuzz {

struct Subject {
  AstIndex index;
  Program program;
  std::filesystem::path plain_binary;
};

/// Indexes the sources and builds the plain and trace-instrumented
/// variants under `build_dir`. Throws BuildError.
std::unique_ptr<Subject> build_subject(const SubjectConfig& cfg,
                                       const std::filesystem::path& build_dir);

/// "name.c:line:arm", the key scripted replies are matched on.
std::string roadblock_key(const AstIndex& ix, const CondId& c, std::uint32_t arm);

RunOptions run_options(const CampaignConfig& cfg);

class Campaign {
 public:
  /// Validates the config and builds the subject into `<output>/build`.
  explicit Campaign(CampaignConfig cfg);
  ~Campaign();

  CampaignMetrics run();

  const Subject& subject() const { return *subject_; }
  const CampaignConfig& config() const { return cfg_; }
  /// (cond, arm) pairs the fuzzer had covered when run() returned.
  const std::set<ArmPair>& covered() const { return covered_; }

 private:
  CampaignConfig cfg_;
  std::unique_ptr<Subject> subject_;
  std::set<ArmPair> covered_;
};

inline CampaignMetrics run_campaign(const CampaignConfig& cfg) {
  return Campaign(cfg).run();
}

}  // namespace slicefuzz
