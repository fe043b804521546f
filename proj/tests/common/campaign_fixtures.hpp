#pragma once

#include <atomic>
#include <filesystem>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "slicefuzz/campaign.hpp"
#include "slicefuzz/config.hpp"
#include "slicefuzz/gauntlet.hpp"
#include "slicefuzz/util.hpp"

namespace fixtures {

namespace fs = std::filesystem;
using namespace slicefuzz;

inline fs::path src(const std::string& name) {
  return fs::path(SLICEFUZZ_FIXTURES) / "src" / name;
}

inline fs::path fresh_dir(const std::string& name) {
  fs::path p = scratch_dir() / "slicefuzz-tests" / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

inline fs::path write_seeds(const fs::path& dir,
                            const std::vector<std::pair<std::string, std::string>>& seeds) {
  fs::create_directories(dir);
  for (const auto& [name, data] : seeds) write_file_atomic(dir / name, string_to_bytes(data));
  return dir;
}

inline fs::path write_script(const fs::path& p,
                             const std::vector<std::pair<std::string, std::string>>& entries) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& [key, text] : entries) j.push_back({{"roadblock_key", key}, {"response_text", text}});
  write_file_atomic(p, j.dump(2));
  return p;
}

inline std::string block(std::string_view input) {
  return "```input\n" + std::string(input) + "\n```\n";
}

/// Single-threaded, logical-clock campaign over fixture sources.
inline CampaignConfig fixture_config(const std::vector<std::string>& sources,
                                     const fs::path& work) {
  CampaignConfig c;
  for (const auto& s : sources) c.subject.sources.push_back(src(s));
  c.subject.cflags = {"-O0", "-w"};
  c.seeds = work / "seeds";
  c.output = work / "out";
  c.mode = CampaignMode::Single;
  c.clock = ClockKind::Logical;
  c.plateau_s = 0.2;
  c.timeout_ms = 2000;
  c.budget_s = 120;
  c.flush_s = 1;
  return c;
}

/// A gauntlet case's own campaign file, redirected to `out` and set to stop
/// once its end-to-end target arm is covered.
inline CampaignConfig gauntlet_config(const GauntletCase& gc, const fs::path& out) {
  auto c = load_config(gc.config);
  c.output = out;
  c.goal = gc.e2e_target().cond + ":" + std::to_string(gc.e2e_target().arm);
  if (gc.e2e_target().scripted && !gc.replay.empty()) {
    c.solver.backend = BackendKind::Scripted;
    c.solver.script = gc.replay;
  }
  return c;
}

/// Whether the (cond, arm) named "name.c:line" / arm is in `covered`.
inline bool covers(const Campaign& c, const GauntletTarget& t) {
  auto id = c.subject().program.guards.parse_cond(t.cond);
  return id && c.covered().count({*id, t.arm}) > 0;
}

/// Chat-completion stand-in on a random local port.
struct MockEndpoint {
  httplib::Server server;
  std::thread thread;
  std::atomic<int> hits{0};
  std::atomic<int> status{200};
  std::string reply = "```input\nxyz\n```";
  int port = 0;

  MockEndpoint() {
    server.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
      ++hits;
      auto body = nlohmann::json::parse(req.body, nullptr, false);
      if (body.is_discarded() || !body.contains("messages")) {
        res.status = 400;
        return;
      }
      res.status = status;
      nlohmann::json j = {
          {"choices", {{{"message", {{"role", "assistant"}, {"content", reply}}}}}}};
      res.set_content(j.dump(), "application/json");
    });
    port = server.bind_to_any_port("127.0.0.1");
    thread = std::thread([this] { server.listen_after_bind(); });
    server.wait_until_ready();
  }
  ~MockEndpoint() {
    server.stop();
    thread.join();
  }
  std::string url() const {
    return "http://127.0.0.1:" + std::to_string(port) + "/v1/chat/completions";
  }
};

}  // namespace fixtures
