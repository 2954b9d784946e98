#pragma once

#include <atomic>
#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "conflictlens/gateway/provider.hpp"
#include "conflictlens/service/service.hpp"

namespace harness {

class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  [[nodiscard]] const std::filesystem::path& path() const noexcept { return path_; }

 private:
  std::filesystem::path path_;
};

std::filesystem::path fixture(const std::string& name);
std::string read_file(const std::filesystem::path& p);
conflictlens::gateway::FixtureMap happy_fixtures();

// Smallest byte strings that pass the screenshot sniffing rules.
std::string tiny_png(std::uint32_t width = 2, std::uint32_t height = 2);
std::string tiny_jpeg();

// Deterministic ISO-8601 clock: one second per call from a fixed epoch.
std::function<std::string()> fixed_clock();

struct ServiceRig {
  std::unique_ptr<TempDir> dir;
  std::shared_ptr<conflictlens::gateway::MockProvider> mock;
  std::unique_ptr<conflictlens::service::ConflictLensService> service;
};

ServiceRig make_rig(conflictlens::gateway::FixtureMap fixtures = happy_fixtures(), std::size_t snapshot_interval = 8);

struct Exchange {
  std::string step;
  nlohmann::json response;
};

// Drives upload, estimates, adjust, finalize, dialogue, 15 annotations,
// summary, reset and `practice_turns` practice turns. `observe` sees each
// response as it is produced, along with the turns annotated so far.
struct HappyPathResult {
  std::string session_id;
  std::vector<Exchange> exchanges;
};

HappyPathResult run_happy_path(conflictlens::service::ConflictLensService& svc, int practice_turns = 3,
                               const std::function<void(const Exchange&, const std::vector<int>&)>& observe = {});

}  // namespace harness
