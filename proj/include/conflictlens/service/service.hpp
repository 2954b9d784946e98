#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "conflictlens/behavior.hpp"
#include "conflictlens/conflict_model.hpp"
#include "conflictlens/dialogue.hpp"
#include "conflictlens/gateway/gateway.hpp"
#include "conflictlens/ingestion.hpp"
#include "conflictlens/lint.hpp"
#include "conflictlens/redaction.hpp"
#include "conflictlens/service/event_store.hpp"
#include "conflictlens/service/session.hpp"

namespace conflictlens::service {

struct ServiceConfig {
  std::filesystem::path data_dir;
  std::filesystem::path catalog_dir = CONFLICTLENS_DATA_DIR;
  std::size_t snapshot_interval = 8;
  IngestionOptions ingestion;
  PracticeOptions practice;
  // ISO-8601 UTC by default; tests pin it for byte-stable logs.
  std::function<std::string()> clock;
  // 128 random bits as hex by default.
  std::function<std::string()> id_generator;
};

std::string utc_timestamp();
std::string random_session_id();

// Read-only catalogs, loaded once at start-up.
struct Catalogs {
  std::vector<QuestionnaireItem> questionnaire;
  BehaviorCatalog behaviors;
  std::vector<Topic> topics;
  gateway::TemplateRegistry templates;
  Redactor redactor;
  Linter linter;
  nlohmann::json questionnaire_json;
  nlohmann::json behaviors_json;
  nlohmann::json topics_json;

  static Catalogs load(const std::filesystem::path& dir);
};

// One method per API endpoint. Every method returns the response document
// and throws conflictlens::Error; http_api maps error codes to statuses.
//
// Writes to one session are serialized by a per-session writer lock that is
// held across gateway calls. Readers use a separate lock that is only taken
// to copy or swap the committed session, so GETs stay responsive while a
// generation call is in flight. Distinct sessions never share a lock.
class ConflictLensService {
 public:
  ConflictLensService(ServiceConfig config, std::shared_ptr<gateway::Provider> provider,
                      gateway::GatewayOptions gateway_options = {});
  ~ConflictLensService();

  ConflictLensService(const ConflictLensService&) = delete;
  ConflictLensService& operator=(const ConflictLensService&) = delete;

  nlohmann::json create_session();
  nlohmann::json get_session(const std::string& id);
  nlohmann::json upload_screenshots(const std::string& id, const std::vector<ImageBlob>& images);
  nlohmann::json estimate(const std::string& id);
  nlohmann::json adjust_questionnaire(const std::string& id, const std::string& partner, const nlohmann::json& body);
  nlohmann::json finalize_styles(const std::string& id);
  nlohmann::json generate_dialogue(const std::string& id, const nlohmann::json& body);
  nlohmann::json annotate(const std::string& id, const nlohmann::json& body);
  nlohmann::json annotation_summary(const std::string& id);
  nlohmann::json reset_points(const std::string& id);
  nlohmann::json practice_reset(const std::string& id, const nlohmann::json& body);
  nlohmann::json practice_turn(const std::string& id, const nlohmann::json& body);
  nlohmann::json close(const std::string& id);

  // name is one of questionnaire, behaviors, topics, lint-lexicons.
  nlohmann::json catalog(const std::string& name) const;

  std::string export_log(const std::string& id);
  nlohmann::json import_log(const std::string& jsonl);

  // Committed state, gold labels included. For tests and the CLI.
  Session snapshot(const std::string& id);

  [[nodiscard]] gateway::Gateway& gateway() noexcept { return *gateway_; }
  [[nodiscard]] EventStore& store() noexcept { return store_; }
  [[nodiscard]] const Catalogs& catalogs() const noexcept { return catalogs_; }

 private:
  struct Slot;
  class WriteTxn;

  std::shared_ptr<Slot> slot(const std::string& id);
  SessionEvent make_event(const Session& s, EventKind kind, nlohmann::json payload) const;

  ServiceConfig config_;
  Catalogs catalogs_;
  std::unique_ptr<gateway::Gateway> gateway_;
  EventStore store_;
  std::mutex slots_mu_;
  std::unordered_map<std::string, std::shared_ptr<Slot>> slots_;
};

}  // namespace conflictlens::service
