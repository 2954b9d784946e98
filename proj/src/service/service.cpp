#include "conflictlens/service/service.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <random>

#include "conflictlens/annotation.hpp"
#include "conflictlens/error.hpp"

namespace conflictlens::service {

using nlohmann::json;

namespace {

json read_json_file(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw Error(ErrorCode::ConfigError, "cannot open " + file.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ConfigError, file.string() + ": " + e.what());
  }
}

[[noreturn]] void invalid(const std::string& what) { throw Error(ErrorCode::InvalidInput, what); }

void require(const Session& s, EventKind kind) {
  if (!next_state(s.state, kind)) {
    throw Error(ErrorCode::IllegalTransition, std::string(to_string(kind)) + " is not allowed in state " +
                                                  std::string(to_string(s.state)));
  }
}

const json& body_field(const json& body, const char* key) {
  if (!body.is_object() || !body.contains(key)) invalid(std::string("missing field ") + key);
  return body.at(key);
}

int body_int(const json& body, const char* key) {
  const auto& v = body_field(body, key);
  if (!v.is_number_integer()) invalid(std::string(key) + " must be an integer");
  return v.get<int>();
}

std::string body_string(const json& body, const char* key) {
  const auto& v = body_field(body, key);
  if (!v.is_string()) invalid(std::string(key) + " must be a string");
  return v.get<std::string>();
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

json turns_json(std::span<const DialogueTurn> turns) {
  json out = json::array();
  for (const auto& t : turns) out.push_back(t);
  return out;
}

json advice_list(std::span<const LintFinding> findings) {
  std::vector<std::string> out;
  for (const auto& f : findings) {
    if (std::find(out.begin(), out.end(), f.advice) == out.end()) out.push_back(f.advice);
  }
  return out;
}

}  // namespace

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const auto secs = std::chrono::system_clock::to_time_t(now);
  const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() % 1000;
  std::tm tm{};
  gmtime_r(&secs, &tm);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ", tm.tm_year + 1900, tm.tm_mon + 1, tm.tm_mday,
                tm.tm_hour, tm.tm_min, tm.tm_sec, static_cast<int>(ms));
  return buf;
}

std::string random_session_id() {
  std::random_device rd;
  std::uniform_int_distribution<std::uint64_t> dist;
  char buf[33];
  std::snprintf(buf, sizeof buf, "%016llx%016llx", static_cast<unsigned long long>(dist(rd)),
                static_cast<unsigned long long>(dist(rd)));
  return buf;
}

Catalogs Catalogs::load(const std::filesystem::path& dir) {
  Catalogs c;
  c.questionnaire = load_questionnaire_catalog(dir / "questionnaire.json");
  c.behaviors = BehaviorCatalog::load(dir / "behaviors.json");
  c.topics = load_topic_catalog(dir / "topics.json");
  c.templates = gateway::TemplateRegistry::load(dir / "templates.json");
  c.redactor = Redactor::load(dir / "redaction_patterns.json");
  c.linter = Linter::load(dir / "lint_lexicons.json");
  c.questionnaire_json = read_json_file(dir / "questionnaire.json");
  c.behaviors_json = read_json_file(dir / "behaviors.json");
  c.topics_json = read_json_file(dir / "topics.json");
  return c;
}

struct ConflictLensService::Slot {
  std::mutex writer;    // held for a whole write, including gateway calls
  std::mutex view;      // guards `committed` only
  Session committed;

  Session read() {
    std::lock_guard lock(view);
    return committed;
  }
};

ConflictLensService::ConflictLensService(ServiceConfig config, std::shared_ptr<gateway::Provider> provider,
                                         gateway::GatewayOptions gateway_options)
    : config_(std::move(config)),
      catalogs_(Catalogs::load(config_.catalog_dir)),
      store_(config_.data_dir, config_.snapshot_interval) {
  if (!provider) throw Error(ErrorCode::ConfigError, "no inference provider configured");
  if (!config_.clock) config_.clock = utc_timestamp;
  if (!config_.id_generator) config_.id_generator = random_session_id;
  const Redactor* redactor = &catalogs_.redactor;
  gateway_ = std::make_unique<gateway::Gateway>(catalogs_.templates, std::move(provider), gateway_options,
                                                [redactor](std::string_view text) {
                                                  return redactor->redact(text).first;
                                                });
}

ConflictLensService::~ConflictLensService() = default;

std::shared_ptr<ConflictLensService::Slot> ConflictLensService::slot(const std::string& id) {
  std::lock_guard lock(slots_mu_);
  if (auto it = slots_.find(id); it != slots_.end()) return it->second;
  if (!store_.exists(id)) throw Error(ErrorCode::SessionNotFound, "no session " + id);
  auto s = std::make_shared<Slot>();
  s->committed = store_.load(id);
  slots_.emplace(id, s);
  return s;
}

SessionEvent ConflictLensService::make_event(const Session& s, EventKind kind, json payload) const {
  return {s.last_seq + 1, kind, std::move(payload), config_.clock()};
}

// Holds the writer lock for one endpoint call and publishes each committed
// event to readers.
class ConflictLensService::WriteTxn {
 public:
  WriteTxn(ConflictLensService& svc, const std::string& id)
      : svc_(svc), id_(id), slot_(svc.slot(id)), lock_(slot_->writer), current_(slot_->read()) {}

  const Session& current() const noexcept { return current_; }

  const Session& commit(EventKind kind, json payload) {
    const auto event = svc_.make_event(current_, kind, std::move(payload));
    auto next = transition(current_, event);
    svc_.store_.append(id_, event, next);
    {
      std::lock_guard view(slot_->view);
      slot_->committed = next;
    }
    current_ = std::move(next);
    return current_;
  }

 private:
  ConflictLensService& svc_;
  std::string id_;
  std::shared_ptr<Slot> slot_;
  std::unique_lock<std::mutex> lock_;
  Session current_;
};

json ConflictLensService::create_session() {
  std::string id = config_.id_generator();
  if (!EventStore::valid_session_id(id)) throw Error(ErrorCode::ConfigError, "id generator produced " + id);
  auto fresh = std::make_shared<Slot>();
  std::lock_guard lock(fresh->writer);
  {
    std::lock_guard slots(slots_mu_);
    if (slots_.count(id) || store_.exists(id)) throw Error(ErrorCode::StorageError, "session id collision");
    slots_.emplace(id, fresh);
  }
  Session empty;
  const auto event = make_event(empty, EventKind::created, {{"session_id", id}});
  auto s = transition(empty, event);
  try {
    store_.append(id, event, s);
  } catch (...) {
    std::lock_guard slots(slots_mu_);
    slots_.erase(id);
    throw;
  }
  std::lock_guard view(fresh->view);
  fresh->committed = s;
  return client_view(s);
}

json ConflictLensService::get_session(const std::string& id) { return client_view(slot(id)->read()); }

Session ConflictLensService::snapshot(const std::string& id) { return slot(id)->read(); }

json ConflictLensService::upload_screenshots(const std::string& id, const std::vector<ImageBlob>& images) {
  WriteTxn txn(*this, id);
  require(txn.current(), EventKind::transcript_ready);
  auto result = extract_transcript(*gateway_, images, catalogs_.redactor, config_.ingestion);
  const auto& s = txn.commit(EventKind::transcript_ready,
                             {{"transcript", result.transcript}, {"redaction", result.redaction}});
  return {{"transcript", *s.transcript}, {"redaction", s.redaction}, {"state", to_string(s.state)}};
}

json ConflictLensService::estimate(const std::string& id) {
  WriteTxn txn(*this, id);
  require(txn.current(), EventKind::estimates_ready);
  const auto& t = *txn.current().transcript;
  auto self = estimate_questionnaire(*gateway_, t, Partner::self, catalogs_.questionnaire);
  auto partner = estimate_questionnaire(*gateway_, t, Partner::partner, catalogs_.questionnaire);
  std::vector<std::string> warnings = self.warnings;
  warnings.insert(warnings.end(), partner.warnings.begin(), partner.warnings.end());
  const auto& s = txn.commit(EventKind::estimates_ready,
                             {{"self", self.response}, {"partner", partner.response}, {"warnings", warnings}});
  return {{"self", *s.self_response},
          {"partner", *s.partner_response},
          {"warnings", s.estimate_warnings},
          {"state", to_string(s.state)}};
}

json ConflictLensService::adjust_questionnaire(const std::string& id, const std::string& partner_name,
                                               const json& body) {
  const auto partner = partner_from_string(partner_name);
  const auto& raw_edits = body_field(body, "edits");
  if (!raw_edits.is_array()) invalid("edits must be an array");
  std::vector<ItemEdit> edits;
  for (const auto& e : raw_edits) {
    if (!e.is_object()) invalid("each edit must be an object");
    const auto index = body_int(e, "index");
    if (index < 0) throw Error(ErrorCode::IndexOutOfBounds, "item index " + std::to_string(index) + " is negative");
    edits.push_back({static_cast<std::size_t>(index), body_int(e, "score")});
  }

  WriteTxn txn(*this, id);
  require(txn.current(), EventKind::questionnaire_adjusted);
  const auto& current = partner == Partner::self ? txn.current().self_response : txn.current().partner_response;
  auto merged = merge_adjustments(*current, edits);
  const auto& s = txn.commit(EventKind::questionnaire_adjusted, {{"response", merged}});
  const auto& response = partner == Partner::self ? *s.self_response : *s.partner_response;
  const auto scores = score_questionnaire(response);
  return {{"response", response},
          {"subscales", scores},
          {"provisional_style", classify_style(scores)},
          {"state", to_string(s.state)}};
}

json ConflictLensService::finalize_styles(const std::string& id) {
  WriteTxn txn(*this, id);
  require(txn.current(), EventKind::styles_final);
  auto self = finalize_profile(*txn.current().self_response);
  auto partner = finalize_profile(*txn.current().partner_response);
  const auto& s = txn.commit(EventKind::styles_final, {{"self", self}, {"partner", partner}});
  return {{"self", *s.self_profile}, {"partner", *s.partner_profile}, {"state", to_string(s.state)}};
}

json ConflictLensService::generate_dialogue(const std::string& id, const json& body) {
  std::optional<std::string> topic;
  if (body.is_object() && body.contains("topic") && !body.at("topic").is_null()) {
    topic = body_string(body, "topic");
    for (const auto& t : catalogs_.topics) {
      if (t.id == *topic) topic = t.title + ". " + t.description;
    }
  }
  WriteTxn txn(*this, id);
  require(txn.current(), EventKind::dialogue_ready);
  const GenerationContext ctx{&catalogs_.behaviors, catalogs_.topics, fnv1a(id)};
  auto d = conflictlens::generate_dialogue(*gateway_, txn.current().self_profile, txn.current().partner_profile,
                                           topic, ctx);
  const auto& s = txn.commit(EventKind::dialogue_ready, {{"dialogue", d}});
  return {{"dialogue", client_view(*s.dialogue, std::vector<bool>(s.dialogue->turns.size(), false))},
          {"state", to_string(s.state)}};
}

json ConflictLensService::annotate(const std::string& id, const json& body) {
  const int turn_index = body_int(body, "turn_index");
  const auto label_name = body_string(body, "label");
  const auto label = behavior_from_string(label_name);
  if (!label) invalid("unknown behavior label " + label_name);

  WriteTxn txn(*this, id);
  const auto& cur = txn.current();
  if (cur.annotations.closed()) throw Error(ErrorCode::StageClosed, "annotation stage is closed");
  require(cur, EventKind::annotation_recorded);
  auto record = annotate_turn(*cur.dialogue, turn_index, *label);
  txn.commit(EventKind::annotation_recorded, {{"record", record}});
  return record;
}

json ConflictLensService::annotation_summary(const std::string& id) {
  WriteTxn txn(*this, id);
  const auto& cur = txn.current();
  if (!cur.summary) {
    require(cur, EventKind::annotation_complete);
    const auto records = cur.annotations.records();
    auto summary = compute_summary_metrics(records);
    const auto text = generate_summary_text(*gateway_, summary, cur.self_profile->style, cur.partner_profile->style,
                                            &catalogs_.behaviors);
    summary.strengths_text = text.strengths;
    summary.recommendations_text = text.recommendations;
    txn.commit(EventKind::annotation_complete, {{"summary", summary}, {"text_fallback", text.fallback}});
  }
  json out = *txn.current().summary;
  out["annotations"] = txn.current().annotations.records();
  out["state"] = to_string(txn.current().state);
  return out;
}

json ConflictLensService::reset_points(const std::string& id) {
  const auto s = slot(id)->read();
  if (!s.summary) {
    throw Error(ErrorCode::IllegalTransition, "reset points are available once annotation is complete");
  }
  const auto points = recommend_reset_points(*s.dialogue);
  return {{"reset_points", points},
          {"primary", points.empty() ? json() : json(points.front())},
          {"continue_from_end", kDialogueTurns},
          {"state", to_string(s.state)}};
}

json ConflictLensService::practice_reset(const std::string& id, const json& body) {
  const int turn_index = body_int(body, "turn_index");
  WriteTxn txn(*this, id);
  const auto& cur = txn.current();
  require(cur, EventKind::branch_reset);
  if (!cur.summary) throw Error(ErrorCode::IllegalTransition, "practice requires a completed annotation stage");
  auto branch = reset_branch(*cur.dialogue, turn_index, "branch-" + std::to_string(cur.branches.size() + 1));
  const auto& s = txn.commit(EventKind::branch_reset, {{"branch", branch}});
  const auto& active = *s.active_branch();
  return {{"branch", active},
          {"history", turns_json(visible_history(*s.dialogue, active))},
          {"state", to_string(s.state)}};
}

json ConflictLensService::practice_turn(const std::string& id, const json& body) {
  const auto text = body_string(body, "text");
  bool dry_run = false;
  if (body.contains("dry_run")) {
    if (!body.at("dry_run").is_boolean()) invalid("dry_run must be a boolean");
    dry_run = body.at("dry_run").get<bool>();
  }
  if (text.find_first_not_of(" \t\r\n") == std::string::npos) invalid("practice message is empty");

  WriteTxn txn(*this, id);
  const auto& cur = txn.current();
  require(cur, EventKind::practice_turn);
  const auto* active = cur.active_branch();
  if (!active) throw Error(ErrorCode::BranchEnded, "no active practice branch; reset to start a new one");
  if (active->status == BranchStatus::ended ||
      active->turns.size() + 2 > config_.practice.max_extension_turns) {
    throw Error(ErrorCode::BranchEnded, "practice branch reached its turn cap");
  }

  const auto findings = catalogs_.linter.lint(text);
  json rewrite;
  std::string rewrite_status = "not_needed";
  if (!findings.empty()) {
    const auto history = visible_history(*cur.dialogue, *active);
    try {
      rewrite = suggest_rewrite(*gateway_, text, findings, history, catalogs_.linter);
      rewrite_status = "suggested";
    } catch (const Error& e) {
      if (e.code() != ErrorCode::RewriteUnavailable) throw;
      rewrite_status = "unavailable";
    }
  }
  json out = {{"findings", findings},
              {"advice", advice_list(findings)},
              {"rewrite", rewrite},
              {"rewrite_status", rewrite_status},
              {"partner_turn", nullptr},
              {"dry_run", dry_run}};
  if (dry_run) {
    out["branch"] = *active;
    out["state"] = to_string(cur.state);
    return out;
  }

  auto branch = *active;
  auto partner_turn = simulate_partner_turn(*gateway_, branch, text, *cur.partner_profile, *cur.dialogue, findings,
                                            config_.practice);
  const auto& user_turn = branch.turns[branch.turns.size() - 2];
  const auto& s = txn.commit(EventKind::practice_turn, {{"branch_id", branch.branch_id},
                                                        {"user_turn", user_turn},
                                                        {"partner_turn", partner_turn},
                                                        {"findings", findings},
                                                        {"status", to_string(branch.status)}});
  out["partner_turn"] = partner_turn;
  for (const auto& b : s.branches) {
    if (b.branch_id == branch.branch_id) out["branch"] = b;
  }
  out["state"] = to_string(s.state);
  return out;
}

json ConflictLensService::close(const std::string& id) {
  WriteTxn txn(*this, id);
  require(txn.current(), EventKind::closed);
  return client_view(txn.commit(EventKind::closed, json::object()));
}

json ConflictLensService::catalog(const std::string& name) const {
  if (name == "questionnaire") return catalogs_.questionnaire_json;
  if (name == "behaviors") return catalogs_.behaviors_json;
  if (name == "topics") return catalogs_.topics_json;
  if (name == "lint-lexicons") return catalogs_.linter.lexicons_json();
  throw Error(ErrorCode::InvalidInput, "unknown catalog " + name);
}

std::string ConflictLensService::export_log(const std::string& id) {
  auto s = slot(id);
  std::lock_guard lock(s->writer);
  return store_.export_log(id);
}

json ConflictLensService::import_log(const std::string& jsonl) {
  std::lock_guard lock(slots_mu_);
  auto s = store_.import_log(jsonl);
  return client_view(s);
}

}  // namespace conflictlens::service
