#include "conflictlens/service/session.hpp"

#include <algorithm>

#include "conflictlens/error.hpp"

namespace conflictlens::service {

namespace {

using nlohmann::json;

constexpr std::array<std::string_view, 8> kStateNames = {
    "Created", "TranscriptReady", "EstimatesReady", "StylesFinal",
    "DialogueReady", "AnnotationComplete", "PracticeActive", "Closed",
};

constexpr std::array<std::string_view, 11> kKindNames = {
    "created",      "transcript_ready",    "estimates_ready",     "questionnaire_adjusted",
    "styles_final", "dialogue_ready",      "annotation_recorded", "annotation_complete",
    "branch_reset", "practice_turn",       "closed",
};

[[noreturn]] void illegal(const std::string& what) { throw Error(ErrorCode::IllegalTransition, what); }

void apply_payload(Session& s, const SessionEvent& e) {
  const auto& p = e.payload;
  switch (e.kind) {
    case EventKind::created:
      s.session_id = p.at("session_id").get<std::string>();
      s.created_at = e.timestamp;
      break;
    case EventKind::transcript_ready: {
      auto t = p.at("transcript").get<Transcript>();
      if (!is_valid(t)) illegal("transcript payload is not a valid transcript");
      s.transcript = std::move(t);
      s.redaction = p.at("redaction").get<RedactionReport>();
      break;
    }
    case EventKind::estimates_ready: {
      auto self = p.at("self").get<QuestionnaireResponse>();
      auto partner = p.at("partner").get<QuestionnaireResponse>();
      validate(self);
      validate(partner);
      if (self.partner != Partner::self || partner.partner != Partner::partner) illegal("estimate roles swapped");
      s.self_response = std::move(self);
      s.partner_response = std::move(partner);
      s.estimate_warnings = p.value("warnings", std::vector<std::string>{});
      break;
    }
    case EventKind::questionnaire_adjusted: {
      auto r = p.at("response").get<QuestionnaireResponse>();
      validate(r);
      (r.partner == Partner::self ? s.self_response : s.partner_response) = std::move(r);
      break;
    }
    case EventKind::styles_final: {
      auto self = p.at("self").get<ConflictProfile>();
      auto partner = p.at("partner").get<ConflictProfile>();
      if (self.partner != Partner::self || partner.partner != Partner::partner) illegal("profile roles swapped");
      s.self_profile = std::move(self);
      s.partner_profile = std::move(partner);
      break;
    }
    case EventKind::dialogue_ready: {
      auto d = p.at("dialogue").get<ScriptedDialogue>();
      if (auto problem = check_invariants(d)) illegal("dialogue payload: " + *problem);
      s.dialogue = std::move(d);
      break;
    }
    case EventKind::annotation_recorded: {
      auto r = p.at("record").get<AnnotationRecord>();
      if (!s.dialogue) illegal("no dialogue to annotate");
      if (r != annotate_turn(*s.dialogue, r.turn_index, r.user_label)) illegal("annotation record disagrees with gold");
      s.annotations.put(std::move(r));
      break;
    }
    case EventKind::annotation_complete: {
      if (!s.annotations.complete()) illegal("annotation is incomplete");
      auto summary = p.at("summary").get<AnnotationSummary>();
      const auto records = s.annotations.records();
      const auto expected = compute_summary_metrics(records);
      if (summary.accuracy != expected.accuracy || summary.per_label != expected.per_label) {
        illegal("summary metrics disagree with the annotation records");
      }
      s.summary = std::move(summary);
      s.annotations.close();
      break;
    }
    case EventKind::branch_reset: {
      if (!s.summary) illegal("practice requires a completed annotation stage");
      auto b = p.at("branch").get<PracticeBranch>();
      for (const auto& existing : s.branches) {
        if (existing.branch_id == b.branch_id) illegal("duplicate branch id " + b.branch_id);
      }
      if (auto* active = s.active_branch()) active->status = BranchStatus::ended;
      s.branches.push_back(std::move(b));
      break;
    }
    case EventKind::practice_turn: {
      auto* active = s.active_branch();
      const auto id = p.at("branch_id").get<std::string>();
      if (!active || active->branch_id != id) illegal("practice turn for a branch that is not active");
      auto user = p.at("user_turn").get<DialogueTurn>();
      auto partner = p.at("partner_turn").get<DialogueTurn>();
      const int expected = active->origin_turn_index + static_cast<int>(active->turns.size());
      if (user.index != expected || partner.index != expected + 1) illegal("practice turn index out of sequence");
      active->lint_findings[user.index] = p.at("findings").get<std::vector<LintFinding>>();
      active->turns.push_back(std::move(user));
      active->turns.push_back(std::move(partner));
      if (p.at("status").get<std::string>() == "ended") active->status = BranchStatus::ended;
      break;
    }
    case EventKind::closed:
      if (auto* active = s.active_branch()) active->status = BranchStatus::ended;
      break;
  }
}

}  // namespace

std::string_view to_string(SessionState s) noexcept { return kStateNames[static_cast<std::size_t>(s)]; }

SessionState session_state_from_string(std::string_view s) {
  for (std::size_t i = 0; i < kStateNames.size(); ++i) {
    if (kStateNames[i] == s) return kSessionStates[i];
  }
  throw Error(ErrorCode::InvalidInput, "unknown session state " + std::string(s));
}

std::string_view to_string(EventKind k) noexcept { return kKindNames[static_cast<std::size_t>(k)]; }

EventKind event_kind_from_string(std::string_view s) {
  for (std::size_t i = 0; i < kKindNames.size(); ++i) {
    if (kKindNames[i] == s) return kEventKinds[i];
  }
  throw Error(ErrorCode::InvalidInput, "unknown event kind " + std::string(s));
}

PracticeBranch* Session::active_branch() {
  for (auto& b : branches) {
    if (b.status == BranchStatus::active) return &b;
  }
  return nullptr;
}

const PracticeBranch* Session::active_branch() const { return const_cast<Session*>(this)->active_branch(); }

std::optional<SessionState> next_state(SessionState from, EventKind kind) noexcept {
  using S = SessionState;
  using K = EventKind;
  switch (kind) {
    case K::created: return std::nullopt;  // only valid as the first event
    case K::transcript_ready: return from == S::Created ? std::optional(S::TranscriptReady) : std::nullopt;
    case K::estimates_ready: return from == S::TranscriptReady ? std::optional(S::EstimatesReady) : std::nullopt;
    case K::questionnaire_adjusted: return from == S::EstimatesReady ? std::optional(from) : std::nullopt;
    case K::styles_final: return from == S::EstimatesReady ? std::optional(S::StylesFinal) : std::nullopt;
    case K::dialogue_ready: return from == S::StylesFinal ? std::optional(S::DialogueReady) : std::nullopt;
    case K::annotation_recorded: return from == S::DialogueReady ? std::optional(from) : std::nullopt;
    case K::annotation_complete:
      return from == S::DialogueReady ? std::optional(S::AnnotationComplete) : std::nullopt;
    case K::branch_reset:
      if (from == S::AnnotationComplete || from == S::PracticeActive || from == S::Closed) return S::PracticeActive;
      return std::nullopt;
    case K::practice_turn: return from == S::PracticeActive ? std::optional(from) : std::nullopt;
    case K::closed: return from != S::Closed ? std::optional(S::Closed) : std::nullopt;
  }
  return std::nullopt;
}

Session transition(const Session& session, const SessionEvent& event) {
  if (event.seq != session.last_seq + 1) {
    illegal("event seq " + std::to_string(event.seq) + " does not follow " + std::to_string(session.last_seq));
  }
  SessionState target = SessionState::Created;
  if (event.kind == EventKind::created) {
    if (session.last_seq != -1) illegal("session already created");
  } else {
    if (session.last_seq == -1) illegal("first event must be created");
    auto next = next_state(session.state, event.kind);
    if (!next) {
      illegal(std::string(to_string(event.kind)) + " is not allowed in state " + std::string(to_string(session.state)));
    }
    target = *next;
  }

  Session out = session;
  try {
    apply_payload(out, event);
  } catch (const nlohmann::json::exception& e) {
    illegal(std::string("malformed ") + std::string(to_string(event.kind)) + " payload: " + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::IllegalTransition) throw;
    illegal(std::string("rejected ") + std::string(to_string(event.kind)) + " payload: " + e.what());
  }
  out.state = target;
  out.last_seq = event.seq;
  out.updated_at = event.timestamp;
  return out;
}

Session replay(std::span<const SessionEvent> events) {
  Session s;
  for (const auto& e : events) s = transition(s, e);
  return s;
}

void to_json(json& j, const SessionEvent& e) {
  j = {{"seq", e.seq}, {"kind", to_string(e.kind)}, {"payload", e.payload}, {"timestamp", e.timestamp}};
}

void from_json(const json& j, SessionEvent& e) {
  e.seq = j.at("seq").get<std::int64_t>();
  e.kind = event_kind_from_string(j.at("kind").get<std::string>());
  e.payload = j.at("payload");
  e.timestamp = j.at("timestamp").get<std::string>();
}

namespace {

template <typename T>
json opt(const std::optional<T>& v) {
  return v ? json(*v) : json();
}

template <typename T>
std::optional<T> read_opt(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<T>();
}

}  // namespace

void to_json(json& j, const Session& s) {
  j = {{"session_id", s.session_id},
       {"state", to_string(s.state)},
       {"transcript", opt(s.transcript)},
       {"redaction", s.redaction},
       {"responses", {{"self", opt(s.self_response)}, {"partner", opt(s.partner_response)}}},
       {"estimate_warnings", s.estimate_warnings},
       {"profiles", {{"self", opt(s.self_profile)}, {"partner", opt(s.partner_profile)}}},
       {"dialogue", opt(s.dialogue)},
       {"annotations", s.annotations.records()},
       {"annotation_closed", s.annotations.closed()},
       {"summary", opt(s.summary)},
       {"branches", s.branches},
       {"created_at", s.created_at},
       {"updated_at", s.updated_at},
       {"last_seq", s.last_seq}};
}

void from_json(const json& j, Session& s) {
  s = Session{};
  s.session_id = j.at("session_id").get<std::string>();
  s.state = session_state_from_string(j.at("state").get<std::string>());
  s.transcript = read_opt<Transcript>(j, "transcript");
  s.redaction = j.at("redaction").get<RedactionReport>();
  s.self_response = read_opt<QuestionnaireResponse>(j.at("responses"), "self");
  s.partner_response = read_opt<QuestionnaireResponse>(j.at("responses"), "partner");
  s.estimate_warnings = j.at("estimate_warnings").get<std::vector<std::string>>();
  s.self_profile = read_opt<ConflictProfile>(j.at("profiles"), "self");
  s.partner_profile = read_opt<ConflictProfile>(j.at("profiles"), "partner");
  s.dialogue = read_opt<ScriptedDialogue>(j, "dialogue");
  for (const auto& r : j.at("annotations")) s.annotations.put(r.get<AnnotationRecord>());
  if (j.at("annotation_closed").get<bool>()) s.annotations.close();
  s.summary = read_opt<AnnotationSummary>(j, "summary");
  s.branches = j.at("branches").get<std::vector<PracticeBranch>>();
  s.created_at = j.at("created_at").get<std::string>();
  s.updated_at = j.at("updated_at").get<std::string>();
  s.last_seq = j.at("last_seq").get<std::int64_t>();
}

json client_view(const Session& s) {
  json j = s;
  j.erase("annotation_closed");
  j.erase("last_seq");
  if (s.dialogue) {
    std::vector<bool> revealed(s.dialogue->turns.size(), false);
    for (std::size_t i = 0; i < revealed.size(); ++i) revealed[i] = s.annotations.annotated(static_cast<int>(i));
    j["dialogue"] = client_view(*s.dialogue, revealed);
  }
  return j;
}

}  // namespace conflictlens::service
