#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "conflictlens/annotation.hpp"
#include "conflictlens/conflict_model.hpp"
#include "conflictlens/dialogue.hpp"
#include "conflictlens/ingestion.hpp"
#include "conflictlens/redaction.hpp"

namespace conflictlens::service {

enum class SessionState {
  Created,
  TranscriptReady,
  EstimatesReady,
  StylesFinal,
  DialogueReady,
  AnnotationComplete,
  PracticeActive,
  Closed,
};

inline constexpr std::array<SessionState, 8> kSessionStates = {
    SessionState::Created,       SessionState::TranscriptReady,    SessionState::EstimatesReady,
    SessionState::StylesFinal,   SessionState::DialogueReady,      SessionState::AnnotationComplete,
    SessionState::PracticeActive, SessionState::Closed,
};

std::string_view to_string(SessionState s) noexcept;
SessionState session_state_from_string(std::string_view s);

// Transitions and data writes. Data writes keep the state they occur in.
enum class EventKind {
  created,
  transcript_ready,
  estimates_ready,
  questionnaire_adjusted,
  styles_final,
  dialogue_ready,
  annotation_recorded,
  annotation_complete,
  branch_reset,
  practice_turn,
  closed,
};

inline constexpr std::array<EventKind, 11> kEventKinds = {
    EventKind::created,         EventKind::transcript_ready,    EventKind::estimates_ready,
    EventKind::questionnaire_adjusted, EventKind::styles_final, EventKind::dialogue_ready,
    EventKind::annotation_recorded, EventKind::annotation_complete, EventKind::branch_reset,
    EventKind::practice_turn,   EventKind::closed,
};

std::string_view to_string(EventKind k) noexcept;
EventKind event_kind_from_string(std::string_view s);

struct SessionEvent {
  std::int64_t seq = 0;
  EventKind kind = EventKind::created;
  nlohmann::json payload = nlohmann::json::object();
  std::string timestamp;

  friend bool operator==(const SessionEvent&, const SessionEvent&) = default;
};

struct Session {
  std::string session_id;
  SessionState state = SessionState::Created;
  std::optional<Transcript> transcript;
  RedactionReport redaction;
  std::optional<QuestionnaireResponse> self_response;
  std::optional<QuestionnaireResponse> partner_response;
  std::vector<std::string> estimate_warnings;
  std::optional<ConflictProfile> self_profile;
  std::optional<ConflictProfile> partner_profile;
  std::optional<ScriptedDialogue> dialogue;
  AnnotationSheet annotations;
  std::optional<AnnotationSummary> summary;
  std::vector<PracticeBranch> branches;
  std::string created_at;
  std::string updated_at;
  std::int64_t last_seq = -1;

  [[nodiscard]] PracticeBranch* active_branch();
  [[nodiscard]] const PracticeBranch* active_branch() const;

  friend bool operator==(const Session&, const Session&) = default;
};

// State the event leads to from `from`, or nullopt when the event is not in
// the transition table for that state.
std::optional<SessionState> next_state(SessionState from, EventKind kind) noexcept;

// Applies one event to a copy of the session. Throws IllegalTransition when
// the event is not legal in the current state, is out of sequence, or its
// payload does not fit; the input session is never modified.
Session transition(const Session& session, const SessionEvent& event);

// Folds events from an empty session.
Session replay(std::span<const SessionEvent> events);

void to_json(nlohmann::json& j, const SessionEvent& e);
void from_json(const nlohmann::json& j, SessionEvent& e);

// Full document including gold labels; used for snapshots only.
void to_json(nlohmann::json& j, const Session& s);
void from_json(const nlohmann::json& j, Session& s);

// Client-safe document: gold labels and rationales only for annotated turns.
nlohmann::json client_view(const Session& s);

}  // namespace conflictlens::service
