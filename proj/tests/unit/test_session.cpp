#include <gtest/gtest.h>

#include <map>
#include <random>

#include <nlohmann/json.hpp>

#include "conflictlens/error.hpp"
#include "conflictlens/service/session.hpp"
#include "oracles.hpp"

using namespace conflictlens;
using namespace conflictlens::service;
using nlohmann::json;

namespace {

using S = SessionState;
using K = EventKind;

// Written out by hand from the lifecycle rules; "-" means illegal.
// Columns follow kEventKinds: created, transcript_ready, estimates_ready,
// questionnaire_adjusted, styles_final, dialogue_ready, annotation_recorded,
// annotation_complete, branch_reset, practice_turn, closed.
const std::map<S, std::array<const char*, 11>> kTable = {
    {S::Created, {"-", "TranscriptReady", "-", "-", "-", "-", "-", "-", "-", "-", "Closed"}},
    {S::TranscriptReady, {"-", "-", "EstimatesReady", "-", "-", "-", "-", "-", "-", "-", "Closed"}},
    {S::EstimatesReady,
     {"-", "-", "-", "EstimatesReady", "StylesFinal", "-", "-", "-", "-", "-", "Closed"}},
    {S::StylesFinal, {"-", "-", "-", "-", "-", "DialogueReady", "-", "-", "-", "-", "Closed"}},
    {S::DialogueReady,
     {"-", "-", "-", "-", "-", "-", "DialogueReady", "AnnotationComplete", "-", "-", "Closed"}},
    {S::AnnotationComplete, {"-", "-", "-", "-", "-", "-", "-", "-", "PracticeActive", "-", "Closed"}},
    {S::PracticeActive,
     {"-", "-", "-", "-", "-", "-", "-", "-", "PracticeActive", "PracticeActive", "Closed"}},
    {S::Closed, {"-", "-", "-", "-", "-", "-", "-", "-", "PracticeActive", "-", "-"}},
};

const ScriptedDialogue& fixture_dialogue() {
  static const ScriptedDialogue d = [] {
    std::mt19937_64 rng(5);
    auto out = oracle::random_dialogue(rng);
    out.style_pair = {ConflictStyle::Validating, ConflictStyle::Volatile};
    return out;
  }();
  return d;
}

std::vector<AnnotationRecord> gold_records(const ScriptedDialogue& d) {
  std::vector<AnnotationRecord> out;
  for (int i = 0; i < kDialogueTurns; ++i) out.push_back(annotate_turn(d, i, d.turns[i].gold_label));
  return out;
}

QuestionnaireResponse response(Partner p, ResponseSource src = ResponseSource::llm_estimated) {
  return {{3, 3, 3, 2, 2, 2, 2, 2, 2, 2, 2, 2, 2}, src, p};
}

// A payload that is well formed for `kind` given the current session.
json payload_for(const Session& s, K kind, std::mt19937_64& rng) {
  const auto& d = s.dialogue ? *s.dialogue : fixture_dialogue();
  switch (kind) {
    case K::created: return {{"session_id", "s-1"}};
    case K::transcript_ready: {
      Transcript t{{{Partner::self, "hi", 0}, {Partner::partner, "hey", 1}}, std::nullopt};
      return {{"transcript", t}, {"redaction", json::array()}};
    }
    case K::estimates_ready:
      return {{"self", response(Partner::self)}, {"partner", response(Partner::partner)}, {"warnings", json::array()}};
    case K::questionnaire_adjusted: {
      auto r = response(rng() % 2 ? Partner::self : Partner::partner, ResponseSource::user_adjusted);
      r.items[rng() % 13] = 1 + static_cast<int>(rng() % 5);
      return {{"response", r}};
    }
    case K::styles_final:
      return {{"self", oracle::profile_with_style(Partner::self, ConflictStyle::Validating)},
              {"partner", oracle::profile_with_style(Partner::partner, ConflictStyle::Volatile)}};
    case K::dialogue_ready: return {{"dialogue", fixture_dialogue()}};
    case K::annotation_recorded: {
      const int i = static_cast<int>(rng() % kDialogueTurns);
      const auto label = rng() % 2 ? d.turns[i].gold_label : static_cast<Behavior>(rng() % 12);
      return {{"record", annotate_turn(d, i, label)}};
    }
    case K::annotation_complete: {
      const auto records = s.annotations.complete() ? s.annotations.records() : gold_records(d);
      return {{"summary", compute_summary_metrics(records)}, {"text_fallback", true}};
    }
    case K::branch_reset: {
      const auto points = recommend_reset_points(d);
      const int at = rng() % 2 ? kDialogueTurns : points[rng() % points.size()];
      return {{"branch", reset_branch(d, at, "branch-" + std::to_string(s.branches.size() + 1))}};
    }
    case K::practice_turn: {
      const auto* b = s.active_branch();
      const int idx = b ? b->origin_turn_index + static_cast<int>(b->turns.size()) : 0;
      return {{"branch_id", b ? b->branch_id : "none"},
              {"user_turn", DialogueTurn{idx, Partner::self, "I feel unsure.", Behavior::none, {}}},
              {"partner_turn", DialogueTurn{idx + 1, Partner::partner, "ok", Behavior::none, {}}},
              {"findings", json::array()},
              {"status", "active"}};
    }
    case K::closed: return json::object();
  }
  return {};
}

SessionEvent event(const Session& s, K kind, std::mt19937_64& rng) {
  return {s.last_seq + 1, kind, payload_for(s, kind, rng), "2026-01-01T00:00:00.000Z"};
}

// Canonical event path that ends in `target`.
std::vector<SessionEvent> path_to(S target) {
  std::mt19937_64 rng(1);
  std::vector<SessionEvent> events;
  Session s;
  auto push = [&](K k, json payload = {}) {
    auto e = event(s, k, rng);
    if (!payload.is_null()) e.payload = std::move(payload);
    s = transition(s, e);
    events.push_back(e);
  };
  push(K::created);
  if (target == S::Created) return events;
  push(K::transcript_ready);
  if (target == S::TranscriptReady) return events;
  push(K::estimates_ready);
  if (target == S::EstimatesReady) return events;
  push(K::styles_final);
  if (target == S::StylesFinal) return events;
  push(K::dialogue_ready);
  for (const auto& r : gold_records(fixture_dialogue())) push(K::annotation_recorded, {{"record", r}});
  if (target == S::DialogueReady) return events;
  push(K::annotation_complete);
  if (target == S::AnnotationComplete) return events;
  push(K::branch_reset);
  if (target == S::PracticeActive) return events;
  push(K::closed);
  return events;
}

template <typename F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no Error thrown";
  return ErrorCode::StorageError;
}

}  // namespace

TEST(Session, NamesRoundTrip) {
  for (auto s : kSessionStates) EXPECT_EQ(session_state_from_string(to_string(s)), s);
  for (auto k : kEventKinds) EXPECT_EQ(event_kind_from_string(to_string(k)), k);
  EXPECT_THROW(session_state_from_string("Done"), Error);
}

TEST(Session, TransitionTableMatchesIndependentTable) {
  for (auto state : kSessionStates) {
    const auto events = path_to(state);
    const auto s = replay(events);
    ASSERT_EQ(s.state, state);
    for (std::size_t k = 0; k < kEventKinds.size(); ++k) {
      const auto kind = kEventKinds[k];
      const std::string expected = kTable.at(state)[k];
      const auto next = next_state(state, kind);
      EXPECT_EQ(next ? std::string(to_string(*next)) : "-", expected) << to_string(state) << " + " << to_string(kind);

      std::mt19937_64 rng(k);
      const auto e = event(s, kind, rng);
      const auto before = s;
      if (expected == "-") {
        EXPECT_EQ(code_of([&] { transition(s, e); }), ErrorCode::IllegalTransition)
            << to_string(state) << " + " << to_string(kind);
      } else {
        const auto after = transition(s, e);
        EXPECT_EQ(std::string(to_string(after.state)), expected);
        EXPECT_EQ(after.last_seq, s.last_seq + 1);
      }
      EXPECT_EQ(s, before);
    }
  }
}

TEST(Session, SequenceNumbersMustBeDense) {
  std::mt19937_64 rng(2);
  const auto s = replay(path_to(S::Created));
  auto e = event(s, K::transcript_ready, rng);
  e.seq += 1;
  EXPECT_EQ(code_of([&] { transition(s, e); }), ErrorCode::IllegalTransition);
  e.seq = s.last_seq;
  EXPECT_EQ(code_of([&] { transition(s, e); }), ErrorCode::IllegalTransition);
  EXPECT_EQ(code_of([&] { transition(Session{}, event(s, K::transcript_ready, rng)); }), ErrorCode::IllegalTransition);
}

TEST(Session, BadPayloadsAreIllegalTransitions) {
  std::mt19937_64 rng(3);
  const auto at_dialogue = replay(path_to(S::DialogueReady));
  auto e = event(at_dialogue, K::annotation_recorded, rng);
  e.payload["record"]["correct"] = !e.payload["record"]["correct"].get<bool>();
  EXPECT_EQ(code_of([&] { transition(at_dialogue, e); }), ErrorCode::IllegalTransition);

  auto c = event(at_dialogue, K::annotation_complete, rng);
  c.payload["summary"]["accuracy"] = Rational(1, 15);
  EXPECT_EQ(code_of([&] { transition(at_dialogue, c); }), ErrorCode::IllegalTransition);

  const auto at_styles = replay(path_to(S::StylesFinal));
  auto d = event(at_styles, K::dialogue_ready, rng);
  d.payload["dialogue"]["turns"].erase(0);
  EXPECT_EQ(code_of([&] { transition(at_styles, d); }), ErrorCode::IllegalTransition);

  const auto at_est = replay(path_to(S::EstimatesReady));
  auto q = event(at_est, K::questionnaire_adjusted, rng);
  q.payload["response"]["items"][0] = 9;
  EXPECT_EQ(code_of([&] { transition(at_est, q); }), ErrorCode::IllegalTransition);

  const auto at_practice = replay(path_to(S::PracticeActive));
  auto p = event(at_practice, K::practice_turn, rng);
  p.payload["branch_id"] = "branch-9";
  EXPECT_EQ(code_of([&] { transition(at_practice, p); }), ErrorCode::IllegalTransition);
  auto dup = event(at_practice, K::branch_reset, rng);
  dup.payload["branch"]["branch_id"] = "branch-1";
  EXPECT_EQ(code_of([&] { transition(at_practice, dup); }), ErrorCode::IllegalTransition);

  const auto early_close = replay(path_to(S::Created));
  const auto closed = transition(early_close, event(early_close, K::closed, rng));
  EXPECT_EQ(code_of([&] { transition(closed, event(closed, K::branch_reset, rng)); }), ErrorCode::IllegalTransition);
}

TEST(Session, ResetEndsThePreviousBranchAndCloseEndsTheActiveOne) {
  std::mt19937_64 rng(4);
  auto s = replay(path_to(S::PracticeActive));
  s = transition(s, event(s, K::practice_turn, rng));
  s = transition(s, event(s, K::branch_reset, rng));
  ASSERT_EQ(s.branches.size(), 2u);
  EXPECT_EQ(s.branches[0].status, BranchStatus::ended);
  EXPECT_EQ(s.active_branch(), &s.branches[1]);
  s = transition(s, event(s, K::closed, rng));
  EXPECT_EQ(s.active_branch(), nullptr);
  EXPECT_EQ(s.state, S::Closed);
}

TEST(Session, RandomLegalSequencesReplayIdentically) {
  std::mt19937_64 rng(2024);
  for (int run = 0; run < 100; ++run) {
    std::vector<SessionEvent> events;
    Session s;
    auto e0 = event(s, K::created, rng);
    s = transition(s, e0);
    events.push_back(e0);
    const int length = 1 + static_cast<int>(rng() % 40);
    for (int step = 0; step < length; ++step) {
      std::vector<K> legal;
      for (std::size_t k = 0; k < kEventKinds.size(); ++k) {
        if (std::string(kTable.at(s.state)[k]) == "-") continue;
        const auto kind = kEventKinds[k];
        if (kind == K::annotation_complete && !s.annotations.complete()) continue;
        if (kind == K::branch_reset && !s.summary) continue;
        legal.push_back(kind);
      }
      if (legal.empty()) break;
      const auto e = event(s, legal[rng() % legal.size()], rng);
      s = transition(s, e);
      events.push_back(e);
    }
    EXPECT_EQ(replay(events), s);

    std::vector<SessionEvent> reparsed;
    for (const auto& e : events) reparsed.push_back(json::parse(json(e).dump()).get<SessionEvent>());
    EXPECT_EQ(reparsed, events);
    EXPECT_EQ(json(replay(reparsed)).dump(), json(s).dump());
    EXPECT_EQ(json(s).get<Session>(), s);
  }
}

TEST(Session, ClientViewHidesUnannotatedGold) {
  std::mt19937_64 rng(6);
  auto s = replay(path_to(S::StylesFinal));
  s = transition(s, event(s, K::dialogue_ready, rng));
  s = transition(s, {s.last_seq + 1, K::annotation_recorded,
                     {{"record", annotate_turn(*s.dialogue, 3, Behavior::none)}}, "t"});
  const auto view = client_view(s);
  EXPECT_FALSE(view.contains("last_seq"));
  EXPECT_FALSE(view.contains("annotation_closed"));
  EXPECT_TRUE(oracle::gold_leaks(view, *s.dialogue, {3}).empty());
  EXPECT_FALSE(oracle::gold_leaks(json(s), *s.dialogue, {3}).empty());
}
