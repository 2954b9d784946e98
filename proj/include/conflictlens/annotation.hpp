#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "conflictlens/behavior.hpp"
#include "conflictlens/dialogue.hpp"
#include "conflictlens/gateway/gateway.hpp"
#include "conflictlens/rational.hpp"

namespace conflictlens {

struct AnnotationRecord {
  int turn_index = 0;
  Behavior user_label = Behavior::none;
  bool correct = false;
  Behavior gold_label = Behavior::none;
  std::string rationale;

  friend bool operator==(const AnnotationRecord&, const AnnotationRecord&) = default;
};

// Instant feedback for one turn, computed from the embedded gold label.
// Throws TurnOutOfRange.
AnnotationRecord annotate_turn(const ScriptedDialogue& d, int turn_index, Behavior user_label);

// Per-session annotation state: latest write per turn wins until closed.
class AnnotationSheet {
 public:
  // Throws StageClosed or TurnOutOfRange.
  const AnnotationRecord& annotate(const ScriptedDialogue& d, int turn_index, Behavior user_label);
  void put(AnnotationRecord record);  // replay path, no checks
  void close() noexcept { closed_ = true; }

  [[nodiscard]] bool closed() const noexcept { return closed_; }
  [[nodiscard]] bool complete() const noexcept { return records_.size() == static_cast<std::size_t>(kDialogueTurns); }
  [[nodiscard]] bool annotated(int turn_index) const { return records_.count(turn_index) != 0; }
  [[nodiscard]] std::vector<AnnotationRecord> records() const;

  friend bool operator==(const AnnotationSheet&, const AnnotationSheet&) = default;

 private:
  std::map<int, AnnotationRecord> records_;
  bool closed_ = false;
};

struct LabelMetrics {
  int tp = 0;
  int fp = 0;
  int fn = 0;
  std::optional<Rational> precision;  // null when tp + fp == 0
  std::optional<Rational> recall;     // null when tp + fn == 0

  friend bool operator==(const LabelMetrics&, const LabelMetrics&) = default;
};

struct AnnotationSummary {
  Rational accuracy;
  std::map<Behavior, LabelMetrics> per_label;  // all eleven behaviors, never `none`
  std::string strengths_text;
  std::string recommendations_text;

  friend bool operator==(const AnnotationSummary&, const AnnotationSummary&) = default;
};

// Accuracy over the 12-class space (`none` included) and per-label
// tp/fp/fn/precision/recall over the eleven behaviors. Requires exactly one
// record for each of the 15 turns, in any order; throws IncompleteAnnotation.
AnnotationSummary compute_summary_metrics(std::span<const AnnotationRecord> records);

struct SummaryText {
  std::string strengths;
  std::string recommendations;
  bool fallback = false;
  friend bool operator==(const SummaryText&, const SummaryText&) = default;
};

// Deterministic text: a perfect score gets the congratulation/maintain
// template, otherwise the two lowest-recall behaviors are named.
SummaryText fallback_summary_text(const AnnotationSummary& metrics, const BehaviorCatalog* catalog = nullptr);

// annotation_summary_v1 fed only the numeric metrics and the two styles.
// Never throws: any gateway failure yields fallback_summary_text.
SummaryText generate_summary_text(gateway::Gateway& gw, const AnnotationSummary& metrics, ConflictStyle self_style,
                                  ConflictStyle partner_style, const BehaviorCatalog* catalog = nullptr);

void to_json(nlohmann::json& j, const AnnotationRecord& r);
void from_json(const nlohmann::json& j, AnnotationRecord& r);
void to_json(nlohmann::json& j, const AnnotationSummary& s);
void from_json(const nlohmann::json& j, AnnotationSummary& s);

}  // namespace conflictlens
