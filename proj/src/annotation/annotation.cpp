#include "conflictlens/annotation.hpp"

#include <algorithm>
#include <cstdio>
#include <set>

#include <nlohmann/json.hpp>

#include "conflictlens/error.hpp"

namespace conflictlens {

namespace {

std::string format_ratio(const std::optional<Rational>& r) {
  if (!r) return "n/a";
  char buf[16];
  std::snprintf(buf, sizeof buf, "%.2f", r->to_double());
  return buf;
}

nlohmann::json optional_rational(const std::optional<Rational>& r) {
  return r ? nlohmann::json(*r) : nlohmann::json();
}

std::optional<Rational> read_optional_rational(const nlohmann::json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<Rational>();
}

}  // namespace

AnnotationRecord annotate_turn(const ScriptedDialogue& d, int turn_index, Behavior user_label) {
  if (turn_index < 0 || turn_index >= kDialogueTurns || static_cast<std::size_t>(turn_index) >= d.turns.size()) {
    throw Error(ErrorCode::TurnOutOfRange, "turn index " + std::to_string(turn_index) + " is out of range");
  }
  const auto& turn = d.turns[static_cast<std::size_t>(turn_index)];
  return {turn_index, user_label, user_label == turn.gold_label, turn.gold_label, turn.gold_rationale};
}

const AnnotationRecord& AnnotationSheet::annotate(const ScriptedDialogue& d, int turn_index, Behavior user_label) {
  if (closed_) throw Error(ErrorCode::StageClosed, "annotation stage is closed");
  auto record = annotate_turn(d, turn_index, user_label);
  return records_[turn_index] = std::move(record);
}

void AnnotationSheet::put(AnnotationRecord record) {
  const int idx = record.turn_index;
  records_[idx] = std::move(record);
}

std::vector<AnnotationRecord> AnnotationSheet::records() const {
  std::vector<AnnotationRecord> out;
  for (const auto& [idx, r] : records_) out.push_back(r);
  return out;
}

AnnotationSummary compute_summary_metrics(std::span<const AnnotationRecord> records) {
  std::set<int> seen;
  for (const auto& r : records) {
    if (r.turn_index < 0 || r.turn_index >= kDialogueTurns || !seen.insert(r.turn_index).second) {
      throw Error(ErrorCode::IncompleteAnnotation, "annotation records must cover each turn exactly once");
    }
  }
  if (seen.size() != static_cast<std::size_t>(kDialogueTurns)) {
    throw Error(ErrorCode::IncompleteAnnotation,
                "all 15 turns must be annotated, " + std::to_string(seen.size()) + " done");
  }

  AnnotationSummary s;
  int correct = 0;
  for (auto b : kBehaviors) s.per_label[b] = {};
  for (const auto& r : records) {
    if (r.user_label == r.gold_label) {
      ++correct;
      if (r.gold_label != Behavior::none) ++s.per_label[r.gold_label].tp;
      continue;
    }
    if (r.user_label != Behavior::none) ++s.per_label[r.user_label].fp;
    if (r.gold_label != Behavior::none) ++s.per_label[r.gold_label].fn;
  }
  s.accuracy = Rational{correct, kDialogueTurns};
  for (auto& [label, m] : s.per_label) {
    if (m.tp + m.fp > 0) m.precision = Rational{m.tp, m.tp + m.fp};
    if (m.tp + m.fn > 0) m.recall = Rational{m.tp, m.tp + m.fn};
  }
  return s;
}

SummaryText fallback_summary_text(const AnnotationSummary& metrics, const BehaviorCatalog* catalog) {
  auto name = [&](Behavior b) { return catalog ? catalog->display_name(b) : std::string(to_string(b)); };
  const auto correct = metrics.accuracy.num() * (kDialogueTurns / metrics.accuracy.den());
  SummaryText out;
  out.fallback = true;
  if (metrics.accuracy == Rational{1}) {
    out.strengths =
        "Excellent work: you labeled all 15 turns correctly, including the turns with no negative behavior.";
    out.recommendations =
        "Maintain this awareness. Keep noticing these patterns as they happen in your own conversations, and "
        "use the practice stage to try responding to them differently.";
    return out;
  }

  std::vector<std::pair<Behavior, Rational>> ranked;
  for (const auto& [label, m] : metrics.per_label) {
    if (m.recall) ranked.emplace_back(label, *m.recall);
  }
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.second < b.second; });

  out.strengths = "You labeled " + std::to_string(correct) + " of 15 turns correctly.";
  std::vector<std::string> strong;
  for (const auto& [label, recall] : ranked) {
    if (recall == Rational{1}) strong.push_back(name(label));
  }
  if (!strong.empty()) {
    out.strengths += " You reliably recognized ";
    for (std::size_t i = 0; i < strong.size(); ++i) {
      if (i > 0) out.strengths += i + 1 == strong.size() ? " and " : ", ";
      out.strengths += strong[i];
    }
    out.strengths += ".";
  }

  if (ranked.empty()) {
    out.recommendations = "Review the definitions of each behavior and try the dialogue again.";
    return out;
  }
  const std::size_t n = std::min<std::size_t>(2, ranked.size());
  out.recommendations = "Focus next on recognizing ";
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0) out.recommendations += " and ";
    out.recommendations += name(ranked[i].first) + " (recall " + format_ratio(ranked[i].second) + ")";
  }
  out.recommendations += n == 1 ? ", the behavior you identified least reliably."
                                : ", the behaviors you identified least reliably.";
  out.recommendations += " Reread their definitions and look for them in your own messages.";
  return out;
}

SummaryText generate_summary_text(gateway::Gateway& gw, const AnnotationSummary& metrics, ConflictStyle self_style,
                                  ConflictStyle partner_style, const BehaviorCatalog* catalog) {
  std::string table;
  for (const auto& [label, m] : metrics.per_label) {
    table += std::string(to_string(label)) + ": " + std::to_string(m.tp) + " / " + std::to_string(m.fp) + " / " +
             std::to_string(m.fn) + " / " + format_ratio(m.precision) + " / " + format_ratio(m.recall) + "\n";
  }
  try {
    const auto reply = gw.invoke("annotation_summary_v1",
                                 {{"accuracy", format_ratio(metrics.accuracy) + " (" + metrics.accuracy.to_string() + ")"},
                                  {"self_style", std::string(to_string(self_style))},
                                  {"partner_style", std::string(to_string(partner_style))},
                                  {"metrics", table}});
    SummaryText out{reply.at("strengths").get<std::string>(), reply.at("recommendations").get<std::string>(), false};
    if (out.strengths.empty() || out.recommendations.empty()) return fallback_summary_text(metrics, catalog);
    return out;
  } catch (const std::exception&) {
    return fallback_summary_text(metrics, catalog);
  }
}

void to_json(nlohmann::json& j, const AnnotationRecord& r) {
  j = {{"turn_index", r.turn_index},
       {"user_label", r.user_label},
       {"correct", r.correct},
       {"gold_label", r.gold_label},
       {"rationale", r.rationale}};
}

void from_json(const nlohmann::json& j, AnnotationRecord& r) {
  r.turn_index = j.at("turn_index").get<int>();
  r.user_label = j.at("user_label").get<Behavior>();
  r.correct = j.at("correct").get<bool>();
  r.gold_label = j.at("gold_label").get<Behavior>();
  r.rationale = j.at("rationale").get<std::string>();
}

void to_json(nlohmann::json& j, const AnnotationSummary& s) {
  nlohmann::json per_label = nlohmann::json::object();
  for (const auto& [label, m] : s.per_label) {
    per_label[std::string(to_string(label))] = {{"tp", m.tp},
                                                {"fp", m.fp},
                                                {"fn", m.fn},
                                                {"precision", optional_rational(m.precision)},
                                                {"recall", optional_rational(m.recall)}};
  }
  j = {{"accuracy", s.accuracy},
       {"per_label", per_label},
       {"strengths_text", s.strengths_text},
       {"recommendations_text", s.recommendations_text}};
}

void from_json(const nlohmann::json& j, AnnotationSummary& s) {
  s.accuracy = j.at("accuracy").get<Rational>();
  s.per_label.clear();
  for (const auto& [key, m] : j.at("per_label").items()) {
    auto label = behavior_from_string(key);
    if (!label || *label == Behavior::none) throw Error(ErrorCode::InvalidInput, "bad per-label key " + key);
    s.per_label[*label] = {m.at("tp").get<int>(), m.at("fp").get<int>(), m.at("fn").get<int>(),
                           read_optional_rational(m.at("precision")), read_optional_rational(m.at("recall"))};
  }
  s.strengths_text = j.at("strengths_text").get<std::string>();
  s.recommendations_text = j.at("recommendations_text").get<std::string>();
}

}  // namespace conflictlens
