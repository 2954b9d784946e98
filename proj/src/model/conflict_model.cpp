#include "conflictlens/conflict_model.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "conflictlens/error.hpp"

namespace conflictlens {

std::string_view to_string(Partner p) noexcept {
  return p == Partner::self ? "self" : "partner";
}

std::string_view to_string(ResponseSource s) noexcept {
  return s == ResponseSource::llm_estimated ? "llm_estimated" : "user_adjusted";
}

Partner partner_from_string(std::string_view s) {
  if (s == "self") return Partner::self;
  if (s == "partner") return Partner::partner;
  throw Error(ErrorCode::InvalidInput, "unknown partner: " + std::string(s));
}

void validate(const QuestionnaireResponse& resp) {
  if (resp.items.size() != kQuestionnaireItems) {
    throw Error(ErrorCode::InvalidItemCount,
                "questionnaire must have 13 items, got " + std::to_string(resp.items.size()));
  }
  for (std::size_t i = 0; i < resp.items.size(); ++i) {
    const int v = resp.items[i];
    if (v < kLikertMin || v > kLikertMax) {
      throw Error(ErrorCode::ItemOutOfRange,
                  "item " + std::to_string(i) + " out of range: " + std::to_string(v));
    }
  }
}

std::string_view to_string(Subscale s) noexcept {
  switch (s) {
    case Subscale::compromise: return "compromise";
    case Subscale::avoidance: return "avoidance";
    case Subscale::interactional_reactivity: return "interactional_reactivity";
    case Subscale::separation: return "separation";
    case Subscale::domination: return "domination";
    case Subscale::submission: return "submission";
  }
  return "compromise";
}

Subscale subscale_of_item(std::size_t item) noexcept {
  if (item < 3) return Subscale::compromise;
  return kSubscales[1 + (item - 3) / 2];
}

Rational SubscaleScores::get(Subscale s) const noexcept {
  switch (s) {
    case Subscale::compromise: return compromise;
    case Subscale::avoidance: return avoidance;
    case Subscale::interactional_reactivity: return interactional_reactivity;
    case Subscale::separation: return separation;
    case Subscale::domination: return domination;
    case Subscale::submission: return submission;
  }
  return compromise;
}

void SubscaleScores::set(Subscale s, Rational value) noexcept {
  switch (s) {
    case Subscale::compromise: compromise = value; break;
    case Subscale::avoidance: avoidance = value; break;
    case Subscale::interactional_reactivity: interactional_reactivity = value; break;
    case Subscale::separation: separation = value; break;
    case Subscale::domination: domination = value; break;
    case Subscale::submission: submission = value; break;
  }
}

std::string_view to_string(ConflictStyle s) noexcept {
  switch (s) {
    case ConflictStyle::Avoidant: return "Avoidant";
    case ConflictStyle::Validating: return "Validating";
    case ConflictStyle::Volatile: return "Volatile";
    case ConflictStyle::Hostile: return "Hostile";
  }
  return "Validating";
}

ConflictStyle style_from_string(std::string_view s) {
  for (auto style : kConflictStyles) {
    if (to_string(style) == s) return style;
  }
  throw Error(ErrorCode::InvalidInput, "unknown conflict style: " + std::string(s));
}

SubscaleScores score_questionnaire(const QuestionnaireResponse& resp) {
  validate(resp);
  std::array<std::int64_t, 6> sums{};
  std::array<std::int64_t, 6> counts{};
  for (std::size_t i = 0; i < kQuestionnaireItems; ++i) {
    const auto idx = static_cast<std::size_t>(subscale_of_item(i));
    sums[idx] += resp.items[i];
    ++counts[idx];
  }
  SubscaleScores out;
  for (std::size_t k = 0; k < kSubscales.size(); ++k) {
    out.set(kSubscales[k], Rational{sums[k], counts[k]});
  }
  return out;
}

Rational engagement(const SubscaleScores& s) noexcept {
  return Rational{6} - (s.avoidance + s.separation) / Rational{2};
}

Rational negativity(const SubscaleScores& s) noexcept {
  return (s.domination + s.interactional_reactivity) / Rational{2};
}

ConflictStyle classify_style(const SubscaleScores& s) noexcept {
  if (engagement(s) < kEngagementThreshold) return ConflictStyle::Avoidant;
  const bool negative = negativity(s) >= kNegativityThreshold;
  if (negative && s.compromise < kCompromiseThreshold) return ConflictStyle::Hostile;
  if (negative) return ConflictStyle::Volatile;
  return ConflictStyle::Validating;
}

QuestionnaireResponse merge_adjustments(const QuestionnaireResponse& estimated,
                                        std::span<const ItemEdit> edits) {
  validate(estimated);
  for (const auto& e : edits) {
    if (e.index >= kQuestionnaireItems) {
      throw Error(ErrorCode::IndexOutOfBounds,
                  "edit index out of bounds: " + std::to_string(e.index));
    }
    if (e.score < kLikertMin || e.score > kLikertMax) {
      throw Error(ErrorCode::ItemOutOfRange, "edit score out of range: " + std::to_string(e.score));
    }
  }
  QuestionnaireResponse out = estimated;
  for (const auto& e : edits) out.items[e.index] = e.score;
  out.source = ResponseSource::user_adjusted;
  return out;
}

std::vector<Behavior> negative_pattern_highlights(const SubscaleScores& s) {
  const Rational elevated = kNegativityThreshold;
  std::set<Behavior> picked;
  if (s.interactional_reactivity >= elevated) {
    picked.insert(Behavior::criticism);
    picked.insert(Behavior::defensiveness);
  }
  if (s.domination >= elevated) {
    picked.insert(Behavior::contempt);
    picked.insert(Behavior::threat_ultimatum);
  }
  if (s.avoidance >= elevated || s.separation >= elevated) picked.insert(Behavior::stonewalling);
  if (s.submission >= elevated) picked.insert(Behavior::invalidation);
  if (s.compromise < Rational{2}) picked.insert(Behavior::blaming_you_statement);
  return {picked.begin(), picked.end()};
}

ConflictProfile finalize_profile(const QuestionnaireResponse& resp) {
  ConflictProfile p;
  p.partner = resp.partner;
  p.subscales = score_questionnaire(resp);
  p.style = classify_style(p.subscales);
  p.negative_pattern_highlights = negative_pattern_highlights(p.subscales);
  return p;
}

std::vector<QuestionnaireItem> load_questionnaire_catalog(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw Error(ErrorCode::ConfigError, "cannot open questionnaire catalog: " + file.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ConfigError, "questionnaire catalog is not valid JSON: " + std::string(e.what()));
  }
  std::vector<QuestionnaireItem> items;
  for (const auto& rec : doc.at("items")) {
    QuestionnaireItem item;
    item.id = rec.at("id").get<int>();
    const auto name = rec.at("subscale").get<std::string>();
    auto it = std::find_if(kSubscales.begin(), kSubscales.end(),
                           [&](Subscale s) { return to_string(s) == name; });
    if (it == kSubscales.end()) throw Error(ErrorCode::ConfigError, "unknown subscale: " + name);
    item.subscale = *it;
    item.prompt = rec.at("prompt").get<std::string>();
    items.push_back(std::move(item));
  }
  if (items.size() != kQuestionnaireItems) {
    throw Error(ErrorCode::ConfigError, "questionnaire catalog must list 13 items");
  }
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (items[i].id != static_cast<int>(i + 1) || items[i].subscale != subscale_of_item(i)) {
      throw Error(ErrorCode::ConfigError,
                  "questionnaire catalog item " + std::to_string(i + 1) + " disagrees with scoring map");
    }
  }
  return items;
}

void to_json(nlohmann::json& j, const Rational& r) {
  j = {{"num", r.num()}, {"den", r.den()}, {"value", r.to_double()}};
}

void from_json(const nlohmann::json& j, Rational& r) {
  r = Rational{j.at("num").get<std::int64_t>(), j.at("den").get<std::int64_t>()};
}

void to_json(nlohmann::json& j, Partner p) { j = std::string(to_string(p)); }
void from_json(const nlohmann::json& j, Partner& p) { p = partner_from_string(j.get<std::string>()); }

void to_json(nlohmann::json& j, ConflictStyle s) { j = std::string(to_string(s)); }
void from_json(const nlohmann::json& j, ConflictStyle& s) { s = style_from_string(j.get<std::string>()); }

void to_json(nlohmann::json& j, const QuestionnaireResponse& r) {
  j = {{"items", r.items}, {"source", std::string(to_string(r.source))}, {"partner", r.partner}};
}

void from_json(const nlohmann::json& j, QuestionnaireResponse& r) {
  r.items = j.at("items").get<std::vector<int>>();
  const auto src = j.at("source").get<std::string>();
  if (src == "llm_estimated") {
    r.source = ResponseSource::llm_estimated;
  } else if (src == "user_adjusted") {
    r.source = ResponseSource::user_adjusted;
  } else {
    throw Error(ErrorCode::InvalidInput, "unknown response source: " + src);
  }
  r.partner = j.at("partner").get<Partner>();
}

void to_json(nlohmann::json& j, const SubscaleScores& s) {
  j = nlohmann::json::object();
  for (auto sub : kSubscales) j[std::string(to_string(sub))] = s.get(sub);
}

void from_json(const nlohmann::json& j, SubscaleScores& s) {
  for (auto sub : kSubscales) s.set(sub, j.at(std::string(to_string(sub))).get<Rational>());
}

void to_json(nlohmann::json& j, const ConflictProfile& p) {
  j = {{"partner", p.partner},
       {"subscales", p.subscales},
       {"style", p.style},
       {"negative_pattern_highlights", p.negative_pattern_highlights}};
}

void from_json(const nlohmann::json& j, ConflictProfile& p) {
  p.partner = j.at("partner").get<Partner>();
  p.subscales = j.at("subscales").get<SubscaleScores>();
  p.style = j.at("style").get<ConflictStyle>();
  p.negative_pattern_highlights = j.at("negative_pattern_highlights").get<std::vector<Behavior>>();
}

}  // namespace conflictlens
