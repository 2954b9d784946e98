#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "conflictlens/behavior.hpp"
#include "conflictlens/rational.hpp"

namespace conflictlens {

inline constexpr std::size_t kQuestionnaireItems = 13;
inline constexpr int kLikertMin = 1;
inline constexpr int kLikertMax = 5;

enum class Partner { self, partner };
enum class ResponseSource { llm_estimated, user_adjusted };

std::string_view to_string(Partner p) noexcept;
std::string_view to_string(ResponseSource s) noexcept;
Partner partner_from_string(std::string_view s);

struct QuestionnaireResponse {
  std::vector<int> items;
  ResponseSource source = ResponseSource::llm_estimated;
  Partner partner = Partner::self;

  friend bool operator==(const QuestionnaireResponse&, const QuestionnaireResponse&) = default;
};

// Throws InvalidItemCount / ItemOutOfRange.
void validate(const QuestionnaireResponse& resp);

enum class Subscale {
  compromise,
  avoidance,
  interactional_reactivity,
  separation,
  domination,
  submission,
};

inline constexpr std::array<Subscale, 6> kSubscales = {
    Subscale::compromise, Subscale::avoidance,  Subscale::interactional_reactivity,
    Subscale::separation, Subscale::domination, Subscale::submission,
};

std::string_view to_string(Subscale s) noexcept;

// Subscale owning the zero-based questionnaire item. Items 0-2 are
// compromise; every other subscale owns two consecutive items.
Subscale subscale_of_item(std::size_t item) noexcept;

struct SubscaleScores {
  Rational compromise{3};
  Rational avoidance{3};
  Rational interactional_reactivity{3};
  Rational separation{3};
  Rational domination{3};
  Rational submission{3};

  [[nodiscard]] Rational get(Subscale s) const noexcept;
  void set(Subscale s, Rational value) noexcept;

  friend bool operator==(const SubscaleScores&, const SubscaleScores&) = default;
};

enum class ConflictStyle { Avoidant, Validating, Volatile, Hostile };

inline constexpr std::array<ConflictStyle, 4> kConflictStyles = {
    ConflictStyle::Avoidant, ConflictStyle::Validating, ConflictStyle::Volatile,
    ConflictStyle::Hostile};

std::string_view to_string(ConflictStyle s) noexcept;
ConflictStyle style_from_string(std::string_view s);

struct ConflictProfile {
  Partner partner = Partner::self;
  SubscaleScores subscales;
  ConflictStyle style = ConflictStyle::Validating;
  std::vector<Behavior> negative_pattern_highlights;

  friend bool operator==(const ConflictProfile&, const ConflictProfile&) = default;
};

// Classifier thresholds.
inline const Rational kEngagementThreshold{3};
inline const Rational kNegativityThreshold{7, 2};
inline const Rational kCompromiseThreshold{3};

SubscaleScores score_questionnaire(const QuestionnaireResponse& resp);

// Ordered decision table over engagement = 6 - mean(avoidance, separation)
// and negativity = mean(domination, interactional_reactivity):
//   engagement < 3                       -> Avoidant
//   negativity >= 3.5 and compromise < 3 -> Hostile
//   negativity >= 3.5                    -> Volatile
//   otherwise                            -> Validating
ConflictStyle classify_style(const SubscaleScores& s) noexcept;

Rational engagement(const SubscaleScores& s) noexcept;
Rational negativity(const SubscaleScores& s) noexcept;

struct ItemEdit {
  std::size_t index = 0;
  int score = 0;
};

// Applies edits in order (last write wins). The result is always marked
// user_adjusted. Throws IndexOutOfBounds / ItemOutOfRange without partial
// application.
QuestionnaireResponse merge_adjustments(const QuestionnaireResponse& estimated,
                                        std::span<const ItemEdit> edits);

// Behaviors worth highlighting for a partner, derived from elevated
// subscales. Returned in taxonomy order without duplicates.
std::vector<Behavior> negative_pattern_highlights(const SubscaleScores& s);

ConflictProfile finalize_profile(const QuestionnaireResponse& resp);

struct QuestionnaireItem {
  int id = 0;
  Subscale subscale = Subscale::compromise;
  std::string prompt;
};

// Loads and checks the bundled item catalog (13 items, subscale partition
// consistent with subscale_of_item).
std::vector<QuestionnaireItem> load_questionnaire_catalog(const std::filesystem::path& file);

void to_json(nlohmann::json& j, const Rational& r);
void from_json(const nlohmann::json& j, Rational& r);
void to_json(nlohmann::json& j, Partner p);
void from_json(const nlohmann::json& j, Partner& p);
void to_json(nlohmann::json& j, ConflictStyle s);
void from_json(const nlohmann::json& j, ConflictStyle& s);
void to_json(nlohmann::json& j, const QuestionnaireResponse& r);
void from_json(const nlohmann::json& j, QuestionnaireResponse& r);
void to_json(nlohmann::json& j, const SubscaleScores& s);
void from_json(const nlohmann::json& j, SubscaleScores& s);
void to_json(nlohmann::json& j, const ConflictProfile& p);
void from_json(const nlohmann::json& j, ConflictProfile& p);

}  // namespace conflictlens
