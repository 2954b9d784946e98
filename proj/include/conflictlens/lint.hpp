#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace conflictlens {

enum class LintRule {
  ABSOLUTE_ALWAYS,
  ABSOLUTE_NEVER,
  YOU_ACCUSATION,
  IMPERATIVE_COMMAND,
  INSULT_LEXICON,
  NEGATIVE_OPENER,
  MISSING_I_LANGUAGE,
};

inline constexpr std::array<LintRule, 7> kLintRules = {
    LintRule::ABSOLUTE_ALWAYS,    LintRule::ABSOLUTE_NEVER, LintRule::YOU_ACCUSATION,
    LintRule::IMPERATIVE_COMMAND, LintRule::INSULT_LEXICON, LintRule::NEGATIVE_OPENER,
    LintRule::MISSING_I_LANGUAGE,
};

std::string_view to_string(LintRule r) noexcept;
std::optional<LintRule> lint_rule_from_string(std::string_view s) noexcept;

// Byte offsets into the UTF-8 draft, half-open.
struct TextSpan {
  std::size_t start = 0;
  std::size_t end = 0;

  friend bool operator==(const TextSpan&, const TextSpan&) = default;
};

struct LintFinding {
  LintRule rule_id = LintRule::ABSOLUTE_ALWAYS;
  TextSpan span;
  std::string advice;
  std::optional<std::string> rewrite;

  friend bool operator==(const LintFinding&, const LintFinding&) = default;
};

// Non-violent-communication lint over a draft message. Rules and lexicons
// come from a versioned data file; matching is on lower-cased word tokens
// (letters, digits, apostrophes). Clauses end at . , ; : ! ? or a newline;
// sentences end at . ! ? or a newline.
//
//   ABSOLUTE_ALWAYS / ABSOLUTE_NEVER  absolute word in a clause with a
//                                     second-person word
//   YOU_ACCUSATION      second-person subject followed within the window by
//                       a negative verb, or by a neglect verb after a negator
//   IMPERATIVE_COMMAND  sentence opens (after fillers) with an imperative verb
//   INSULT_LEXICON      any insult word
//   NEGATIVE_OPENER     within the opening window of the first clause a
//                       negation/blame word comes before any appreciation
//   MISSING_I_LANGUAGE  another rule fired and no first-person word is
//                       followed within the window by a feeling word; the
//                       span covers the whole draft
//
// Findings are sorted by span start, then rule order.
class Linter {
 public:
  static Linter load(const std::filesystem::path& file);
  static const Linter& bundled();

  [[nodiscard]] std::vector<LintFinding> lint(std::string_view draft) const;
  [[nodiscard]] const std::string& advice(LintRule rule) const;
  [[nodiscard]] nlohmann::json lexicons_json() const;

 private:
  using WordSet = std::set<std::string, std::less<>>;

  WordSet second_person_;
  WordSet second_person_subjects_;
  WordSet always_words_;
  WordSet never_words_;
  WordSet negative_verbs_;
  WordSet neglect_verbs_;
  WordSet negators_;
  WordSet imperative_verbs_;
  WordSet imperative_fillers_;
  WordSet insults_;
  WordSet opener_negatives_;
  WordSet appreciation_;
  WordSet first_person_;
  WordSet feeling_words_;
  std::size_t you_window_ = 3;
  std::size_t opener_window_ = 4;
  std::size_t feeling_window_ = 2;
  std::map<LintRule, std::string> advice_;
  std::string raw_;  // the loaded document, served read-only
};

std::vector<LintFinding> nvc_lint(std::string_view draft);

void to_json(nlohmann::json& j, const LintFinding& f);
void from_json(const nlohmann::json& j, LintFinding& f);

}  // namespace conflictlens
