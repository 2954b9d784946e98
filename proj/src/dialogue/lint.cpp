#include "conflictlens/lint.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>

#include <nlohmann/json.hpp>

#include "conflictlens/error.hpp"

namespace conflictlens {

namespace {

struct Token {
  std::size_t start;
  std::size_t end;
  std::string lower;
  std::size_t clause;
  std::size_t sentence;
};

bool is_word_byte(unsigned char c) { return std::isalnum(c) != 0 || c == '\''; }

// U+2019 RIGHT SINGLE QUOTATION MARK, the usual phone-keyboard apostrophe.
bool is_curly_apostrophe(std::string_view s, std::size_t i) {
  return i + 2 < s.size() && static_cast<unsigned char>(s[i]) == 0xE2 &&
         static_cast<unsigned char>(s[i + 1]) == 0x80 && static_cast<unsigned char>(s[i + 2]) == 0x99;
}

std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> tokens;
  std::size_t clause = 0;
  std::size_t sentence = 0;
  bool clause_break = false;
  bool sentence_break = false;
  std::size_t i = 0;
  while (i < text.size()) {
    const auto c = static_cast<unsigned char>(text[i]);
    if (is_word_byte(c) || is_curly_apostrophe(text, i)) {
      std::size_t start = i;
      std::string lower;
      while (i < text.size()) {
        const auto d = static_cast<unsigned char>(text[i]);
        if (is_curly_apostrophe(text, i)) {
          lower += '\'';
          i += 3;
        } else if (is_word_byte(d)) {
          lower += static_cast<char>(std::tolower(d));
          ++i;
        } else {
          break;
        }
      }
      std::size_t end = i;
      // Quotes around a word are not part of it.
      while (!lower.empty() && lower.front() == '\'') {
        lower.erase(0, 1);
        start += is_curly_apostrophe(text, start) ? 3 : 1;
      }
      while (!lower.empty() && lower.back() == '\'') {
        lower.pop_back();
        end -= (end >= 3 && is_curly_apostrophe(text, end - 3)) ? 3 : 1;
      }
      if (lower.empty()) continue;
      if (!tokens.empty()) {
        if (clause_break) ++clause;
        if (sentence_break) ++sentence;
      }
      clause_break = sentence_break = false;
      tokens.push_back({start, end, std::move(lower), clause, sentence});
      continue;
    }
    switch (c) {
      case '.': case '!': case '?': case '\n':
        sentence_break = true;
        clause_break = true;
        break;
      case ',': case ';': case ':':
        clause_break = true;
        break;
      default:
        break;
    }
    ++i;
  }
  return tokens;
}

std::set<std::string, std::less<>> word_set(const nlohmann::json& lexicons, const char* key) {
  std::set<std::string, std::less<>> out;
  for (const auto& w : lexicons.at(key)) out.insert(w.get<std::string>());
  return out;
}

}  // namespace

std::string_view to_string(LintRule r) noexcept {
  switch (r) {
    case LintRule::ABSOLUTE_ALWAYS: return "ABSOLUTE_ALWAYS";
    case LintRule::ABSOLUTE_NEVER: return "ABSOLUTE_NEVER";
    case LintRule::YOU_ACCUSATION: return "YOU_ACCUSATION";
    case LintRule::IMPERATIVE_COMMAND: return "IMPERATIVE_COMMAND";
    case LintRule::INSULT_LEXICON: return "INSULT_LEXICON";
    case LintRule::NEGATIVE_OPENER: return "NEGATIVE_OPENER";
    case LintRule::MISSING_I_LANGUAGE: return "MISSING_I_LANGUAGE";
  }
  return "ABSOLUTE_ALWAYS";
}

std::optional<LintRule> lint_rule_from_string(std::string_view s) noexcept {
  for (auto r : kLintRules) {
    if (to_string(r) == s) return r;
  }
  return std::nullopt;
}

Linter Linter::load(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw Error(ErrorCode::ConfigError, "cannot open lint lexicons: " + file.string());
  Linter l;
  try {
    const auto doc = nlohmann::json::parse(in);
    const auto& lex = doc.at("lexicons");
    l.second_person_ = word_set(lex, "second_person");
    l.second_person_subjects_ = word_set(lex, "second_person_subjects");
    l.always_words_ = word_set(lex, "always_words");
    l.never_words_ = word_set(lex, "never_words");
    l.negative_verbs_ = word_set(lex, "negative_verbs");
    l.neglect_verbs_ = word_set(lex, "neglect_verbs");
    l.negators_ = word_set(lex, "negators");
    l.imperative_verbs_ = word_set(lex, "imperative_verbs");
    l.imperative_fillers_ = word_set(lex, "imperative_fillers");
    l.insults_ = word_set(lex, "insults");
    l.opener_negatives_ = word_set(lex, "opener_negatives");
    l.appreciation_ = word_set(lex, "appreciation");
    l.first_person_ = word_set(lex, "first_person");
    l.feeling_words_ = word_set(lex, "feeling_words");
    const auto& windows = doc.at("windows");
    l.you_window_ = windows.at("you_accusation").get<std::size_t>();
    l.opener_window_ = windows.at("negative_opener").get<std::size_t>();
    l.feeling_window_ = windows.at("feeling_construction").get<std::size_t>();
    for (auto rule : kLintRules) {
      l.advice_[rule] = doc.at("advice").at(std::string(to_string(rule))).get<std::string>();
    }
    l.raw_ = doc.dump();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ConfigError, std::string("malformed lint lexicons: ") + e.what());
  }
  return l;
}

const Linter& Linter::bundled() {
  static const Linter instance = Linter::load(std::filesystem::path(CONFLICTLENS_DATA_DIR) / "lint_lexicons.json");
  return instance;
}

const std::string& Linter::advice(LintRule rule) const { return advice_.at(rule); }

nlohmann::json Linter::lexicons_json() const { return nlohmann::json::parse(raw_); }

std::vector<LintFinding> Linter::lint(std::string_view draft) const {
  const auto tokens = tokenize(draft);
  std::vector<LintFinding> findings;
  auto add = [&](LintRule rule, std::size_t start, std::size_t end) {
    findings.push_back({rule, {start, end}, advice_.at(rule), std::nullopt});
  };
  auto in = [](const WordSet& set, const std::string& w) { return set.count(w) != 0; };
  auto clause_has_second_person = [&](std::size_t clause) {
    return std::any_of(tokens.begin(), tokens.end(),
                       [&](const Token& t) { return t.clause == clause && in(second_person_, t.lower); });
  };

  for (const auto& t : tokens) {
    if (in(always_words_, t.lower) && clause_has_second_person(t.clause)) {
      add(LintRule::ABSOLUTE_ALWAYS, t.start, t.end);
    }
    if (in(never_words_, t.lower) && clause_has_second_person(t.clause)) {
      add(LintRule::ABSOLUTE_NEVER, t.start, t.end);
    }
  }

  std::size_t accusation_end = 0;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const auto& you = tokens[i];
    if (!in(second_person_subjects_, you.lower) || you.start < accusation_end) continue;
    bool negated = false;
    for (std::size_t k = i + 1; k < tokens.size() && k <= i + you_window_; ++k) {
      const auto& w = tokens[k];
      if (w.clause != you.clause) break;
      if (in(negative_verbs_, w.lower) || (negated && in(neglect_verbs_, w.lower))) {
        add(LintRule::YOU_ACCUSATION, you.start, w.end);
        accusation_end = w.end;
        break;
      }
      if (in(negators_, w.lower)) negated = true;
    }
  }

  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i > 0 && tokens[i - 1].sentence == tokens[i].sentence) continue;
    std::size_t k = i;
    while (k < tokens.size() && tokens[k].sentence == tokens[i].sentence && in(imperative_fillers_, tokens[k].lower)) ++k;
    if (k < tokens.size() && tokens[k].sentence == tokens[i].sentence && in(imperative_verbs_, tokens[k].lower)) {
      add(LintRule::IMPERATIVE_COMMAND, tokens[k].start, tokens[k].end);
    }
  }

  for (const auto& t : tokens) {
    if (in(insults_, t.lower)) add(LintRule::INSULT_LEXICON, t.start, t.end);
  }

  for (std::size_t i = 0; i < tokens.size() && i < opener_window_ && tokens[i].clause == 0; ++i) {
    if (in(appreciation_, tokens[i].lower)) break;
    if (in(opener_negatives_, tokens[i].lower)) {
      add(LintRule::NEGATIVE_OPENER, tokens[i].start, tokens[i].end);
      break;
    }
  }

  if (!findings.empty()) {
    bool has_feeling = false;
    for (std::size_t i = 0; i < tokens.size() && !has_feeling; ++i) {
      if (!in(first_person_, tokens[i].lower)) continue;
      for (std::size_t k = i + 1; k < tokens.size() && k <= i + feeling_window_; ++k) {
        if (in(feeling_words_, tokens[k].lower)) {
          has_feeling = true;
          break;
        }
      }
    }
    if (!has_feeling) add(LintRule::MISSING_I_LANGUAGE, 0, draft.size());
  }

  std::stable_sort(findings.begin(), findings.end(), [](const LintFinding& a, const LintFinding& b) {
    if (a.span.start != b.span.start) return a.span.start < b.span.start;
    return static_cast<int>(a.rule_id) < static_cast<int>(b.rule_id);
  });
  return findings;
}

std::vector<LintFinding> nvc_lint(std::string_view draft) { return Linter::bundled().lint(draft); }

void to_json(nlohmann::json& j, const LintFinding& f) {
  j = {{"rule_id", std::string(to_string(f.rule_id))},
       {"span", {{"start", f.span.start}, {"end", f.span.end}}},
       {"advice", f.advice},
       {"rewrite", f.rewrite ? nlohmann::json(*f.rewrite) : nlohmann::json()}};
}

void from_json(const nlohmann::json& j, LintFinding& f) {
  auto rule = lint_rule_from_string(j.at("rule_id").get<std::string>());
  if (!rule) throw Error(ErrorCode::InvalidInput, "unknown lint rule " + j.at("rule_id").dump());
  f.rule_id = *rule;
  f.span = {j.at("span").at("start").get<std::size_t>(), j.at("span").at("end").get<std::size_t>()};
  f.advice = j.at("advice").get<std::string>();
  if (j.contains("rewrite") && j.at("rewrite").is_string()) {
    f.rewrite = j.at("rewrite").get<std::string>();
  } else {
    f.rewrite.reset();
  }
}

}  // namespace conflictlens
