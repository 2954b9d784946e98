#include <gtest/gtest.h>

#include <set>

#include <nlohmann/json.hpp>

#include "conflictlens/lint.hpp"
#include "harness.hpp"

using namespace conflictlens;
using nlohmann::json;

namespace {

std::set<std::string> rule_ids(const std::vector<LintFinding>& fs) {
  std::set<std::string> out;
  for (const auto& f : fs) out.emplace(to_string(f.rule_id));
  return out;
}

}  // namespace

TEST(Lint, RuleIdsRoundTrip) {
  for (auto r : kLintRules) EXPECT_EQ(lint_rule_from_string(to_string(r)), r);
  EXPECT_FALSE(lint_rule_from_string("SHOUTING"));
}

TEST(Lint, HandDerivedCorpus) {
  const auto doc = json::parse(harness::read_file(harness::fixture("lint_corpus.json")));
  ASSERT_GE(doc.at("cases").size(), 50u);
  for (const auto& c : doc.at("cases")) {
    const auto draft = c.at("draft").get<std::string>();
    const auto expected = c.at("expected").get<std::set<std::string>>();
    EXPECT_EQ(rule_ids(nvc_lint(draft)), expected) << '"' << draft << '"';
  }
}

TEST(Lint, SpansPointAtTheOffendingWords) {
  const std::string draft = "Honestly, you always forget.";
  const auto fs = nvc_lint(draft);
  bool saw_always = false;
  for (const auto& f : fs) {
    ASSERT_LE(f.span.start, f.span.end);
    ASSERT_LE(f.span.end, draft.size());
    if (f.rule_id == LintRule::ABSOLUTE_ALWAYS) {
      EXPECT_EQ(draft.substr(f.span.start, f.span.end - f.span.start), "always");
      saw_always = true;
    }
    if (f.rule_id == LintRule::MISSING_I_LANGUAGE) {
      EXPECT_EQ(f.span, (TextSpan{0, draft.size()}));
    }
    EXPECT_FALSE(f.advice.empty());
  }
  EXPECT_TRUE(saw_always);
}

TEST(Lint, FindingsAreSortedAndDeterministic) {
  const std::string draft = "Stop it. You never help, you idiot. You always whine.";
  const auto a = nvc_lint(draft);
  EXPECT_EQ(a, nvc_lint(draft));
  ASSERT_FALSE(a.empty());
  for (std::size_t i = 1; i < a.size(); ++i) {
    const auto& p = a[i - 1];
    const auto& q = a[i];
    EXPECT_TRUE(p.span.start < q.span.start ||
                (p.span.start == q.span.start && static_cast<int>(p.rule_id) <= static_cast<int>(q.rule_id)));
  }
}

TEST(Lint, CleanDraftsHaveNoFindings) {
  for (const char* s : {"", "   ", "I feel worried when plans change last minute.", "Thanks for listening."}) {
    EXPECT_TRUE(nvc_lint(s).empty()) << s;
  }
}

TEST(Lint, CaseInsensitive) {
  EXPECT_EQ(rule_ids(nvc_lint("YOU NEVER LISTEN.")), rule_ids(nvc_lint("you never listen.")));
}

TEST(Lint, FindingJsonRoundTrip) {
  for (const auto& f : nvc_lint("You always ignore me.")) {
    const json j = f;
    EXPECT_EQ(j.at("rule_id"), std::string(to_string(f.rule_id)));
    EXPECT_EQ(j.get<LintFinding>(), f);
  }
}

TEST(Lint, LexiconsAreServedVerbatim) {
  const auto lex = Linter::bundled().lexicons_json();
  EXPECT_TRUE(lex.is_object());
  EXPECT_EQ(lex, json::parse(harness::read_file(std::filesystem::path(CONFLICTLENS_DATA_DIR) / "lint_lexicons.json")));
}
