#include <algorithm>

#include <nlohmann/json.hpp>

#include "conflictlens/dialogue.hpp"
#include "conflictlens/error.hpp"

namespace conflictlens {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::string render_turns(std::span<const DialogueTurn> turns) {
  std::string out;
  for (const auto& t : turns) {
    out += to_string(t.speaker);
    out += ": ";
    out += t.text;
    out += '\n';
  }
  return out.empty() ? "(no earlier messages)\n" : out;
}

}  // namespace

DialogueTurn simulate_partner_turn(gateway::Gateway& gw, PracticeBranch& branch, const std::string& user_text,
                                   const ConflictProfile& partner_profile, const ScriptedDialogue& base,
                                   std::vector<LintFinding> user_findings, const PracticeOptions& options) {
  if (branch.status == BranchStatus::ended) throw Error(ErrorCode::BranchEnded, "practice branch has ended");
  if (branch.turns.size() + 2 > options.max_extension_turns) {
    throw Error(ErrorCode::BranchEnded, "practice branch reached its turn cap");
  }
  const auto text = trim(user_text);
  if (text.empty()) throw Error(ErrorCode::InvalidInput, "practice message is empty");

  const auto history = visible_history(base, branch);
  auto schema = gw.templates().get("partner_turn_v1").output_schema;
  schema["properties"]["reply"]["maxLength"] = options.max_reply_chars;

  nlohmann::json reply;
  try {
    reply = gw.invoke("partner_turn_v1",
                      {{"partner_style", std::string(to_string(partner_profile.style))},
                       {"topic", base.scenario.topic},
                       {"description", base.scenario.description},
                       {"history", render_turns(history)},
                       {"user_text", text}},
                      schema);
  } catch (const Error& e) {
    throw Error(ErrorCode::SimulationFailed, std::string("partner simulation failed: ") + e.what());
  }
  std::string partner_text;
  try {
    partner_text = trim(reply.at("reply").get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::SimulationFailed, std::string("malformed partner reply: ") + e.what());
  }
  if (partner_text.empty()) throw Error(ErrorCode::SimulationFailed, "partner reply is empty");

  const int user_index = branch.origin_turn_index + static_cast<int>(branch.turns.size());
  DialogueTurn user_turn{user_index, Partner::self, text, Behavior::none, {}};
  DialogueTurn partner_turn{user_index + 1, Partner::partner, std::move(partner_text), Behavior::none, {}};
  branch.turns.push_back(std::move(user_turn));
  branch.turns.push_back(partner_turn);
  branch.lint_findings[user_index] = std::move(user_findings);
  if (branch.turns.size() >= options.max_extension_turns) branch.status = BranchStatus::ended;
  return partner_turn;
}

std::string suggest_rewrite(gateway::Gateway& gw, const std::string& draft, std::span<const LintFinding> findings,
                            std::span<const DialogueTurn> context, const Linter& linter) {
  if (findings.empty()) throw Error(ErrorCode::InvalidInput, "rewrite needs at least one finding");
  std::string advice;
  for (const auto& f : findings) {
    if (advice.find(f.advice) != std::string::npos) continue;
    if (!advice.empty()) advice += " ";
    advice += f.advice;
  }
  const auto recent = context.size() > 4 ? context.subspan(context.size() - 4) : context;

  nlohmann::json reply;
  try {
    reply = gw.invoke("rewrite_nvc_v1", {{"draft", draft}, {"advice", advice}, {"context", render_turns(recent)}});
  } catch (const Error& e) {
    throw Error(ErrorCode::RewriteUnavailable, std::string("rewrite unavailable: ") + e.what());
  }
  std::string rewrite;
  try {
    rewrite = trim(reply.at("rewrite").get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::RewriteUnavailable, std::string("malformed rewrite: ") + e.what());
  }
  if (rewrite.empty() || !linter.lint(rewrite).empty()) {
    throw Error(ErrorCode::RewriteUnavailable, "suggested rewrite did not pass the lint gate");
  }
  return rewrite;
}

}  // namespace conflictlens
