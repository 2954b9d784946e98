#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "conflictlens/behavior.hpp"
#include "conflictlens/conflict_model.hpp"
#include "conflictlens/gateway/gateway.hpp"
#include "conflictlens/lint.hpp"

namespace conflictlens {

inline constexpr int kDialogueTurns = 15;

struct DialogueTurn {
  int index = 0;
  Partner speaker = Partner::self;
  std::string text;
  Behavior gold_label = Behavior::none;
  std::string gold_rationale;  // non-empty iff gold_label != none

  friend bool operator==(const DialogueTurn&, const DialogueTurn&) = default;
};

struct Scenario {
  std::string topic;
  std::string description;

  friend bool operator==(const Scenario&, const Scenario&) = default;
};

struct ScriptedDialogue {
  Scenario scenario;
  std::vector<DialogueTurn> turns;
  std::pair<ConflictStyle, ConflictStyle> style_pair{ConflictStyle::Validating, ConflictStyle::Validating};

  friend bool operator==(const ScriptedDialogue&, const ScriptedDialogue&) = default;
};

// First violated invariant, or nullopt: 15 turns, index == position,
// alternating speakers, non-blank text, rationale iff labeled, and at least
// one labeled turn per speaker.
std::optional<std::string> check_invariants(const ScriptedDialogue& d);

struct DialogueParse {
  std::optional<ScriptedDialogue> dialogue;
  std::string problem;
};

// Converts a provider reply into a dialogue without ever throwing; any
// structural problem or invariant violation is reported in `problem`.
DialogueParse parse_dialogue(const nlohmann::json& reply, std::pair<ConflictStyle, ConflictStyle> styles);

struct Topic {
  std::string id;
  std::string title;
  std::string description;
};

std::vector<Topic> load_topic_catalog(const std::filesystem::path& file);

struct GenerationContext {
  const BehaviorCatalog* behaviors = nullptr;
  std::span<const Topic> topics;
  std::uint64_t topic_seed = 0;  // picks the default topic when none is given
};

// gen_dialogue_v1 conditioned on both styles. A reply that violates the
// dialogue invariants is regenerated once.
//
// Throws InvalidStylePair when either profile is missing, has the wrong
// partner role, or is not finalized; GenerationFailed otherwise.
ScriptedDialogue generate_dialogue(gateway::Gateway& gw, const std::optional<ConflictProfile>& self,
                                   const std::optional<ConflictProfile>& partner,
                                   const std::optional<std::string>& topic, const GenerationContext& ctx);

// Indices of self turns carrying a gold label, ascending. The first entry is
// the primary recommendation.
std::vector<int> recommend_reset_points(const ScriptedDialogue& d);

enum class BranchStatus { active, ended };

struct PracticeBranch {
  std::string branch_id;
  int origin_turn_index = kDialogueTurns;
  std::vector<DialogueTurn> turns;  // extension only, never gold-labeled
  std::map<int, std::vector<LintFinding>> lint_findings;
  BranchStatus status = BranchStatus::active;

  friend bool operator==(const PracticeBranch&, const PracticeBranch&) = default;
};

// Throws InvalidResetPoint unless turn_index is a recommended reset point or
// kDialogueTurns (continue from the end).
PracticeBranch reset_branch(const ScriptedDialogue& d, int turn_index, std::string branch_id);

// Base turns before the origin followed by the branch extension.
std::vector<DialogueTurn> visible_history(const ScriptedDialogue& base, const PracticeBranch& branch);

struct PracticeOptions {
  std::size_t max_extension_turns = 30;
  std::size_t max_reply_chars = 600;
};

// Appends the user turn (with its lint findings) and a simulated partner
// reply from partner_turn_v1. The branch is unchanged on any error. Once the
// extension reaches the cap the branch is ended.
//
// Throws InvalidInput (blank text), BranchEnded or SimulationFailed.
DialogueTurn simulate_partner_turn(gateway::Gateway& gw, PracticeBranch& branch, const std::string& user_text,
                                   const ConflictProfile& partner_profile, const ScriptedDialogue& base,
                                   std::vector<LintFinding> user_findings, const PracticeOptions& options = {});

// rewrite_nvc_v1 for a draft with findings. The rewrite is only returned if
// it lints clean with `linter`. Throws RewriteUnavailable otherwise, and
// InvalidInput when findings is empty.
std::string suggest_rewrite(gateway::Gateway& gw, const std::string& draft, std::span<const LintFinding> findings,
                            std::span<const DialogueTurn> context, const Linter& linter = Linter::bundled());

std::string_view to_string(BranchStatus s) noexcept;

void to_json(nlohmann::json& j, const DialogueTurn& t);
void from_json(const nlohmann::json& j, DialogueTurn& t);
void to_json(nlohmann::json& j, const ScriptedDialogue& d);
void from_json(const nlohmann::json& j, ScriptedDialogue& d);
void to_json(nlohmann::json& j, const PracticeBranch& b);
void from_json(const nlohmann::json& j, PracticeBranch& b);

// Dialogue view with gold data only for turns in `revealed`.
nlohmann::json client_view(const ScriptedDialogue& d, const std::vector<bool>& revealed);

}  // namespace conflictlens
