#include "conflictlens/dialogue.hpp"

#include <algorithm>
#include <fstream>

#include <nlohmann/json.hpp>

#include "conflictlens/error.hpp"

namespace conflictlens {

namespace {

bool blank(std::string_view s) { return s.find_first_not_of(" \t\r\n") == std::string_view::npos; }

std::string highlight_list(const ConflictProfile& p, const BehaviorCatalog* catalog) {
  if (p.negative_pattern_highlights.empty()) return "none in particular";
  std::string out;
  for (auto b : p.negative_pattern_highlights) {
    if (!out.empty()) out += ", ";
    out += catalog ? catalog->display_name(b) : std::string(to_string(b));
  }
  return out;
}

void check_profile(const std::optional<ConflictProfile>& p, Partner role) {
  if (!p) throw Error(ErrorCode::InvalidStylePair, std::string(to_string(role)) + " profile is missing");
  if (p->partner != role) {
    throw Error(ErrorCode::InvalidStylePair, std::string(to_string(role)) + " profile has the wrong partner role");
  }
  if (p->style != classify_style(p->subscales)) {
    throw Error(ErrorCode::InvalidStylePair, std::string(to_string(role)) + " profile is not finalized");
  }
}

}  // namespace

std::optional<std::string> check_invariants(const ScriptedDialogue& d) {
  if (blank(d.scenario.topic)) return "scenario topic is empty";
  if (d.turns.size() != static_cast<std::size_t>(kDialogueTurns)) {
    return "expected 15 turns, got " + std::to_string(d.turns.size());
  }
  bool self_labeled = false;
  bool partner_labeled = false;
  for (std::size_t i = 0; i < d.turns.size(); ++i) {
    const auto& t = d.turns[i];
    const auto where = "turn " + std::to_string(i) + ": ";
    if (t.index != static_cast<int>(i)) return where + "index does not match position";
    if (i > 0 && t.speaker == d.turns[i - 1].speaker) return where + "speakers do not alternate";
    if (blank(t.text)) return where + "text is empty";
    if (t.gold_label != Behavior::none && blank(t.gold_rationale)) return where + "labeled turn has no rationale";
    if (t.gold_label == Behavior::none && !t.gold_rationale.empty()) return where + "unlabeled turn has a rationale";
    if (t.gold_label != Behavior::none) (t.speaker == Partner::self ? self_labeled : partner_labeled) = true;
  }
  if (!self_labeled) return "no labeled turn for self";
  if (!partner_labeled) return "no labeled turn for partner";
  return std::nullopt;
}

DialogueParse parse_dialogue(const nlohmann::json& reply, std::pair<ConflictStyle, ConflictStyle> styles) {
  DialogueParse out;
  try {
    if (!reply.is_object()) {
      out.problem = "reply is not an object";
      return out;
    }
    ScriptedDialogue d;
    d.style_pair = styles;
    const auto& scenario = reply.at("scenario");
    d.scenario.topic = scenario.at("topic").get<std::string>();
    d.scenario.description = scenario.at("description").get<std::string>();
    const auto& turns = reply.at("turns");
    if (!turns.is_array()) {
      out.problem = "turns is not an array";
      return out;
    }
    for (std::size_t i = 0; i < turns.size(); ++i) {
      const auto& rec = turns[i];
      DialogueTurn t;
      t.index = static_cast<int>(i);
      const auto speaker = rec.at("speaker").get<std::string>();
      if (speaker != "self" && speaker != "partner") {
        out.problem = "turn " + std::to_string(i) + ": unknown speaker '" + speaker + "'";
        return out;
      }
      t.speaker = speaker == "self" ? Partner::self : Partner::partner;
      t.text = rec.at("text").get<std::string>();
      const auto label = rec.at("gold_label").get<std::string>();
      auto parsed = behavior_from_string(label);
      if (!parsed) {
        out.problem = "turn " + std::to_string(i) + ": unknown gold label '" + label + "'";
        return out;
      }
      t.gold_label = *parsed;
      if (auto it = rec.find("gold_rationale"); it != rec.end() && !it->is_null()) {
        t.gold_rationale = it->get<std::string>();
      }
      d.turns.push_back(std::move(t));
    }
    if (auto problem = check_invariants(d)) {
      out.problem = *problem;
      return out;
    }
    out.dialogue = std::move(d);
  } catch (const std::exception& e) {
    out.problem = std::string("malformed dialogue: ") + e.what();
  }
  return out;
}

std::vector<Topic> load_topic_catalog(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw Error(ErrorCode::ConfigError, "cannot open topic catalog: " + file.string());
  std::vector<Topic> topics;
  try {
    const auto doc = nlohmann::json::parse(in);
    for (const auto& rec : doc.at("topics")) {
      topics.push_back({rec.at("id").get<std::string>(), rec.at("title").get<std::string>(),
                        rec.at("description").get<std::string>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ConfigError, std::string("malformed topic catalog: ") + e.what());
  }
  if (topics.empty()) throw Error(ErrorCode::ConfigError, "topic catalog is empty");
  return topics;
}

ScriptedDialogue generate_dialogue(gateway::Gateway& gw, const std::optional<ConflictProfile>& self,
                                   const std::optional<ConflictProfile>& partner,
                                   const std::optional<std::string>& topic, const GenerationContext& ctx) {
  check_profile(self, Partner::self);
  check_profile(partner, Partner::partner);

  std::string topic_text;
  if (topic && !blank(*topic)) {
    topic_text = *topic;
  } else if (!ctx.topics.empty()) {
    const auto& t = ctx.topics[ctx.topic_seed % ctx.topics.size()];
    topic_text = t.title + ". " + t.description;
  } else {
    topic_text = "household habits";
  }

  std::string behaviors;
  if (ctx.behaviors) {
    for (const auto& b : ctx.behaviors->entries()) {
      behaviors += "- " + std::string(to_string(b.id)) + ": " + b.definition + "\n";
    }
  } else {
    for (auto b : kBehaviors) behaviors += "- " + std::string(to_string(b)) + "\n";
  }
  behaviors += "- none: the turn shows none of the behaviors above\n";

  const gateway::Bindings bindings = {
      {"topic", topic_text},
      {"self_style", std::string(to_string(self->style))},
      {"partner_style", std::string(to_string(partner->style))},
      {"self_highlights", highlight_list(*self, ctx.behaviors)},
      {"partner_highlights", highlight_list(*partner, ctx.behaviors)},
      {"behaviors", behaviors},
  };
  const std::pair styles{self->style, partner->style};

  std::string last_problem;
  for (int attempt = 0; attempt < 2; ++attempt) {
    nlohmann::json reply;
    try {
      reply = gw.invoke("gen_dialogue_v1", bindings);
    } catch (const Error& e) {
      throw Error(ErrorCode::GenerationFailed, std::string("dialogue generation failed: ") + e.what());
    }
    auto parsed = parse_dialogue(reply, styles);
    if (parsed.dialogue) return std::move(*parsed.dialogue);
    last_problem = parsed.problem;
  }
  throw Error(ErrorCode::GenerationFailed, "generated dialogue rejected twice: " + last_problem);
}

std::vector<int> recommend_reset_points(const ScriptedDialogue& d) {
  std::vector<int> out;
  for (const auto& t : d.turns) {
    if (t.speaker == Partner::self && t.gold_label != Behavior::none) out.push_back(t.index);
  }
  return out;
}

PracticeBranch reset_branch(const ScriptedDialogue& d, int turn_index, std::string branch_id) {
  const auto points = recommend_reset_points(d);
  if (turn_index != kDialogueTurns && std::find(points.begin(), points.end(), turn_index) == points.end()) {
    throw Error(ErrorCode::InvalidResetPoint, "turn " + std::to_string(turn_index) + " is not a reset point");
  }
  PracticeBranch b;
  b.branch_id = std::move(branch_id);
  b.origin_turn_index = turn_index;
  return b;
}

std::vector<DialogueTurn> visible_history(const ScriptedDialogue& base, const PracticeBranch& branch) {
  const auto origin = static_cast<std::size_t>(std::clamp(branch.origin_turn_index, 0, kDialogueTurns));
  std::vector<DialogueTurn> out(base.turns.begin(), base.turns.begin() + std::min(origin, base.turns.size()));
  out.insert(out.end(), branch.turns.begin(), branch.turns.end());
  return out;
}

std::string_view to_string(BranchStatus s) noexcept { return s == BranchStatus::active ? "active" : "ended"; }

void to_json(nlohmann::json& j, const DialogueTurn& t) {
  j = {{"index", t.index},
       {"speaker", t.speaker},
       {"text", t.text},
       {"gold_label", t.gold_label},
       {"gold_rationale", t.gold_rationale}};
}

void from_json(const nlohmann::json& j, DialogueTurn& t) {
  t.index = j.at("index").get<int>();
  t.speaker = j.at("speaker").get<Partner>();
  t.text = j.at("text").get<std::string>();
  t.gold_label = j.at("gold_label").get<Behavior>();
  t.gold_rationale = j.at("gold_rationale").get<std::string>();
}

void to_json(nlohmann::json& j, const ScriptedDialogue& d) {
  j = {{"scenario", {{"topic", d.scenario.topic}, {"description", d.scenario.description}}},
       {"turns", d.turns},
       {"style_pair", {d.style_pair.first, d.style_pair.second}}};
}

void from_json(const nlohmann::json& j, ScriptedDialogue& d) {
  d.scenario.topic = j.at("scenario").at("topic").get<std::string>();
  d.scenario.description = j.at("scenario").at("description").get<std::string>();
  d.turns = j.at("turns").get<std::vector<DialogueTurn>>();
  d.style_pair = {j.at("style_pair").at(0).get<ConflictStyle>(), j.at("style_pair").at(1).get<ConflictStyle>()};
}

void to_json(nlohmann::json& j, const PracticeBranch& b) {
  nlohmann::json findings = nlohmann::json::object();
  for (const auto& [idx, list] : b.lint_findings) findings[std::to_string(idx)] = list;
  j = {{"branch_id", b.branch_id},
       {"origin_turn_index", b.origin_turn_index},
       {"turns", b.turns},
       {"lint_findings", findings},
       {"status", std::string(to_string(b.status))}};
}

void from_json(const nlohmann::json& j, PracticeBranch& b) {
  b.branch_id = j.at("branch_id").get<std::string>();
  b.origin_turn_index = j.at("origin_turn_index").get<int>();
  b.turns = j.at("turns").get<std::vector<DialogueTurn>>();
  b.lint_findings.clear();
  for (const auto& [key, list] : j.at("lint_findings").items()) {
    b.lint_findings[std::stoi(key)] = list.get<std::vector<LintFinding>>();
  }
  b.status = j.at("status").get<std::string>() == "active" ? BranchStatus::active : BranchStatus::ended;
}

nlohmann::json client_view(const ScriptedDialogue& d, const std::vector<bool>& revealed) {
  nlohmann::json turns = nlohmann::json::array();
  for (const auto& t : d.turns) {
    nlohmann::json view = {{"index", t.index}, {"speaker", t.speaker}, {"text", t.text}};
    const auto idx = static_cast<std::size_t>(t.index);
    if (idx < revealed.size() && revealed[idx]) {
      view["gold_label"] = t.gold_label;
      view["gold_rationale"] = t.gold_rationale;
    }
    turns.push_back(std::move(view));
  }
  return {{"scenario", {{"topic", d.scenario.topic}, {"description", d.scenario.description}}},
          {"turns", turns},
          {"style_pair", {d.style_pair.first, d.style_pair.second}}};
}

}  // namespace conflictlens
