#include "oracles.hpp"

#include <algorithm>
#include <functional>

namespace oracle {

namespace {

constexpr std::array<std::pair<int, int>, 6> kRanges = {{{1, 3}, {4, 5}, {6, 7}, {8, 9}, {10, 11}, {12, 13}}};

const std::array<const char*, 12> kLabelNames = {
    "none",       "criticism",       "contempt",  "defensiveness",  "stonewalling",    "blaming_you_statement",
    "sarcasm",    "invalidation",    "mind_reading", "kitchen_sinking", "threat_ultimatum", "boundary_violation",
};

void walk(const nlohmann::json& j, const std::function<void(const nlohmann::json&)>& f) {
  f(j);
  if (j.is_structured()) {
    for (const auto& child : j) walk(child, f);
  }
}

}  // namespace

std::array<Mean, 6> subscale_means(const std::vector<int>& items) {
  std::array<Mean, 6> out{};
  for (std::size_t s = 0; s < kRanges.size(); ++s) {
    for (int item = kRanges[s].first; item <= kRanges[s].second; ++item) {
      out[s].sum += items.at(static_cast<std::size_t>(item - 1));
      ++out[s].count;
    }
  }
  return out;
}

bool equals(const conflictlens::Rational& r, const Mean& m) { return r.num() * m.count == m.sum * r.den(); }

ConflictStyle classify(double compromise, double avoidance, double reactivity, double separation, double domination,
                       double submission) {
  (void)submission;
  const double e = 6.0 - (avoidance + separation) / 2.0;
  const double n = (domination + reactivity) / 2.0;
  if (e < 3.0) return ConflictStyle::Avoidant;
  if (n >= 3.5 && compromise < 3.0) return ConflictStyle::Hostile;
  if (n >= 3.5) return ConflictStyle::Volatile;
  return ConflictStyle::Validating;
}

std::vector<int> last_write_wins(std::vector<int> items, const std::vector<std::pair<long, int>>& edits) {
  std::map<long, int> last;
  for (const auto& [idx, score] : edits) last[idx] = score;
  for (const auto& [idx, score] : last) items[static_cast<std::size_t>(idx)] = score;
  return items;
}

int Confusion::fp(int label) const {
  int n = 0;
  for (int g = 0; g < 12; ++g) {
    if (g != label) n += m[g][label];
  }
  return n;
}

int Confusion::fn(int label) const {
  int n = 0;
  for (int u = 0; u < 12; ++u) {
    if (u != label) n += m[label][u];
  }
  return n;
}

int Confusion::correct() const {
  int n = 0;
  for (int i = 0; i < 12; ++i) n += m[i][i];
  return n;
}

Confusion confusion(const std::vector<int>& gold, const std::vector<int>& user) {
  Confusion c;
  for (std::size_t i = 0; i < gold.size(); ++i) ++c.m[gold[i]][user[i]];
  c.total = static_cast<int>(gold.size());
  return c;
}

std::vector<int> reset_points(const conflictlens::ScriptedDialogue& d) {
  std::vector<int> out;
  for (std::size_t i = 0; i < d.turns.size(); ++i) {
    const auto& t = d.turns[i];
    if (t.speaker == conflictlens::Partner::self && static_cast<int>(t.gold_label) != 0) out.push_back(static_cast<int>(i));
  }
  return out;
}

std::vector<std::string> dialogue_violations(const conflictlens::ScriptedDialogue& d) {
  std::vector<std::string> v;
  auto blank = [](const std::string& s) { return s.find_first_not_of(" \t\r\n") == std::string::npos; };
  if (blank(d.scenario.topic)) v.push_back("blank topic");
  if (d.turns.size() != 15) v.push_back("turn count " + std::to_string(d.turns.size()));
  bool self_label = false, partner_label = false;
  for (std::size_t i = 0; i < d.turns.size(); ++i) {
    const auto& t = d.turns[i];
    if (t.index != static_cast<int>(i)) v.push_back("index mismatch at " + std::to_string(i));
    if (i > 0 && t.speaker == d.turns[i - 1].speaker) v.push_back("same speaker twice at " + std::to_string(i));
    if (blank(t.text)) v.push_back("blank text at " + std::to_string(i));
    const int label = static_cast<int>(t.gold_label);
    if (label < 0 || label > 11) v.push_back("label out of space at " + std::to_string(i));
    const bool labeled = label != 0;
    if (labeled == blank(t.gold_rationale)) v.push_back("rationale mismatch at " + std::to_string(i));
    if (labeled && t.speaker == conflictlens::Partner::self) self_label = true;
    if (labeled && t.speaker == conflictlens::Partner::partner) partner_label = true;
  }
  if (!self_label) v.push_back("self has no labeled turn");
  if (!partner_label) v.push_back("partner has no labeled turn");
  return v;
}

std::vector<std::string> gold_leaks(const nlohmann::json& response, const conflictlens::ScriptedDialogue& d,
                                    const std::set<int>& revealed) {
  std::vector<std::string> leaks;
  walk(response, [&](const nlohmann::json& node) {
    if (!node.is_object()) return;
    std::optional<int> idx;
    if (node.contains("turn_index") && node.at("turn_index").is_number_integer()) idx = node.at("turn_index").get<int>();
    if (node.contains("index") && node.at("index").is_number_integer()) idx = node.at("index").get<int>();
    if (!idx || *idx < 0 || *idx >= 15 || revealed.count(*idx)) return;
    for (const char* key : {"gold_label", "gold_rationale", "rationale"}) {
      if (node.contains(key)) leaks.push_back("turn " + std::to_string(*idx) + " exposes " + key);
    }
  });
  const auto dump = response.dump();
  for (const auto& t : d.turns) {
    if (revealed.count(t.index) || t.gold_rationale.empty()) continue;
    if (dump.find(nlohmann::json(t.gold_rationale).dump()) != std::string::npos ||
        dump.find(t.gold_rationale) != std::string::npos) {
      leaks.push_back("rationale text of turn " + std::to_string(t.index));
    }
  }
  return leaks;
}

conflictlens::ScriptedDialogue random_dialogue(std::mt19937_64& rng, double labeled) {
  conflictlens::ScriptedDialogue d;
  d.scenario = {"Topic " + std::to_string(rng() % 1000), "A disagreement about something ordinary."};
  std::bernoulli_distribution coin(labeled);
  std::uniform_int_distribution<int> label(1, 11);
  for (int i = 0; i < 15; ++i) {
    conflictlens::DialogueTurn t;
    t.index = i;
    t.speaker = i % 2 == 0 ? conflictlens::Partner::self : conflictlens::Partner::partner;
    t.text = "line " + std::to_string(i) + " " + std::to_string(rng() % 97);
    if (coin(rng)) {
      t.gold_label = static_cast<Behavior>(label(rng));
      t.gold_rationale = "because of turn " + std::to_string(i) + " #" + std::to_string(rng() % 100000);
    }
    d.turns.push_back(std::move(t));
  }
  for (int side = 0; side < 2; ++side) {
    bool any = false;
    for (int i = side; i < 15; i += 2) any = any || d.turns[i].gold_label != Behavior::none;
    if (!any) {
      auto& t = d.turns[side + 2 * static_cast<int>(rng() % 7)];
      t.gold_label = static_cast<Behavior>(label(rng));
      t.gold_rationale = "forced label on turn " + std::to_string(t.index);
    }
  }
  return d;
}

nlohmann::json dialogue_reply(const conflictlens::ScriptedDialogue& d) {
  nlohmann::json turns = nlohmann::json::array();
  for (const auto& t : d.turns) {
    nlohmann::json rec = {{"speaker", t.speaker == conflictlens::Partner::self ? "self" : "partner"},
                          {"text", t.text},
                          {"gold_label", kLabelNames[static_cast<std::size_t>(t.gold_label)]}};
    rec["gold_rationale"] = t.gold_rationale.empty() ? nlohmann::json() : nlohmann::json(t.gold_rationale);
    turns.push_back(std::move(rec));
  }
  return {{"scenario", {{"topic", d.scenario.topic}, {"description", d.scenario.description}}}, {"turns", turns}};
}

nlohmann::json fuzz_reply(std::mt19937_64& rng, const nlohmann::json& valid) {
  auto j = valid;
  auto& turns = j["turns"];
  auto pick = [&](std::size_t n) { return static_cast<std::size_t>(rng() % n); };
  switch (pick(16)) {
    case 0: break;  // untouched
    case 1: turns.erase(turns.begin() + static_cast<long>(pick(turns.size()))); break;
    case 2: turns.push_back(turns[pick(turns.size())]); break;
    case 3: turns[pick(turns.size())]["gold_label"] = "yelling"; break;
    case 4: {
      auto& t = turns[pick(turns.size())];
      t["gold_label"] = "contempt";
      t["gold_rationale"] = nullptr;
      break;
    }
    case 5: {
      auto& t = turns[pick(turns.size())];
      t["gold_label"] = "none";
      t["gold_rationale"] = "a rationale on an unlabeled turn";
      break;
    }
    case 6: turns[pick(turns.size())]["speaker"] = "narrator"; break;
    case 7: {
      const auto i = pick(turns.size() - 1);
      std::swap(turns[i], turns[i + 1]);
      turns[i]["speaker"] = turns[i + 1]["speaker"];
      break;
    }
    case 8: turns[pick(turns.size())]["text"] = "   "; break;
    case 9: turns[pick(turns.size())]["text"] = 42; break;
    case 10: j.erase("scenario"); break;
    case 11: j["turns"] = "fifteen turns"; break;
    case 12: {
      // strip every label from one side
      const std::size_t side = pick(2);
      for (std::size_t i = side; i < turns.size(); i += 2) {
        turns[i]["gold_label"] = "none";
        turns[i]["gold_rationale"] = nullptr;
      }
      break;
    }
    case 13: turns[pick(turns.size())].erase("gold_label"); break;
    case 14: {
      const auto keep = pick(turns.size());
      nlohmann::json cut = nlohmann::json::array();
      for (std::size_t i = 0; i < keep; ++i) cut.push_back(turns[i]);
      j["turns"] = cut;
      break;
    }
    default: j["scenario"]["topic"] = ""; break;
  }
  return j;
}

conflictlens::ConflictProfile profile_with_style(conflictlens::Partner p, ConflictStyle style) {
  std::vector<int> items(13, 2);
  switch (style) {
    case ConflictStyle::Avoidant:
      items = {3, 3, 3, 5, 5, 2, 2, 5, 5, 2, 2, 3, 3};
      break;
    case ConflictStyle::Validating:
      items = {4, 4, 4, 2, 2, 2, 2, 2, 2, 2, 2, 2, 2};
      break;
    case ConflictStyle::Volatile:
      items = {4, 4, 4, 2, 2, 4, 4, 2, 2, 4, 4, 2, 2};
      break;
    case ConflictStyle::Hostile:
      items = {1, 2, 2, 2, 2, 5, 5, 2, 2, 5, 5, 2, 2};
      break;
  }
  return conflictlens::finalize_profile({items, conflictlens::ResponseSource::llm_estimated, p});
}

}  // namespace oracle
