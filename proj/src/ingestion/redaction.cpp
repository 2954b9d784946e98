#include "conflictlens/redaction.hpp"

#include <algorithm>
#include <fstream>

#include <nlohmann/json.hpp>

#include "conflictlens/error.hpp"

namespace conflictlens {

namespace {

PatternId pattern_from_string(std::string_view s) {
  for (auto id : {PatternId::EMAIL, PatternId::PHONE, PatternId::URL, PatternId::HANDLE,
                  PatternId::PROPER_NAME_HINT}) {
    if (to_string(id) == s) return id;
  }
  throw Error(ErrorCode::ConfigError, "unknown redaction pattern id: " + std::string(s));
}

std::string escape_regex(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (std::string_view("\\^$.|?*+()[]{}").find(c) != std::string_view::npos) out += '\\';
    out += c;
  }
  return out;
}

}  // namespace

std::string_view to_string(PatternId id) noexcept {
  switch (id) {
    case PatternId::EMAIL: return "EMAIL";
    case PatternId::PHONE: return "PHONE";
    case PatternId::URL: return "URL";
    case PatternId::HANDLE: return "HANDLE";
    case PatternId::PROPER_NAME_HINT: return "PROPER_NAME_HINT";
  }
  return "EMAIL";
}

int RedactionReport::count(PatternId id) const noexcept {
  for (const auto& r : replacements) {
    if (r.pattern_id == id) return r.count;
  }
  return 0;
}

void RedactionReport::add(PatternId id, int n) {
  if (n <= 0) return;
  for (auto& r : replacements) {
    if (r.pattern_id == id) {
      r.count += n;
      return;
    }
  }
  replacements.push_back({id, n});
}

void RedactionReport::merge(const RedactionReport& other) {
  for (const auto& r : other.replacements) add(r.pattern_id, r.count);
}

Redactor Redactor::load(const std::filesystem::path& file, RedactionOptions options) {
  std::ifstream in(file);
  if (!in) throw Error(ErrorCode::ConfigError, "cannot open redaction table: " + file.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::ConfigError, "redaction table is not valid JSON: " + std::string(e.what()));
  }
  Redactor r;
  for (const auto& rec : doc.at("patterns")) {
    try {
      r.rules_.push_back({pattern_from_string(rec.at("id").get<std::string>()),
                          std::regex(rec.at("regex").get<std::string>(), std::regex::ECMAScript),
                          rec.at("replacement").get<std::string>()});
    } catch (const std::regex_error& e) {
      throw Error(ErrorCode::ConfigError, "bad redaction regex: " + std::string(e.what()));
    }
  }
  if (options.proper_names && !options.name_hints.empty()) {
    std::string alternation;
    for (const auto& name : options.name_hints) {
      if (name.empty()) continue;
      if (!alternation.empty()) alternation += '|';
      alternation += escape_regex(name);
    }
    const auto replacement = doc.at("proper_name_hint").value("replacement", std::string("[NAME]"));
    if (!alternation.empty()) {
      r.rules_.push_back({PatternId::PROPER_NAME_HINT, std::regex("\\b(" + alternation + ")\\b"), replacement});
    }
  }
  return r;
}

const Redactor& Redactor::bundled() {
  static const Redactor instance =
      Redactor::load(std::filesystem::path(CONFLICTLENS_DATA_DIR) / "redaction_patterns.json");
  return instance;
}

std::pair<std::string, int> Redactor::apply(std::string_view text, PatternId id) const {
  std::string current(text);
  int total = 0;
  for (const auto& rule : rules_) {
    if (rule.id != id) continue;
    std::string out;
    int n = 0;
    auto last = current.cbegin();
    for (std::sregex_iterator it(current.cbegin(), current.cend(), rule.pattern), end; it != end; ++it) {
      const auto& m = *it;
      out.append(last, m[0].first);
      out += m.format(rule.replacement);
      last = m[0].second;
      ++n;
    }
    out.append(last, current.cend());
    current = std::move(out);
    total += n;
  }
  return {std::move(current), total};
}

std::pair<std::string, RedactionReport> Redactor::redact(std::string_view text) const {
  std::string current(text);
  RedactionReport report;
  const auto order = pattern_order();
  // Placeholders never match, so this converges; the cap only guards
  // against a bad table.
  for (int pass = 0; pass < 16; ++pass) {
    int fired = 0;
    for (auto id : order) {
      auto [next, n] = apply(current, id);
      current = std::move(next);
      report.add(id, n);
      fired += n;
    }
    if (fired == 0) break;
  }
  return {std::move(current), std::move(report)};
}

bool Redactor::matches_any(std::string_view text) const {
  const std::string s(text);
  return std::any_of(rules_.begin(), rules_.end(),
                     [&](const Rule& rule) { return std::regex_search(s, rule.pattern); });
}

std::vector<PatternId> Redactor::pattern_order() const {
  std::vector<PatternId> order;
  for (const auto& rule : rules_) {
    if (std::find(order.begin(), order.end(), rule.id) == order.end()) order.push_back(rule.id);
  }
  return order;
}

std::pair<std::string, RedactionReport> redact(std::string_view text) {
  return Redactor::bundled().redact(text);
}

void to_json(nlohmann::json& j, const RedactionReport& r) {
  j = nlohmann::json::array();
  for (const auto& c : r.replacements) {
    j.push_back({{"pattern_id", std::string(to_string(c.pattern_id))}, {"count", c.count}});
  }
}

void from_json(const nlohmann::json& j, RedactionReport& r) {
  r.replacements.clear();
  for (const auto& c : j) r.add(pattern_from_string(c.at("pattern_id").get<std::string>()), c.at("count").get<int>());
}

}  // namespace conflictlens
