#include "conflictlens/behavior.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

#include "conflictlens/error.hpp"

namespace conflictlens {

namespace {

constexpr std::array<std::string_view, kLabelClassCount> kNames = {
    "none",          "criticism",    "contempt",     "defensiveness",
    "stonewalling",  "blaming_you_statement",        "sarcasm",
    "invalidation",  "mind_reading", "kitchen_sinking", "threat_ultimatum",
    "boundary_violation",
};

}  // namespace

std::string_view to_string(Behavior b) noexcept {
  return kNames[static_cast<std::size_t>(b)];
}

std::optional<Behavior> behavior_from_string(std::string_view id) noexcept {
  for (std::size_t i = 0; i < kNames.size(); ++i) {
    if (kNames[i] == id) return static_cast<Behavior>(i);
  }
  return std::nullopt;
}

BehaviorCatalog BehaviorCatalog::load(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw Error(ErrorCode::ConfigError, "cannot open behavior catalog: " + file.string());
  BehaviorCatalog catalog;
  try {
    const auto doc = nlohmann::json::parse(in);
    for (const auto& rec : doc.at("behaviors")) {
      auto id = behavior_from_string(rec.at("id").get<std::string>());
      if (!id || *id == Behavior::none) {
        throw Error(ErrorCode::ConfigError, "behavior catalog has unknown id " + rec.at("id").dump());
      }
      catalog.entries_.push_back({*id, rec.at("display_name").get<std::string>(),
                                  rec.at("definition").get<std::string>(), rec.value("example", std::string())});
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ConfigError, std::string("malformed behavior catalog: ") + e.what());
  }
  if (catalog.entries_.size() != kBehaviorCount) {
    throw Error(ErrorCode::ConfigError, "behavior catalog must list exactly 11 behaviors");
  }
  for (std::size_t i = 0; i < kBehaviorCount; ++i) {
    if (catalog.entries_[i].id != kBehaviors[i]) {
      throw Error(ErrorCode::ConfigError, "behavior catalog out of taxonomy order at entry " + std::to_string(i));
    }
  }
  return catalog;
}

std::string BehaviorCatalog::display_name(Behavior b) const {
  if (b == Behavior::none) return "None";
  for (const auto& e : entries_) {
    if (e.id == b) return e.display_name;
  }
  return std::string(to_string(b));
}

void to_json(nlohmann::json& j, Behavior b) { j = std::string(to_string(b)); }

void from_json(const nlohmann::json& j, Behavior& b) {
  if (!j.is_string()) throw Error(ErrorCode::InvalidInput, "behavior label must be a string");
  auto parsed = behavior_from_string(j.get_ref<const std::string&>());
  if (!parsed) {
    throw Error(ErrorCode::InvalidInput, "unknown behavior label: " + j.get<std::string>());
  }
  b = *parsed;
}

}  // namespace conflictlens
