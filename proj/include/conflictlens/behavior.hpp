#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <vector>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>

#include <nlohmann/json_fwd.hpp>

namespace conflictlens {

// The negative communication behavior taxonomy. `none` is the twelfth class
// used for unlabeled turns and as a selectable annotation answer.
enum class Behavior : std::uint8_t {
  none = 0,
  criticism,
  contempt,
  defensiveness,
  stonewalling,
  blaming_you_statement,
  sarcasm,
  invalidation,
  mind_reading,
  kitchen_sinking,
  threat_ultimatum,
  boundary_violation,
};

inline constexpr std::size_t kBehaviorCount = 11;
inline constexpr std::size_t kLabelClassCount = kBehaviorCount + 1;

// The eleven non-none behaviors in catalog order.
inline constexpr std::array<Behavior, kBehaviorCount> kBehaviors = {
    Behavior::criticism,         Behavior::contempt,        Behavior::defensiveness,
    Behavior::stonewalling,      Behavior::blaming_you_statement,
    Behavior::sarcasm,           Behavior::invalidation,    Behavior::mind_reading,
    Behavior::kitchen_sinking,   Behavior::threat_ultimatum, Behavior::boundary_violation,
};

std::string_view to_string(Behavior b) noexcept;
std::optional<Behavior> behavior_from_string(std::string_view id) noexcept;

struct BehaviorInfo {
  Behavior id = Behavior::none;
  std::string display_name;
  std::string definition;
  std::string example;
};

// The bundled taxonomy file: exactly the eleven behaviors, unique ids, in
// taxonomy order.
class BehaviorCatalog {
 public:
  static BehaviorCatalog load(const std::filesystem::path& file);

  [[nodiscard]] const std::vector<BehaviorInfo>& entries() const noexcept { return entries_; }
  // "None" for Behavior::none.
  [[nodiscard]] std::string display_name(Behavior b) const;

 private:
  std::vector<BehaviorInfo> entries_;
};

void to_json(nlohmann::json& j, Behavior b);
void from_json(const nlohmann::json& j, Behavior& b);

}  // namespace conflictlens
