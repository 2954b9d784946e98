#include <gtest/gtest.h>

#include <set>

#include <nlohmann/json.hpp>

#include "conflictlens/behavior.hpp"
#include "conflictlens/error.hpp"

using namespace conflictlens;

TEST(Behavior, TwelveClassSpace) {
  EXPECT_EQ(kBehaviorCount, 11u);
  EXPECT_EQ(kLabelClassCount, 12u);
  std::set<std::string_view> names;
  for (auto b : kBehaviors) {
    ASSERT_NE(b, Behavior::none);
    names.insert(to_string(b));
    EXPECT_EQ(behavior_from_string(to_string(b)), b);
  }
  EXPECT_EQ(names.size(), 11u);
  EXPECT_EQ(behavior_from_string("none"), Behavior::none);
  EXPECT_FALSE(behavior_from_string("yelling"));
  EXPECT_FALSE(behavior_from_string("Criticism"));
}

TEST(Behavior, CatalogMatchesTaxonomyOrder) {
  const auto catalog = BehaviorCatalog::load(std::filesystem::path(CONFLICTLENS_DATA_DIR) / "behaviors.json");
  ASSERT_EQ(catalog.entries().size(), 11u);
  for (std::size_t i = 0; i < kBehaviors.size(); ++i) {
    const auto& e = catalog.entries()[i];
    EXPECT_EQ(e.id, kBehaviors[i]);
    EXPECT_FALSE(e.display_name.empty());
    EXPECT_FALSE(e.definition.empty());
  }
  EXPECT_EQ(catalog.display_name(Behavior::none), "None");
  EXPECT_EQ(catalog.display_name(Behavior::criticism), catalog.entries()[0].display_name);
}

TEST(Behavior, JsonRejectsUnknownLabels) {
  EXPECT_EQ(nlohmann::json(Behavior::mind_reading), "mind_reading");
  EXPECT_EQ(nlohmann::json("sarcasm").get<Behavior>(), Behavior::sarcasm);
  EXPECT_THROW(nlohmann::json("shouting").get<Behavior>(), Error);
}
