#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

#include "conflictlens/gateway/schema.hpp"

using conflictlens::gateway::check_schema;
using nlohmann::json;

namespace {

const json kSchema = json::parse(R"({
  "type": "object",
  "required": ["name", "items"],
  "additionalProperties": false,
  "properties": {
    "name": {"type": "string", "minLength": 1, "maxLength": 5},
    "mood": {"type": ["string", "null"], "enum": ["calm", "tense", null]},
    "items": {"type": "array", "minItems": 2, "maxItems": 3,
              "items": {"type": "integer", "minimum": 1, "maximum": 5}}
  }
})");

}  // namespace

TEST(Schema, AcceptsConformingDocument) {
  EXPECT_FALSE(check_schema(json::parse(R"({"name":"ab","items":[1,5]})"), kSchema));
  EXPECT_FALSE(check_schema(json::parse(R"({"name":"ab","items":[1,2,3],"mood":null})"), kSchema));
  EXPECT_FALSE(check_schema(json::parse(R"({"name":"ab","items":[1,2],"mood":"calm"})"), kSchema));
}

TEST(Schema, ReportsPointerOfFirstProblem) {
  auto problem = check_schema(json::parse(R"({"name":"ab","items":[1,9]})"), kSchema);
  ASSERT_TRUE(problem);
  EXPECT_EQ(problem->rfind("/items/1", 0), 0u) << *problem;
}

TEST(Schema, EachKeywordRejects) {
  const std::vector<std::string> bad = {
      R"([])",                                         // type
      R"({"items":[1,2]})",                            // required
      R"({"name":"","items":[1,2]})",                  // minLength
      R"({"name":"abcdef","items":[1,2]})",            // maxLength
      R"({"name":"a","items":[1]})",                   // minItems
      R"({"name":"a","items":[1,2,3,4]})",             // maxItems
      R"({"name":"a","items":[0,2]})",                 // minimum
      R"({"name":"a","items":[1,2.5]})",               // integer
      R"({"name":"a","items":[1,2],"mood":"angry"})",  // enum
      R"({"name":"a","items":[1,2],"extra":1})",       // additionalProperties
      R"({"name":3,"items":[1,2]})",                   // nested type
  };
  for (const auto& doc : bad) EXPECT_TRUE(check_schema(json::parse(doc), kSchema)) << doc;
}

TEST(Schema, MultiByteStringsCountCodePoints) {
  const json schema = {{"type", "string"}, {"maxLength", 3}};
  EXPECT_FALSE(check_schema("héé", schema));
  EXPECT_TRUE(check_schema("héée", schema));
}
