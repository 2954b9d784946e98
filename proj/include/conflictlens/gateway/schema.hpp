#pragma once

#include <optional>
#include <string>

#include <nlohmann/json.hpp>

namespace conflictlens::gateway {

// Structural validation against a JSON-Schema subset: type (string or list),
// properties, required, additionalProperties (boolean), items, minItems,
// maxItems, enum, minLength, maxLength, minimum, maximum.
//
// Returns the first violation as "<json-pointer>: <reason>", or nullopt when
// the value conforms. Unknown keywords are ignored.
std::optional<std::string> check_schema(const nlohmann::json& value, const nlohmann::json& schema);

}  // namespace conflictlens::gateway
