#include "conflictlens/gateway/schema.hpp"

#include <algorithm>

namespace conflictlens::gateway {

namespace {

using nlohmann::json;

bool matches_type(const json& value, const std::string& type) {
  if (type == "object") return value.is_object();
  if (type == "array") return value.is_array();
  if (type == "string") return value.is_string();
  if (type == "integer") return value.is_number_integer();
  if (type == "number") return value.is_number();
  if (type == "boolean") return value.is_boolean();
  if (type == "null") return value.is_null();
  return false;
}

std::optional<std::string> fail(const std::string& path, const std::string& reason) {
  return (path.empty() ? std::string("/") : path) + ": " + reason;
}

std::optional<std::string> check(const json& value, const json& schema, const std::string& path) {
  if (!schema.is_object()) return std::nullopt;

  if (auto t = schema.find("type"); t != schema.end()) {
    bool ok = false;
    if (t->is_string()) {
      ok = matches_type(value, t->get<std::string>());
    } else if (t->is_array()) {
      ok = std::any_of(t->begin(), t->end(),
                       [&](const json& alt) { return alt.is_string() && matches_type(value, alt.get<std::string>()); });
    }
    if (!ok) return fail(path, "expected type " + t->dump() + ", got " + value.type_name());
  }

  if (auto e = schema.find("enum"); e != schema.end() && e->is_array()) {
    if (std::find(e->begin(), e->end(), value) == e->end()) {
      return fail(path, "value " + value.dump() + " not in " + e->dump());
    }
  }

  if (value.is_string()) {
    // Lengths are in code points, not bytes.
    const auto& str = value.get_ref<const std::string&>();
    const auto len = static_cast<std::size_t>(
        std::count_if(str.begin(), str.end(), [](char c) { return (static_cast<unsigned char>(c) & 0xC0) != 0x80; }));
    if (auto m = schema.find("minLength"); m != schema.end() && len < m->get<std::size_t>()) {
      return fail(path, "string shorter than " + m->dump());
    }
    if (auto m = schema.find("maxLength"); m != schema.end() && len > m->get<std::size_t>()) {
      return fail(path, "string longer than " + m->dump());
    }
  }

  if (value.is_number()) {
    const double v = value.get<double>();
    if (auto m = schema.find("minimum"); m != schema.end() && v < m->get<double>()) {
      return fail(path, "below minimum " + m->dump());
    }
    if (auto m = schema.find("maximum"); m != schema.end() && v > m->get<double>()) {
      return fail(path, "above maximum " + m->dump());
    }
  }

  if (value.is_array()) {
    if (auto m = schema.find("minItems"); m != schema.end() && value.size() < m->get<std::size_t>()) {
      return fail(path, "fewer than " + m->dump() + " items");
    }
    if (auto m = schema.find("maxItems"); m != schema.end() && value.size() > m->get<std::size_t>()) {
      return fail(path, "more than " + m->dump() + " items");
    }
    if (auto items = schema.find("items"); items != schema.end()) {
      for (std::size_t i = 0; i < value.size(); ++i) {
        if (auto err = check(value[i], *items, path + "/" + std::to_string(i))) return err;
      }
    }
  }

  if (value.is_object()) {
    if (auto req = schema.find("required"); req != schema.end() && req->is_array()) {
      for (const auto& key : *req) {
        if (!value.contains(key.get<std::string>())) {
          return fail(path, "missing required property '" + key.get<std::string>() + "'");
        }
      }
    }
    const auto props = schema.find("properties");
    if (props != schema.end() && props->is_object()) {
      for (const auto& [key, sub] : props->items()) {
        if (auto it = value.find(key); it != value.end()) {
          if (auto err = check(*it, sub, path + "/" + key)) return err;
        }
      }
    }
    if (auto extra = schema.find("additionalProperties");
        extra != schema.end() && extra->is_boolean() && !extra->get<bool>()) {
      for (const auto& [key, unused] : value.items()) {
        if (props == schema.end() || !props->contains(key)) {
          return fail(path, "unexpected property '" + key + "'");
        }
      }
    }
  }

  return std::nullopt;
}

}  // namespace

std::optional<std::string> check_schema(const nlohmann::json& value, const nlohmann::json& schema) {
  return check(value, schema, "");
}

}  // namespace conflictlens::gateway
