#include "episim/schema.hpp"

#include <fmt/format.h>
#include <fstream>

#include <nlohmann/json.hpp>

#include "episim/error.hpp"

namespace episim {

using nlohmann::json;

namespace {

bool type_matches(const json& value, const std::string& type) {
  if (type == "object") return value.is_object();
  if (type == "array") return value.is_array();
  if (type == "string") return value.is_string();
  if (type == "boolean") return value.is_boolean();
  if (type == "integer") return value.is_number_integer();
  if (type == "number") return value.is_number();
  if (type == "null") return value.is_null();
  return false;
}

std::string joined_path(const std::string& base, const std::string& key) {
  return base.empty() ? key : base + "." + key;
}

void validate_node(const json& value, const json& schema, const std::string& path,
                   std::vector<Violation>& out) {
  if (!schema.is_object())
    throw Error(Error::Kind::schema_parse,
                fmt::format("schema node at '{}' is not an object", path));

  if (auto it = schema.find("type"); it != schema.end()) {
    bool ok = false;
    if (it->is_array()) {
      for (const auto& t : *it) ok = ok || type_matches(value, t.get<std::string>());
    } else {
      ok = type_matches(value, it->get<std::string>());
    }
    if (!ok) {
      out.push_back({path, "type",
                     fmt::format("expected {}, got {}", it->dump(), value.type_name())});
      return;  // remaining keywords assume the right shape
    }
  }

  if (auto it = schema.find("enum"); it != schema.end()) {
    bool ok = false;
    for (const auto& allowed : *it) ok = ok || (allowed == value);
    if (!ok)
      out.push_back({path, "enum", fmt::format("value {} not allowed", value.dump())});
  }

  if (value.is_number()) {
    const double x = value.get<double>();
    if (auto it = schema.find("minimum"); it != schema.end() && x < it->get<double>())
      out.push_back({path, "minimum",
                     fmt::format("{} is below minimum {}", x, it->get<double>())});
    if (auto it = schema.find("maximum"); it != schema.end() && x > it->get<double>())
      out.push_back({path, "maximum",
                     fmt::format("{} is above maximum {}", x, it->get<double>())});
    if (auto it = schema.find("exclusiveMinimum");
        it != schema.end() && x <= it->get<double>())
      out.push_back({path, "exclusiveMinimum",
                     fmt::format("{} must be greater than {}", x, it->get<double>())});
    if (auto it = schema.find("exclusiveMaximum");
        it != schema.end() && x >= it->get<double>())
      out.push_back({path, "exclusiveMaximum",
                     fmt::format("{} must be less than {}", x, it->get<double>())});
  }

  if (value.is_object()) {
    if (auto it = schema.find("required"); it != schema.end()) {
      for (const auto& key : *it) {
        const auto name = key.get<std::string>();
        if (!value.contains(name))
          out.push_back({joined_path(path, name), "required",
                         fmt::format("missing required key '{}'", name)});
      }
    }
    const json* properties = nullptr;
    if (auto it = schema.find("properties"); it != schema.end()) properties = &*it;
    for (const auto& [key, child] : value.items()) {
      if (properties && properties->contains(key)) {
        validate_node(child, (*properties)[key], joined_path(path, key), out);
      } else if (auto ap = schema.find("additionalProperties"); ap != schema.end()) {
        if (ap->is_boolean() && !ap->get<bool>())
          out.push_back({joined_path(path, key), "additionalProperties",
                         fmt::format("key '{}' is not allowed here", key)});
        else if (ap->is_object())
          validate_node(child, *ap, joined_path(path, key), out);
      }
    }
  }

  if (value.is_array()) {
    if (auto it = schema.find("minItems");
        it != schema.end() && value.size() < it->get<std::size_t>())
      out.push_back({path, "minItems",
                     fmt::format("needs at least {} items", it->get<std::size_t>())});
    if (auto it = schema.find("maxItems");
        it != schema.end() && value.size() > it->get<std::size_t>())
      out.push_back({path, "maxItems",
                     fmt::format("allows at most {} items", it->get<std::size_t>())});
    if (auto it = schema.find("items"); it != schema.end()) {
      for (std::size_t i = 0; i < value.size(); ++i)
        validate_node(value[i], *it, fmt::format("{}[{}]", path, i), out);
    }
  }
}

}  // namespace

ValidationReport validate_document(const json& document, const json& schema) {
  ValidationReport report;
  validate_node(document, schema, "", report.violations);
  return report;
}

json load_schema(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in)
    throw Error(Error::Kind::file_not_found,
                fmt::format("cannot open schema {}", path.string()));
  json schema;
  try {
    schema = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(Error::Kind::schema_parse,
                fmt::format("{}: {}", path.string(), e.what()));
  }
  if (!schema.is_object())
    throw Error(Error::Kind::schema_parse,
                fmt::format("{}: schema root must be an object", path.string()));
  return schema;
}

}  // namespace episim
