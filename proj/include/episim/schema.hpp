#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace episim {

struct Violation {
  std::string path;     // dotted key path, e.g. "disease.progression[0].p"
  std::string rule;     // schema keyword that failed: required, type, minimum, ...
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const noexcept { return violations.empty(); }
};

// Validates a JSON document against a schema supporting the subset of JSON
// Schema the configuration format needs: type, required, properties,
// additionalProperties, items, enum, minimum/maximum (and exclusive forms),
// minItems/maxItems.
ValidationReport validate_document(const nlohmann::json& document,
                                   const nlohmann::json& schema);

nlohmann::json load_schema(const std::filesystem::path& path);

}  // namespace episim
