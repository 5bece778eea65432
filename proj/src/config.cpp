#include "episim/config.hpp"

#include <fmt/format.h>
#include <fstream>
#include <set>
#include <sstream>

#include "episim/error.hpp"

namespace episim {

using nlohmann::json;

namespace {

// Keys this build understands; everything else lands in legacy_keys.
const std::set<std::string> kRecognizedKeys = {
    "person_file", "visit_file", "location_weight_file", "output_directory",
    "behavior_model", "num_workers", "iterations", "initial_exposed", "tau",
    "contact_probability", "seed", "mask_inf_scale", "mask_susc_scale",
    "distancing_inf_scale", "distancing_susc_scale", "write_local_observables",
    "disease"};

[[noreturn]] void bad_key(const std::string& key, const std::string& why) {
  throw Error(Error::Kind::validation, fmt::format("{}: {}", key, why));
}

double require_number(const json& doc, const std::string& key, double fallback) {
  auto it = doc.find(key);
  if (it == doc.end()) return fallback;
  if (!it->is_number()) bad_key(key, "must be a number");
  return it->get<double>();
}

std::int64_t require_integer(const json& doc, const std::string& key,
                             std::int64_t fallback) {
  auto it = doc.find(key);
  if (it == doc.end()) return fallback;
  if (!it->is_number_integer()) bad_key(key, "must be an integer");
  return it->get<std::int64_t>();
}

std::string require_string(const json& doc, const std::string& key,
                           const std::string& fallback) {
  auto it = doc.find(key);
  if (it == doc.end()) return fallback;
  if (!it->is_string()) bad_key(key, "must be a string");
  return it->get<std::string>();
}

double require_unit_interval(const json& doc, const std::string& key, double fallback) {
  const double v = require_number(doc, key, fallback);
  if (v < 0.0 || v > 1.0) bad_key(key, "must be in [0, 1]");
  return v;
}

HealthState parse_state(const json& value, const std::string& key) {
  if (!value.is_string()) bad_key(key, "health state must be a string");
  auto s = state_from_name(value.get<std::string>());
  if (!s) bad_key(key, fmt::format("unknown health state '{}'", value.get<std::string>()));
  return *s;
}

std::array<double, kNumHealthStates> parse_state_map(
    const json& value, const std::string& key,
    std::array<double, kNumHealthStates> defaults) {
  if (!value.is_object()) bad_key(key, "must map health states to numbers");
  auto out = defaults;
  for (const auto& [name, number] : value.items()) {
    auto s = state_from_name(name);
    if (!s) bad_key(key, fmt::format("unknown health state '{}'", name));
    if (!number.is_number() || number.get<double>() < 0.0)
      bad_key(key + "." + name, "must be a number >= 0");
    out[static_cast<std::size_t>(*s)] = number.get<double>();
  }
  return out;
}

DwellSpec parse_dwell(const json& value, const std::string& key) {
  if (!value.is_object()) bad_key(key, "must be an object");
  DwellSpec dwell;
  const std::string kind = require_string(value, "kind", "");
  if (kind == "fixed") {
    dwell.kind = DwellSpec::Kind::fixed;
    dwell.days = require_number(value, "days", -1.0);
    if (dwell.days < 0.0) bad_key(key + ".days", "must be >= 0");
  } else if (kind == "discretized-gamma") {
    dwell.kind = DwellSpec::Kind::discretized_gamma;
    dwell.shape = require_number(value, "shape", 0.0);
    dwell.scale = require_number(value, "scale", 0.0);
    if (dwell.shape <= 0.0) bad_key(key + ".shape", "must be > 0");
    if (dwell.scale <= 0.0) bad_key(key + ".scale", "must be > 0");
  } else {
    bad_key(key + ".kind", "must be 'fixed' or 'discretized-gamma'");
  }
  return dwell;
}

DiseaseModelConfig parse_disease(const json& value) {
  DiseaseModelConfig out;
  if (!value.is_object()) bad_key("disease", "must be an object");
  if (auto it = value.find("iota"); it != value.end())
    out.infectivity = parse_state_map(*it, "disease.iota", out.infectivity);
  if (auto it = value.find("sigma"); it != value.end())
    out.susceptibility = parse_state_map(*it, "disease.sigma", out.susceptibility);
  if (auto it = value.find("transmission_configurations"); it != value.end()) {
    if (!it->is_array()) bad_key("disease.transmission_configurations", "must be an array");
    out.configurations.clear();
    std::size_t i = 0;
    for (const auto& item : *it) {
      const std::string key = fmt::format("disease.transmission_configurations[{}]", i++);
      if (!item.is_object()) bad_key(key, "must be an object");
      TransmissionConfiguration cfg;
      cfg.entry = parse_state(item.value("entry", json()), key + ".entry");
      cfg.exit = parse_state(item.value("exit", json()), key + ".exit");
      cfg.contact = parse_state(item.value("contact", json()), key + ".contact");
      cfg.weight = require_number(item, "weight", 1.0);
      if (cfg.weight < 0.0) bad_key(key + ".weight", "must be >= 0");
      out.configurations.push_back(cfg);
    }
  }
  if (auto it = value.find("progression"); it != value.end()) {
    if (!it->is_array()) bad_key("disease.progression", "must be an array");
    out.progression.clear();
    std::size_t i = 0;
    for (const auto& item : *it) {
      const std::string key = fmt::format("disease.progression[{}]", i++);
      if (!item.is_object()) bad_key(key, "must be an object");
      ProgressionEdge edge;
      edge.from = parse_state(item.value("from", json()), key + ".from");
      edge.to = parse_state(item.value("to", json()), key + ".to");
      edge.probability = require_number(item, "p", -1.0);
      if (edge.probability < 0.0 || edge.probability > 1.0)
        bad_key(key + ".p", "must be in [0, 1]");
      if (!item.contains("dwell")) bad_key(key + ".dwell", "is required");
      edge.dwell = parse_dwell(item["dwell"], key + ".dwell");
      out.progression.push_back(edge);
    }
    // Surface bad probability sums at load time rather than at model build.
    std::array<double, kNumHealthStates> sums{};
    std::array<bool, kNumHealthStates> has{};
    for (const auto& e : out.progression) {
      sums[static_cast<std::size_t>(e.from)] += e.probability;
      has[static_cast<std::size_t>(e.from)] = true;
    }
    for (int s = 0; s < kNumHealthStates; ++s)
      if (has[static_cast<std::size_t>(s)] &&
          std::abs(sums[static_cast<std::size_t>(s)] - 1.0) > 1e-9)
        bad_key("disease.progression",
                fmt::format("probabilities out of state {} sum to {}",
                            state_name(static_cast<HealthState>(s)),
                            sums[static_cast<std::size_t>(s)]));
  }
  return out;
}

std::filesystem::path resolve(const std::string& value,
                              const std::filesystem::path& base_dir) {
  if (value.empty()) return {};
  std::filesystem::path p(value);
  return p.is_absolute() ? p : base_dir / p;
}

json state_map_to_json(const std::array<double, kNumHealthStates>& values) {
  json out = json::object();
  for (int s = 0; s < kNumHealthStates; ++s)
    out[std::string(state_name(static_cast<HealthState>(s)))] =
        values[static_cast<std::size_t>(s)];
  return out;
}

json dwell_to_json(const DwellSpec& dwell) {
  if (dwell.kind == DwellSpec::Kind::fixed)
    return json{{"kind", "fixed"}, {"days", dwell.days}};
  return json{{"kind", "discretized-gamma"}, {"shape", dwell.shape},
              {"scale", dwell.scale}};
}

}  // namespace

json load_document(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in)
    throw Error(Error::Kind::file_not_found,
                fmt::format("cannot open {}", path.string()));
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    // nlohmann reports a byte offset; turn it into line/column.
    std::size_t line = 1, column = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    throw Error(Error::Kind::parse, fmt::format("{}:{}:{}: {}", path.string(),
                                                line, column, e.what()));
  }
}

Config config_from_document(const json& document,
                            const std::filesystem::path& base_dir) {
  if (!document.is_object())
    throw Error(Error::Kind::parse, "configuration root must be a JSON object");

  Config cfg;
  cfg.document = document;

  cfg.person_file = resolve(require_string(document, "person_file", ""), base_dir);
  cfg.visit_file = resolve(require_string(document, "visit_file", ""), base_dir);
  cfg.location_weight_file =
      resolve(require_string(document, "location_weight_file", ""), base_dir);
  cfg.output_directory =
      resolve(require_string(document, "output_directory", ""), base_dir);

  if (auto it = document.find("behavior_model"); it != document.end()) {
    if (it->is_string()) {
      cfg.behavior_model.name = it->get<std::string>();
    } else if (it->is_object()) {
      cfg.behavior_model.name = require_string(*it, "name", "default");
      if (auto params = it->find("params"); params != it->end()) {
        if (!params->is_object()) bad_key("behavior_model.params", "must be an object");
        cfg.behavior_model.params = *params;
      }
    } else {
      bad_key("behavior_model", "must be a string or an object");
    }
  }

  const std::int64_t workers = require_integer(document, "num_workers", 1);
  if (workers < 1) bad_key("num_workers", "must be >= 1");
  cfg.num_workers = static_cast<int>(workers);

  cfg.iterations = require_integer(document, "iterations", 0);
  if (cfg.iterations < 0) bad_key("iterations", "must be >= 0");

  cfg.initial_exposed = require_integer(document, "initial_exposed", 0);
  if (cfg.initial_exposed < 0) bad_key("initial_exposed", "must be >= 0");

  cfg.tau = require_number(document, "tau", 0.0);
  if (cfg.tau < 0.0) bad_key("tau", "must be >= 0");

  cfg.contact_probability = require_unit_interval(document, "contact_probability", 1.0);

  if (auto it = document.find("seed"); it != document.end()) {
    if (!it->is_number_integer()) bad_key("seed", "must be an integer");
    cfg.seed = it->get<std::uint64_t>();
  }

  cfg.mask_inf_scale = require_unit_interval(document, "mask_inf_scale", 0.8);
  cfg.mask_susc_scale = require_unit_interval(document, "mask_susc_scale", 0.8);
  cfg.distancing_inf_scale =
      require_unit_interval(document, "distancing_inf_scale", 0.8);
  cfg.distancing_susc_scale =
      require_unit_interval(document, "distancing_susc_scale", 0.8);

  if (auto it = document.find("write_local_observables"); it != document.end()) {
    if (!it->is_boolean()) bad_key("write_local_observables", "must be a boolean");
    cfg.write_local_observables = it->get<bool>();
  }

  if (auto it = document.find("disease"); it != document.end())
    cfg.disease = parse_disease(*it);

  for (const auto& [key, value] : document.items())
    if (!kRecognizedKeys.contains(key)) cfg.legacy_keys[key] = value;

  return cfg;
}

Config load_config(const std::filesystem::path& path) {
  auto document = load_document(path);
  return config_from_document(document, std::filesystem::absolute(path).parent_path());
}

json Config::to_document() const {
  json doc = json::object();
  doc["person_file"] = person_file.string();
  doc["visit_file"] = visit_file.string();
  if (!location_weight_file.empty())
    doc["location_weight_file"] = location_weight_file.string();
  doc["output_directory"] = output_directory.string();
  doc["behavior_model"] =
      json{{"name", behavior_model.name}, {"params", behavior_model.params}};
  doc["num_workers"] = num_workers;
  doc["iterations"] = iterations;
  doc["initial_exposed"] = initial_exposed;
  doc["tau"] = tau;
  doc["contact_probability"] = contact_probability;
  doc["seed"] = seed;
  doc["mask_inf_scale"] = mask_inf_scale;
  doc["mask_susc_scale"] = mask_susc_scale;
  doc["distancing_inf_scale"] = distancing_inf_scale;
  doc["distancing_susc_scale"] = distancing_susc_scale;
  doc["write_local_observables"] = write_local_observables;

  json disease_doc = json::object();
  disease_doc["iota"] = state_map_to_json(disease.infectivity);
  disease_doc["sigma"] = state_map_to_json(disease.susceptibility);
  json configs = json::array();
  for (const auto& c : disease.configurations)
    configs.push_back(json{{"entry", std::string(state_name(c.entry))},
                           {"exit", std::string(state_name(c.exit))},
                           {"contact", std::string(state_name(c.contact))},
                           {"weight", c.weight}});
  disease_doc["transmission_configurations"] = std::move(configs);
  json edges = json::array();
  for (const auto& e : disease.progression)
    edges.push_back(json{{"from", std::string(state_name(e.from))},
                         {"to", std::string(state_name(e.to))},
                         {"p", e.probability},
                         {"dwell", dwell_to_json(e.dwell)}});
  disease_doc["progression"] = std::move(edges);
  doc["disease"] = std::move(disease_doc);

  for (const auto& [key, value] : legacy_keys.items()) doc[key] = value;
  return doc;
}

ValidationReport validate_config(const Config& config,
                                 const std::filesystem::path& schema_path) {
  return validate_document(config.document, load_schema(schema_path));
}

}  // namespace episim
