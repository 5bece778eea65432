#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "episim/disease.hpp"
#include "episim/schema.hpp"

namespace episim {

// Parsed `disease` block; defaults reproduce the stock SEIR model.
struct DiseaseModelConfig {
  std::array<double, kNumHealthStates> infectivity{0.0, 0.0, 1.0, 1.0, 0.0};
  std::array<double, kNumHealthStates> susceptibility{1.0, 0.0, 0.0, 0.0, 0.0};
  std::vector<TransmissionConfiguration> configurations{
      {HealthState::S, HealthState::E, HealthState::Is, 1.0},
      {HealthState::S, HealthState::E, HealthState::Ia, 1.0},
  };
  std::vector<ProgressionEdge> progression{
      {HealthState::E, HealthState::Is, 0.67,
       {DwellSpec::Kind::discretized_gamma, 0.0, 2.0, 2.5}},
      {HealthState::E, HealthState::Ia, 0.33,
       {DwellSpec::Kind::discretized_gamma, 0.0, 2.0, 2.5}},
      {HealthState::Is, HealthState::R, 1.0,
       {DwellSpec::Kind::discretized_gamma, 0.0, 4.0, 2.0}},
      {HealthState::Ia, HealthState::R, 1.0,
       {DwellSpec::Kind::discretized_gamma, 0.0, 4.0, 2.0}},
  };
};

struct BehaviorModelConfig {
  std::string name = "default";
  nlohmann::json params = nlohmann::json::object();
};

struct Config {
  std::filesystem::path person_file;
  std::filesystem::path visit_file;
  std::filesystem::path location_weight_file;  // optional, empty if unset
  std::filesystem::path output_directory;
  BehaviorModelConfig behavior_model;
  int num_workers = 1;
  std::int64_t iterations = 0;
  std::int64_t initial_exposed = 0;
  double tau = 0.0;  // transmissibility, per-second per-step
  double contact_probability = 1.0;
  std::uint64_t seed = 0;
  double mask_inf_scale = 0.8;
  double mask_susc_scale = 0.8;
  double distancing_inf_scale = 0.8;
  double distancing_susc_scale = 0.8;
  bool write_local_observables = true;
  DiseaseModelConfig disease;

  // Keys accepted for compatibility with older configurations and otherwise
  // ignored (num_procs, port, shared-memory buffer sizes, ...).
  nlohmann::json legacy_keys = nlohmann::json::object();

  // The raw document the config was built from.
  nlohmann::json document = nlohmann::json::object();

  // Serializes the recognized fields back into a document; loading the result
  // reproduces this config.
  nlohmann::json to_document() const;
};

// Reads and parses a JSON document; reports file-not-found and syntax errors
// with line/column positions.
nlohmann::json load_document(const std::filesystem::path& path);

// Builds a Config from a parsed document. Missing keys fall back to defaults;
// recognized keys with out-of-range or ill-typed values throw. Relative paths
// resolve against `base_dir`.
Config config_from_document(const nlohmann::json& document,
                            const std::filesystem::path& base_dir);

Config load_config(const std::filesystem::path& path);

// Schema validation of the raw document the config carries.
ValidationReport validate_config(const Config& config,
                                 const std::filesystem::path& schema_path);

}  // namespace episim
