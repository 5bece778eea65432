// Command-line driver: run simulations, validate configurations, generate
// test populations, and re-plot epicurves from existing output.

#include <cstdint>
#include <filesystem>
#include <fmt/format.h>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "episim/config.hpp"
#include "episim/csv.hpp"
#include "episim/engine.hpp"
#include "episim/error.hpp"
#include "episim/log.hpp"
#include "episim/output.hpp"
#include "episim/population.hpp"
#include "episim/schema.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

int require_paths(const std::string& config_path, const std::string& schema_path) {
  if (config_path.empty() || schema_path.empty()) {
    std::cerr << "usage: episim [run|validate] -c <config.json> -s <schema.json>"
              << " [-l <level>]\n";
    return kExitUsage;
  }
  return kExitOk;
}

int print_report(const episim::ValidationReport& report) {
  if (report.ok()) {
    std::cout << "configuration is valid\n";
    return kExitOk;
  }
  for (const auto& v : report.violations)
    std::cout << fmt::format("violation at '{}' ({}): {}\n", v.path, v.rule, v.message);
  return kExitFailure;
}

episim::DiseaseModel build_disease_model(const episim::Config& cfg) {
  return episim::DiseaseModel(cfg.disease.infectivity, cfg.disease.susceptibility,
                              cfg.tau, cfg.disease.configurations,
                              cfg.disease.progression);
}

int cmd_validate(const std::string& config_path, const std::string& schema_path) {
  if (int rc = require_paths(config_path, schema_path)) return rc;
  auto document = episim::load_document(config_path);
  auto schema = episim::load_schema(schema_path);
  return print_report(episim::validate_document(document, schema));
}

int cmd_run(const std::string& config_path, const std::string& schema_path) {
  if (int rc = require_paths(config_path, schema_path)) return rc;

  auto document = episim::load_document(config_path);
  auto schema = episim::load_schema(schema_path);
  auto report = episim::validate_document(document, schema);
  if (!report.ok()) return print_report(report);

  auto cfg = episim::config_from_document(
      document, fs::absolute(fs::path(config_path)).parent_path());

  episim::log_info("loading population from {} and {}", cfg.person_file.string(),
                   cfg.visit_file.string());
  auto population = episim::load_population(cfg.person_file, cfg.visit_file);
  if (!cfg.location_weight_file.empty())
    episim::load_location_weights(cfg.location_weight_file, population);

  auto disease = build_disease_model(cfg);
  auto model = episim::behavior::builtin(cfg.behavior_model.name,
                                         cfg.behavior_model.params, cfg.seed);

  episim::log_info("running {} iterations over {} people with {} workers",
                   cfg.iterations, population.size(), cfg.num_workers);
  auto outputs = episim::run(cfg, population, disease, *model);

  auto paths = episim::output::write_outputs(outputs, cfg.output_directory,
                                             cfg.write_local_observables);
  episim::output::emit_epicurve(outputs.global, paths.epicurve,
                                cfg.output_directory / "epicurve.svg");

  const auto n = static_cast<double>(outputs.population_size);
  std::array<std::int64_t, episim::kNumHealthStates> counts{};
  for (auto s : outputs.final_states) ++counts[static_cast<std::size_t>(s)];
  std::cout << fmt::format("population: {}\n", outputs.population_size);
  std::cout << fmt::format("iterations: {}\n", outputs.iterations);
  std::cout << fmt::format("final: S={} E={} Is={} Ia={} R={}\n", counts[0], counts[1],
                           counts[2], counts[3], counts[4]);
  std::cout << fmt::format(
      "attack_rate: {}\n",
      episim::csv::format_real(n > 0 ? 1.0 - static_cast<double>(counts[0]) / n : 0.0));
  std::cout << fmt::format("outputs: {}\n", cfg.output_directory.string());
  return kExitOk;
}

int cmd_generate_population(const std::string& kind, const std::string& out_dir,
                            std::uint64_t people, std::uint64_t locations,
                            std::uint64_t seed) {
  episim::Population pop;
  json config{{"person_file", "persons.csv"},
              {"visit_file", "visits.csv"},
              {"output_directory", "output"},
              {"behavior_model", {{"name", "base"}, {"params", json::object()}}},
              {"num_workers", 1},
              {"seed", seed}};
  if (kind == "smallville") {
    pop = episim::generate_smallville();
    config["tau"] = 0.05;
    config["contact_probability"] = 1.0;
    config["iterations"] = 30;
    config["initial_exposed"] = 1;
  } else if (kind == "random") {
    pop = episim::generate_random_population(people, locations, seed);
    config["tau"] = 3.0e-6;
    config["contact_probability"] = 0.33;
    config["iterations"] = 90;
    config["initial_exposed"] = 5;
  } else {
    std::cerr << "unknown population kind '" << kind << "' (smallville|random)\n";
    return kExitUsage;
  }

  fs::create_directories(out_dir);
  episim::write_persons_csv(pop.persons, fs::path(out_dir) / "persons.csv");
  episim::write_visits_csv(pop, fs::path(out_dir) / "visits.csv");
  std::ofstream(fs::path(out_dir) / "config.json") << config.dump(2) << "\n";
  std::cout << fmt::format("wrote persons.csv, visits.csv, config.json to {}\n",
                           out_dir);
  return kExitOk;
}

int cmd_epicurve(const std::string& global_file, const std::string& out_csv,
                 const std::string& out_svg) {
  auto table = episim::csv::read_file(global_file);
  std::vector<episim::behavior::GlobalObservablesRow> rows;
  std::size_t line = 1;
  for (const auto& fields : table.rows) {
    ++line;
    episim::behavior::GlobalObservablesRow row;
    row.iteration = episim::csv::parse_i64(fields.at(0), line);
    for (int s = 0; s < episim::kNumHealthStates; ++s) {
      row.counts[static_cast<std::size_t>(s)] =
          episim::csv::parse_i64(fields.at(1 + 2 * static_cast<std::size_t>(s)), line);
      row.fractions[static_cast<std::size_t>(s)] = episim::csv::parse_double(
          fields.at(2 + 2 * static_cast<std::size_t>(s)), line);
    }
    rows.push_back(row);
  }
  episim::output::emit_epicurve(rows, out_csv,
                                out_svg.empty() ? fs::path{} : fs::path(out_svg));
  std::cout << fmt::format("wrote {}\n", out_csv);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"episim: agent-based epidemic simulator with behavior models"};
  app.require_subcommand(0, 1);

  std::string config_path, schema_path, level_name = "warning";
  app.add_option("-c,--config", config_path, "configuration file (JSON)");
  app.add_option("-s,--schema", schema_path, "configuration schema (JSON)");
  app.add_option("-l,--log-level", level_name, "critical|error|warning|info|debug");

  auto* run_cmd = app.add_subcommand("run", "validate the configuration, then simulate");
  run_cmd->fallthrough();
  auto* validate_cmd =
      app.add_subcommand("validate", "check a configuration against a schema");
  validate_cmd->fallthrough();

  auto* gen_cmd = app.add_subcommand("generate-population",
                                     "write a synthetic person/visit file pair");
  gen_cmd->fallthrough();
  std::string kind = "smallville", out_dir = ".";
  std::uint64_t people = 1000, locations = 50, seed = 42;
  gen_cmd->add_option("--kind", kind, "smallville|random");
  gen_cmd->add_option("--out", out_dir, "output directory");
  gen_cmd->add_option("--people", people, "people in a random population");
  gen_cmd->add_option("--locations", locations, "activity locations");
  gen_cmd->add_option("--seed", seed, "generator seed");

  auto* epi_cmd =
      app.add_subcommand("epicurve", "rebuild epicurve data from a previous run");
  epi_cmd->fallthrough();
  std::string global_file, out_csv = "epicurve.csv", out_svg;
  epi_cmd->add_option("--global-file", global_file, "global observables CSV")
      ->required();
  epi_cmd->add_option("--out-csv", out_csv, "epicurve CSV to write");
  epi_cmd->add_option("--out-svg", out_svg, "optional SVG rendering");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  episim::LogLevel level;
  if (!episim::parse_log_level(level_name, level)) {
    std::cerr << "unknown log level '" << level_name << "'\n";
    return kExitUsage;
  }
  episim::set_log_level(level);

  try {
    if (validate_cmd->parsed()) return cmd_validate(config_path, schema_path);
    if (gen_cmd->parsed())
      return cmd_generate_population(kind, out_dir, people, locations, seed);
    if (epi_cmd->parsed()) return cmd_epicurve(global_file, out_csv, out_svg);
    if (run_cmd->parsed() || !config_path.empty())
      return cmd_run(config_path, schema_path);  // bare -c/-s defaults to run
    std::cerr << app.help();
    return kExitUsage;
  } catch (const episim::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  } catch (const std::exception& e) {
    std::cerr << "unexpected error: " << e.what() << "\n";
    return kExitFailure;
  }
}
