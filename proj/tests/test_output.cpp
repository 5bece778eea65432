#include <doctest.h>

#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "episim/behavior.hpp"
#include "episim/csv.hpp"
#include "episim/engine.hpp"
#include "episim/output.hpp"
#include "episim/population.hpp"

using namespace episim;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  auto dir = fs::temp_directory_path() / "episim_output_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

std::string first_line(const fs::path& path) {
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  return line;
}

SimulationOutputs smallville_run(std::int64_t iterations,
                                 std::int64_t initial_exposed = 1) {
  auto pop = generate_smallville();
  Config cfg;
  cfg.iterations = iterations;
  cfg.initial_exposed = initial_exposed;
  cfg.tau = 0.05;
  cfg.contact_probability = 1.0;
  cfg.seed = 7;
  DiseaseModel disease(cfg.disease.infectivity, cfg.disease.susceptibility, cfg.tau,
                       cfg.disease.configurations, cfg.disease.progression);
  auto model = behavior::builtin("base", json::object(), cfg.seed);
  return run(cfg, pop, disease, *model);
}

}  // namespace

TEST_CASE("shortest round-trip real formatting") {
  CHECK(csv::format_real(0.0) == "0.0");
  CHECK(csv::format_real(1.0) == "1.0");
  CHECK(csv::format_real(0.33) == "0.33");
  CHECK(csv::format_real(1.0 / 3.0) == "0.3333333333333333");
  CHECK(csv::format_real(4.86393146275077e-05) == "4.86393146275077e-05");
  // Round-trips through the strict parser.
  for (double x : {0.9997568130493164, 2.5e-300, -78.4884675}) {
    CHECK(csv::parse_double(csv::format_real(x), 1) == x);
  }
}

TEST_CASE("headers match the documented formats byte for byte") {
  auto dir = fresh_dir("headers");
  auto outputs = smallville_run(2);
  auto paths = output::write_outputs(outputs, dir);
  CHECK(first_line(paths.global_observables) ==
        "iteration,S_abs,S_rel,E_abs,E_rel,Is_abs,Is_rel,Ia_abs,Ia_rel,R_abs,R_rel");
  CHECK(first_line(paths.model_class) == "index,pid,model_class");
  CHECK(first_line(paths.transitions) == "iteration,state,p1_pid,p2_pid");
  CHECK(first_line(paths.actions) ==
        "iteration,pid,mask,distancing,no_other,no_college,no_shopping,no_religion,"
        "no_school,no_work");
  CHECK(first_line(paths.local_observables) ==
        "iteration,obs_iteration,pid,lid,activity_type,n_total,symp_abs,symp_rel,"
        "mask_abs,mask_rel,distancing_abs,distancing_rel");
}

TEST_CASE("empty simulation writes headers only, plus class rows") {
  auto dir = fresh_dir("empty");
  auto outputs = smallville_run(0, 0);
  auto paths = output::write_outputs(outputs, dir);
  CHECK(slurp(paths.global_observables) ==
        "iteration,S_abs,S_rel,E_abs,E_rel,Is_abs,Is_rel,Ia_abs,Ia_rel,R_abs,R_rel\n");
  CHECK(slurp(paths.transitions) == "iteration,state,p1_pid,p2_pid\n");
  auto model_class = csv::read_file(paths.model_class);
  CHECK(model_class.rows.size() == 3);
  CHECK(model_class.rows[0] == std::vector<std::string>{"0", "1", "0"});
}

TEST_CASE("never-observed placeholder rows match the documented sample shape") {
  // One person, pid from the documented data; no visits, so every slot stays
  // at the placeholder through iteration 0.
  SimulationOutputs outputs;
  outputs.population_size = 1;
  outputs.iterations = 1;
  outputs.pids = {5586585};
  outputs.model_classes = {1};
  outputs.final_states = {HealthState::S};
  behavior::GlobalObservablesRow row;
  row.iteration = 0;
  row.counts = {1, 0, 0, 0, 0};
  row.fractions = {1.0, 0.0, 0.0, 0.0, 0.0};
  outputs.global.push_back(row);
  for (int slot = 0; slot < kNumObservableSlots; ++slot) {
    behavior::LocalObservable obs;
    obs.obs_step = -1;
    obs.pid = 5586585;
    obs.lid = 0;
    obs.activity_type = slot + 1;
    outputs.local_observables.push_back({0, 5586585, obs});
  }

  auto dir = fresh_dir("placeholder");
  auto paths = output::write_outputs(outputs, dir);
  std::ifstream in(paths.local_observables);
  std::string line;
  std::getline(in, line);  // header
  std::getline(in, line);
  CHECK(line == "0,0,5586585,0,1,0,0,0.0,0,0.0,0,0.0");
  std::getline(in, line);
  CHECK(line == "0,0,5586585,0,2,0,0,0.0,0,0.0,0,0.0");

  // From iteration 1 on the sentinel becomes -1.
  outputs.local_observables.clear();
  for (int slot = 0; slot < kNumObservableSlots; ++slot) {
    behavior::LocalObservable obs;
    obs.obs_step = -1;
    obs.pid = 5586585;
    obs.lid = 0;
    obs.activity_type = slot + 1;
    outputs.local_observables.push_back({1, 5586585, obs});
  }
  auto dir2 = fresh_dir("placeholder2");
  auto paths2 = output::write_outputs(outputs, dir2);
  std::ifstream in2(paths2.local_observables);
  std::getline(in2, line);
  std::getline(in2, line);
  CHECK(line == "1,-1,5586585,0,1,0,0,0.0,0,0.0,0,0.0");
}

TEST_CASE("emitted files round-trip through the strict CSV reader") {
  auto dir = fresh_dir("roundtrip");
  auto outputs = smallville_run(5);
  auto paths = output::write_outputs(outputs, dir);

  auto global = csv::read_file(paths.global_observables);
  REQUIRE(global.rows.size() == outputs.global.size());
  for (std::size_t i = 0; i < global.rows.size(); ++i) {
    const auto& row = global.rows[i];
    CHECK(csv::parse_i64(row[0], i + 2) == outputs.global[i].iteration);
    for (int s = 0; s < kNumHealthStates; ++s) {
      CHECK(csv::parse_i64(row[1 + 2 * static_cast<std::size_t>(s)], 0) ==
            outputs.global[i].counts[static_cast<std::size_t>(s)]);
      CHECK(csv::parse_double(row[2 + 2 * static_cast<std::size_t>(s)], 0) ==
            outputs.global[i].fractions[static_cast<std::size_t>(s)]);
      // rel = abs / N at full printed precision
      CHECK(outputs.global[i].fractions[static_cast<std::size_t>(s)] ==
            static_cast<double>(outputs.global[i].counts[static_cast<std::size_t>(s)]) /
                static_cast<double>(outputs.population_size));
    }
  }

  auto transitions = csv::read_file(paths.transitions);
  CHECK(transitions.rows.size() == outputs.transitions.size());
  auto actions = csv::read_file(paths.actions);
  CHECK(actions.rows.size() == outputs.actions.size());
  auto locals = csv::read_file(paths.local_observables);
  CHECK(locals.rows.size() == outputs.local_observables.size());
  // local observables: one row per person per tracked activity type per step
  CHECK(locals.rows.size() ==
        outputs.population_size * kNumObservableSlots *
            static_cast<std::uint64_t>(outputs.iterations));
}

TEST_CASE("transitions: transmission rows equal E entries minus the initial set") {
  auto outputs = smallville_run(40);
  std::int64_t e_entries = 0, transmissions = 0, initial = 0;
  for (const auto& r : outputs.transitions) {
    if (r.state == 1 && r.iteration >= 0) ++e_entries;
    if (r.iteration == -1) ++initial;
    if (r.p2_pid >= 0) {
      ++transmissions;
      CHECK(r.state == 1);
    }
  }
  CHECK(transmissions == e_entries);
  CHECK(initial == 1);
}

TEST_CASE("appending per step produces the same bytes as writing at the end") {
  auto outputs = smallville_run(6);
  auto whole_dir = fresh_dir("whole");
  auto step_dir = fresh_dir("stepwise");
  auto whole = output::write_outputs(outputs, whole_dir);

  // The same records are streamed one iteration at a time, pre-sorted the way
  // write_outputs sorts them.
  auto sorted = outputs;
  std::stable_sort(sorted.transitions.begin(), sorted.transitions.end(),
                   [](const TransitionRecord& a, const TransitionRecord& b) {
                     if (a.iteration != b.iteration) return a.iteration < b.iteration;
                     return a.p1_pid < b.p1_pid;
                   });
  std::stable_sort(sorted.actions.begin(), sorted.actions.end(),
                   [](const ActionRecord& a, const ActionRecord& b) {
                     if (a.iteration != b.iteration) return a.iteration < b.iteration;
                     return a.pid < b.pid;
                   });
  output::OutputWriter writer(step_dir, true);
  writer.write_model_classes(sorted.pids, sorted.model_classes);
  for (std::int64_t t = -1; t < sorted.iterations; ++t) {
    auto slice = [&](const auto& records, auto&& append) {
      std::size_t begin = 0;
      while (begin < records.size() && records[begin].iteration < t) ++begin;
      std::size_t end = begin;
      while (end < records.size() && records[end].iteration == t) ++end;
      append(std::span(records).subspan(begin, end - begin));
    };
    slice(sorted.transitions,
          [&](auto s) { writer.append_transitions(s); });
    slice(sorted.actions, [&](auto s) { writer.append_actions(s); });
    slice(sorted.local_observables,
          [&](auto s) { writer.append_local_observables(s); });
    slice(sorted.global, [&](auto s) { writer.append_global(s); });
  }
  writer.close();

  for (const auto& name : {"model_class.csv", "local_observables.csv",
                           "global_observables.csv", "actions.csv",
                           "transitions.csv"})
    CHECK(slurp(whole_dir / name) == slurp(step_dir / name));
}

TEST_CASE("epicurve counts are column-equal to the global observables") {
  auto outputs = smallville_run(8);
  auto dir = fresh_dir("epicurve");
  auto csv_path = output::emit_epicurve(outputs.global, dir / "epicurve.csv",
                                        dir / "epicurve.svg");
  auto table = csv::read_file(csv_path);
  CHECK(table.header == std::vector<std::string>{"iteration", "S", "E", "Is", "Ia", "R"});
  REQUIRE(table.rows.size() == outputs.global.size());
  for (std::size_t i = 0; i < table.rows.size(); ++i)
    for (int s = 0; s < kNumHealthStates; ++s)
      CHECK(csv::parse_i64(table.rows[i][1 + static_cast<std::size_t>(s)], 0) ==
            outputs.global[i].counts[static_cast<std::size_t>(s)]);
  CHECK(fs::exists(dir / "epicurve.svg"));
  CHECK(slurp(dir / "epicurve.svg").find("<svg") != std::string::npos);
}
