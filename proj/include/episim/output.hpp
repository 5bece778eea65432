#pragma once

#include <filesystem>
#include <fstream>
#include <span>
#include <vector>

#include "episim/engine.hpp"

namespace episim::output {

struct OutputPaths {
  std::filesystem::path model_class;
  std::filesystem::path local_observables;
  std::filesystem::path global_observables;
  std::filesystem::path actions;
  std::filesystem::path transitions;
  std::filesystem::path epicurve;
};

OutputPaths output_paths(const std::filesystem::path& directory);

// Append-oriented writer; writing everything at once or step by step produces
// identical bytes.
class OutputWriter {
 public:
  OutputWriter(const std::filesystem::path& directory, bool write_local_observables);

  void write_model_classes(std::span<const std::uint64_t> pids,
                           std::span<const int> model_classes);
  void append_transitions(std::span<const TransitionRecord> records);
  void append_actions(std::span<const ActionRecord> records);
  void append_local_observables(std::span<const LocalObservableRecord> records);
  void append_global(std::span<const behavior::GlobalObservablesRow> rows);
  void close();

  const OutputPaths& paths() const noexcept { return paths_; }

 private:
  OutputPaths paths_;
  bool write_local_observables_ = true;
  std::ofstream model_class_, local_observables_, global_observables_, actions_,
      transitions_;
};

// Writes the five output files; rows sorted by (iteration, pid) with stable
// per-person event order.
OutputPaths write_outputs(const SimulationOutputs& outputs,
                          const std::filesystem::path& directory,
                          bool write_local_observables = true);

// Per-iteration state counts, column-equal to the global observables file.
// `svg_path`, when non-empty, additionally gets a rendering of the five
// curves.
std::filesystem::path emit_epicurve(std::span<const behavior::GlobalObservablesRow> history,
                                    const std::filesystem::path& csv_path,
                                    const std::filesystem::path& svg_path = {});

}  // namespace episim::output
