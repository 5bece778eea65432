#include "episim/output.hpp"

#include <algorithm>
#include <fmt/format.h>

#include "episim/csv.hpp"
#include "episim/error.hpp"

namespace episim::output {

namespace {

constexpr std::string_view kModelClassHeader = "index,pid,model_class";
constexpr std::string_view kLocalObservablesHeader =
    "iteration,obs_iteration,pid,lid,activity_type,n_total,symp_abs,symp_rel,"
    "mask_abs,mask_rel,distancing_abs,distancing_rel";
constexpr std::string_view kGlobalObservablesHeader =
    "iteration,S_abs,S_rel,E_abs,E_rel,Is_abs,Is_rel,Ia_abs,Ia_rel,R_abs,R_rel";
constexpr std::string_view kActionsHeader =
    "iteration,pid,mask,distancing,no_other,no_college,no_shopping,no_religion,"
    "no_school,no_work";
constexpr std::string_view kTransitionsHeader = "iteration,state,p1_pid,p2_pid";

std::ofstream open_with_header(const std::filesystem::path& path,
                               std::string_view header) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw Error(Error::Kind::io, fmt::format("cannot write {}", path.string()));
  out << header << "\n";
  return out;
}

}  // namespace

OutputPaths output_paths(const std::filesystem::path& directory) {
  return {directory / "model_class.csv",     directory / "local_observables.csv",
          directory / "global_observables.csv", directory / "actions.csv",
          directory / "transitions.csv",     directory / "epicurve.csv"};
}

OutputWriter::OutputWriter(const std::filesystem::path& directory,
                           bool write_local_observables)
    : paths_(output_paths(directory)),
      write_local_observables_(write_local_observables) {
  std::filesystem::create_directories(directory);
  model_class_ = open_with_header(paths_.model_class, kModelClassHeader);
  if (write_local_observables_)
    local_observables_ = open_with_header(paths_.local_observables,
                                          kLocalObservablesHeader);
  global_observables_ =
      open_with_header(paths_.global_observables, kGlobalObservablesHeader);
  actions_ = open_with_header(paths_.actions, kActionsHeader);
  transitions_ = open_with_header(paths_.transitions, kTransitionsHeader);
}

void OutputWriter::write_model_classes(std::span<const std::uint64_t> pids,
                                       std::span<const int> model_classes) {
  for (std::size_t i = 0; i < pids.size(); ++i)
    model_class_ << i << ',' << pids[i] << ',' << model_classes[i] << "\n";
}

void OutputWriter::append_transitions(std::span<const TransitionRecord> records) {
  for (const auto& r : records)
    transitions_ << r.iteration << ',' << r.state << ',' << r.p1_pid << ','
                 << r.p2_pid << "\n";
}

void OutputWriter::append_actions(std::span<const ActionRecord> records) {
  for (const auto& r : records) {
    const auto& a = r.action;
    actions_ << r.iteration << ',' << r.pid << ',' << int(a.mask) << ','
             << int(a.distancing) << ',' << int(a.no_other) << ','
             << int(a.no_college) << ',' << int(a.no_shopping) << ','
             << int(a.no_religion) << ',' << int(a.no_school) << ','
             << int(a.no_work) << "\n";
  }
}

void OutputWriter::append_local_observables(
    std::span<const LocalObservableRecord> records) {
  if (!write_local_observables_) return;
  for (const auto& r : records) {
    const auto& o = r.observable;
    // Never-observed slots print the zero placeholder at iteration 0 and the
    // -1 sentinel afterwards.
    const std::int64_t obs_iteration =
        (o.obs_step < 0 && r.iteration == 0) ? 0 : o.obs_step;
    local_observables_ << r.iteration << ',' << obs_iteration << ',' << r.pid << ','
                       << o.lid << ',' << o.activity_type << ',' << o.n_total << ','
                       << o.symp_abs << ',' << csv::format_real(o.symp_rel) << ','
                       << o.mask_abs << ',' << csv::format_real(o.mask_rel) << ','
                       << o.distancing_abs << ','
                       << csv::format_real(o.distancing_rel) << "\n";
  }
}

void OutputWriter::append_global(std::span<const behavior::GlobalObservablesRow> rows) {
  for (const auto& row : rows) {
    global_observables_ << row.iteration;
    for (int s = 0; s < kNumHealthStates; ++s)
      global_observables_ << ',' << row.counts[static_cast<std::size_t>(s)] << ','
                          << csv::format_real(row.fractions[static_cast<std::size_t>(s)]);
    global_observables_ << "\n";
  }
}

void OutputWriter::close() {
  model_class_.close();
  if (write_local_observables_) local_observables_.close();
  global_observables_.close();
  actions_.close();
  transitions_.close();
}

OutputPaths write_outputs(const SimulationOutputs& outputs,
                          const std::filesystem::path& directory,
                          bool write_local_observables) {
  OutputWriter writer(directory, write_local_observables);
  writer.write_model_classes(outputs.pids, outputs.model_classes);

  // (iteration, pid) ordering; stable so a person's same-step transition
  // chain keeps its event order.
  auto transitions = outputs.transitions;
  std::stable_sort(transitions.begin(), transitions.end(),
                   [](const TransitionRecord& a, const TransitionRecord& b) {
                     if (a.iteration != b.iteration) return a.iteration < b.iteration;
                     return a.p1_pid < b.p1_pid;
                   });
  writer.append_transitions(transitions);

  auto actions = outputs.actions;
  std::stable_sort(actions.begin(), actions.end(),
                   [](const ActionRecord& a, const ActionRecord& b) {
                     if (a.iteration != b.iteration) return a.iteration < b.iteration;
                     return a.pid < b.pid;
                   });
  writer.append_actions(actions);

  writer.append_local_observables(outputs.local_observables);
  writer.append_global(outputs.global);
  writer.close();
  return writer.paths();
}

std::filesystem::path emit_epicurve(
    std::span<const behavior::GlobalObservablesRow> history,
    const std::filesystem::path& csv_path, const std::filesystem::path& svg_path) {
  std::ofstream out(csv_path, std::ios::binary);
  if (!out)
    throw Error(Error::Kind::io, fmt::format("cannot write {}", csv_path.string()));
  out << "iteration,S,E,Is,Ia,R\n";
  for (const auto& row : history) {
    out << row.iteration;
    for (int s = 0; s < kNumHealthStates; ++s)
      out << ',' << row.counts[static_cast<std::size_t>(s)];
    out << "\n";
  }
  out.close();

  if (!svg_path.empty()) {
    std::ofstream svg(svg_path, std::ios::binary);
    if (!svg)
      throw Error(Error::Kind::io, fmt::format("cannot write {}", svg_path.string()));
    const double width = 720, height = 480, margin = 50;
    std::int64_t n_max = 1;
    for (const auto& row : history)
      for (auto c : row.counts) n_max = std::max(n_max, c);
    const double x_span = history.size() > 1 ? double(history.size() - 1) : 1.0;
    auto x_of = [&](std::size_t i) {
      return margin + (width - 2 * margin) * double(i) / x_span;
    };
    auto y_of = [&](std::int64_t count) {
      return height - margin -
             (height - 2 * margin) * double(count) / double(n_max);
    };
    static constexpr const char* kColors[kNumHealthStates] = {
        "#1f77b4", "#ff7f0e", "#d62728", "#9467bd", "#2ca02c"};
    svg << fmt::format(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" "
        "viewBox=\"0 0 {} {}\">\n",
        width, height, width, height);
    svg << fmt::format(
        "<rect width=\"{}\" height=\"{}\" fill=\"white\"/>\n"
        "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n"
        "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n",
        width, height, margin, height - margin, width - margin, height - margin,
        margin, margin, margin, height - margin);
    for (int s = 0; s < kNumHealthStates; ++s) {
      svg << fmt::format("<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\" "
                         "points=\"",
                         kColors[s]);
      for (std::size_t i = 0; i < history.size(); ++i)
        svg << fmt::format("{:.2f},{:.2f} ", x_of(i),
                           y_of(history[i].counts[static_cast<std::size_t>(s)]));
      svg << "\"/>\n";
      svg << fmt::format(
          "<text x=\"{}\" y=\"{}\" fill=\"{}\" font-size=\"13\" "
          "font-family=\"sans-serif\">{}</text>\n",
          width - margin + 6, margin + 16 * s, kColors[s],
          state_name(static_cast<HealthState>(s)));
    }
    svg << "</svg>\n";
  }
  return csv_path;
}

}  // namespace episim::output
