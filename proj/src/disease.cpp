#include "episim/disease.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <random>

#include "episim/error.hpp"

namespace episim {

std::string_view state_name(HealthState s) noexcept {
  switch (s) {
    case HealthState::S: return "S";
    case HealthState::E: return "E";
    case HealthState::Is: return "Is";
    case HealthState::Ia: return "Ia";
    case HealthState::R: return "R";
  }
  return "?";
}

std::optional<HealthState> state_from_name(std::string_view name) noexcept {
  for (int i = 0; i < kNumHealthStates; ++i) {
    auto s = static_cast<HealthState>(i);
    if (name == state_name(s)) return s;
  }
  return std::nullopt;
}

DiseaseModel::DiseaseModel(std::array<double, kNumHealthStates> infectivity,
                           std::array<double, kNumHealthStates> susceptibility,
                           double transmissibility,
                           std::vector<TransmissionConfiguration> configurations,
                           std::vector<ProgressionEdge> progression)
    : infectivity_(infectivity),
      susceptibility_(susceptibility),
      transmissibility_(transmissibility),
      configurations_(std::move(configurations)),
      progression_(std::move(progression)) {
  for (auto v : infectivity_)
    if (v < 0.0)
      throw Error(Error::Kind::validation, "infectivity values must be >= 0");
  for (auto v : susceptibility_)
    if (v < 0.0)
      throw Error(Error::Kind::validation, "susceptibility values must be >= 0");
  if (transmissibility_ < 0.0)
    throw Error(Error::Kind::validation, "tau must be >= 0");

  for (std::uint32_t i = 0; i < configurations_.size(); ++i) {
    const auto& c = configurations_[i];
    if (c.weight < 0.0)
      throw Error(Error::Kind::validation, "transmission weight must be >= 0");
    entry_state_[static_cast<std::size_t>(c.entry)] = true;
    configs_by_entry_[static_cast<std::size_t>(c.entry)].push_back(i);
  }
  // Well-ordered triple index set: (exit, contact) within an entry state.
  for (auto& list : configs_by_entry_) {
    std::stable_sort(list.begin(), list.end(), [&](std::uint32_t a, std::uint32_t b) {
      const auto& ca = configurations_[a];
      const auto& cb = configurations_[b];
      if (ca.exit != cb.exit) return ca.exit < cb.exit;
      return ca.contact < cb.contact;
    });
  }

  for (std::uint32_t i = 0; i < progression_.size(); ++i) {
    const auto& e = progression_[i];
    if (e.probability < 0.0 || e.probability > 1.0)
      throw Error(Error::Kind::validation, "progression probability must be in [0,1]");
    switch (e.dwell.kind) {
      case DwellSpec::Kind::fixed:
        if (e.dwell.days < 0.0)
          throw Error(Error::Kind::validation, "fixed dwell must be >= 0 days");
        break;
      case DwellSpec::Kind::discretized_gamma:
        if (e.dwell.shape <= 0.0 || e.dwell.scale <= 0.0)
          throw Error(Error::Kind::validation, "gamma dwell needs shape > 0 and scale > 0");
        break;
    }
    edges_by_state_[static_cast<std::size_t>(e.from)].push_back(i);
  }
  for (int s = 0; s < kNumHealthStates; ++s) {
    const auto& edges = edges_by_state_[static_cast<std::size_t>(s)];
    if (edges.empty()) continue;
    double sum = 0.0;
    for (auto i : edges) sum += progression_[i].probability;
    if (std::abs(sum - 1.0) > 1e-9)
      throw Error(Error::Kind::validation,
                  fmt::format("progression probabilities out of state {} sum to {}",
                              state_name(static_cast<HealthState>(s)), sum));
  }
}

std::span<const std::uint32_t> DiseaseModel::configurations_for_entry(
    HealthState s) const noexcept {
  return configs_by_entry_[static_cast<std::size_t>(s)];
}

std::span<const std::uint32_t> DiseaseModel::edges_from(HealthState s) const noexcept {
  return edges_by_state_[static_cast<std::size_t>(s)];
}

DiseaseModel default_seir_model(double transmissibility) {
  const DwellSpec incubation{DwellSpec::Kind::discretized_gamma, 0.0, 2.0, 2.5};
  const DwellSpec infectious{DwellSpec::Kind::discretized_gamma, 0.0, 4.0, 2.0};
  return DiseaseModel(
      /*infectivity=*/{0.0, 0.0, 1.0, 1.0, 0.0},
      /*susceptibility=*/{1.0, 0.0, 0.0, 0.0, 0.0}, transmissibility,
      {{HealthState::S, HealthState::E, HealthState::Is, 1.0},
       {HealthState::S, HealthState::E, HealthState::Ia, 1.0}},
      {{HealthState::E, HealthState::Is, 0.67, incubation},
       {HealthState::E, HealthState::Ia, 0.33, incubation},
       {HealthState::Is, HealthState::R, 1.0, infectious},
       {HealthState::Ia, HealthState::R, 1.0, infectious}});
}

double effective_susceptibility(double person_scale, HealthState state,
                                const DiseaseModel& model) noexcept {
  return person_scale * model.susceptibility(state);
}

double effective_infectivity(double person_scale, HealthState state,
                             const DiseaseModel& model) noexcept {
  return person_scale * model.infectivity(state);
}

double propensity(double duration_seconds, double transmissibility,
                  double location_weight, double sigma_eff, double iota_eff,
                  double weight) noexcept {
  return (duration_seconds * transmissibility) * location_weight * sigma_eff *
         iota_eff * weight;
}

std::optional<TransmissionCandidate> sample_location_transmission(
    std::uint64_t susceptible_pid, HealthState susceptible_state,
    double susceptibility_scale, std::span<const ContactExposure> contacts,
    std::int64_t lid, double location_weight, const DiseaseModel& model,
    RngStream& rng, std::vector<ContactTriple>* triples_out) {
  if (contacts.empty()) return std::nullopt;

  // Two uniforms per call whatever the outcome: stream alignment must not
  // depend on the realized contact states.
  const double u_time = rng.uniform01_open();
  const double u_select = rng.uniform01_open();

  const double sigma_eff =
      effective_susceptibility(susceptibility_scale, susceptible_state, model);

  std::vector<ContactTriple> local;
  std::vector<ContactTriple>& triples = triples_out ? *triples_out : local;
  triples.clear();
  double total = 0.0;
  for (const auto& contact : contacts) {
    for (auto ci : model.configurations_for_entry(susceptible_state)) {
      const auto& cfg = model.configurations()[ci];
      if (cfg.contact != contact.state) continue;
      const double iota_eff =
          effective_infectivity(contact.infectivity_scale, contact.state, model);
      const double rho = propensity(contact.duration_seconds, model.transmissibility(),
                                    location_weight, sigma_eff, iota_eff, cfg.weight);
      triples.push_back({contact.person_index, contact.pid, cfg.exit, cfg.contact, rho});
      total += rho;
    }
  }
  if (total <= 0.0) return std::nullopt;

  const double waiting_time = -std::log(u_time) / total;
  if (waiting_time > model.step_duration()) return std::nullopt;

  // Cumulative-sum inversion with alpha in (0, total].
  const double alpha = u_select * total;
  double cumulative = 0.0;
  const ContactTriple* chosen = &triples.back();
  for (const auto& triple : triples) {
    cumulative += triple.rho;
    if (alpha <= cumulative) {
      chosen = &triple;
      break;
    }
  }
  return TransmissionCandidate{susceptible_pid, chosen->infector_pid,
                               chosen->infector_index, chosen->exit_state, lid,
                               chosen->rho};
}

namespace {

// Round half away from zero, then clamp into the step grid.
std::int64_t discretize_dwell(double value) {
  double rounded = std::round(value);
  if (rounded < 0.0) rounded = 0.0;
  return static_cast<std::int64_t>(rounded);
}

std::int64_t sample_dwell(const DwellSpec& dwell, RngStream& rng) {
  switch (dwell.kind) {
    case DwellSpec::Kind::fixed:
      return discretize_dwell(dwell.days);
    case DwellSpec::Kind::discretized_gamma: {
      std::gamma_distribution<double> dist(dwell.shape, dwell.scale);
      return discretize_dwell(dist(rng));
    }
  }
  return 0;
}

}  // namespace

std::optional<ScheduledProgression> sample_progression(HealthState state,
                                                       const DiseaseModel& model,
                                                       RngStream& rng,
                                                       std::int64_t current_step) {
  auto edges = model.edges_from(state);
  if (edges.empty()) return std::nullopt;

  const double u = rng.uniform01();
  double cumulative = 0.0;
  std::uint32_t edge_index = edges.back();
  for (auto i : edges) {
    cumulative += model.progression()[i].probability;
    if (u < cumulative) {
      edge_index = i;
      break;
    }
  }
  const auto& edge = model.progression()[edge_index];
  const std::int64_t dwell = sample_dwell(edge.dwell, rng);
  // Initialization enters at step -1; nothing can fire before the end of
  // step 0.
  const std::int64_t due = std::max<std::int64_t>(current_step + dwell, 0);
  return ScheduledProgression{edge.to, due};
}

}  // namespace episim
