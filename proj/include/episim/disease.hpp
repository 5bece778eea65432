#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "episim/rng.hpp"

namespace episim {

// Extended SEIR health states. The numeric codes are part of every output
// file format and must not change.
enum class HealthState : int { S = 0, E = 1, Is = 2, Ia = 3, R = 4 };

inline constexpr int kNumHealthStates = 5;

constexpr int state_code(HealthState s) noexcept { return static_cast<int>(s); }
std::string_view state_name(HealthState s) noexcept;
std::optional<HealthState> state_from_name(std::string_view name) noexcept;

// Dwell time distribution attached to a progression edge; sampled values are
// whole simulation steps.
struct DwellSpec {
  enum class Kind { fixed, discretized_gamma };
  Kind kind = Kind::fixed;
  double days = 0.0;   // fixed
  double shape = 1.0;  // gamma
  double scale = 1.0;  // gamma
};

// (entry, exit, contact): a person in `entry` switches to `exit` on contact
// with a person in `contact`.
struct TransmissionConfiguration {
  HealthState entry = HealthState::S;
  HealthState exit = HealthState::E;
  HealthState contact = HealthState::Is;
  double weight = 1.0;
};

struct ProgressionEdge {
  HealthState from = HealthState::E;
  HealthState to = HealthState::Is;
  double probability = 1.0;
  DwellSpec dwell;
};

class DiseaseModel {
 public:
  DiseaseModel(std::array<double, kNumHealthStates> infectivity,
               std::array<double, kNumHealthStates> susceptibility,
               double transmissibility,
               std::vector<TransmissionConfiguration> configurations,
               std::vector<ProgressionEdge> progression);

  double infectivity(HealthState s) const noexcept {
    return infectivity_[static_cast<std::size_t>(s)];
  }
  double susceptibility(HealthState s) const noexcept {
    return susceptibility_[static_cast<std::size_t>(s)];
  }
  double transmissibility() const noexcept { return transmissibility_; }
  // Duration of one time step, in step units: the Gillespie acceptance test
  // `a <= step_duration` with per-second-per-step transmissibility.
  double step_duration() const noexcept { return 1.0; }

  const std::vector<TransmissionConfiguration>& configurations() const noexcept {
    return configurations_;
  }
  const std::vector<ProgressionEdge>& progression() const noexcept {
    return progression_;
  }

  bool is_entry_state(HealthState s) const noexcept {
    return entry_state_[static_cast<std::size_t>(s)];
  }
  // Configuration indices with the given entry state, ordered by
  // (exit, contact, declaration order).
  std::span<const std::uint32_t> configurations_for_entry(HealthState s) const noexcept;
  // Progression edge indices leaving `s`, in declaration order.
  std::span<const std::uint32_t> edges_from(HealthState s) const noexcept;

 private:
  std::array<double, kNumHealthStates> infectivity_{};
  std::array<double, kNumHealthStates> susceptibility_{};
  double transmissibility_ = 0.0;
  std::vector<TransmissionConfiguration> configurations_;
  std::vector<ProgressionEdge> progression_;
  std::array<bool, kNumHealthStates> entry_state_{};
  std::array<std::vector<std::uint32_t>, kNumHealthStates> configs_by_entry_;
  std::array<std::vector<std::uint32_t>, kNumHealthStates> edges_by_state_;
};

// The stock model: E -> Is (p=0.67) / Ia (p=0.33), both infectious states
// recover; transmission via (S,E,Is) and (S,E,Ia) with unit weights.
DiseaseModel default_seir_model(double transmissibility = 0.0);

double effective_susceptibility(double person_scale, HealthState state,
                                const DiseaseModel& model) noexcept;
double effective_infectivity(double person_scale, HealthState state,
                             const DiseaseModel& model) noexcept;

// Instantaneous transmission rate of one contact configuration.
double propensity(double duration_seconds, double transmissibility,
                  double location_weight, double sigma_eff, double iota_eff,
                  double weight) noexcept;

// One contact of the susceptible person at a location: the other party, their
// state, the overlap duration, and their infectivity scaling for the day.
struct ContactExposure {
  std::uint32_t person_index = 0;
  std::uint64_t pid = 0;
  HealthState state = HealthState::S;
  double duration_seconds = 0.0;
  double infectivity_scale = 1.0;
};

struct TransmissionCandidate {
  std::uint64_t susceptible_pid = 0;
  std::uint64_t infector_pid = 0;
  std::uint32_t infector_index = 0;
  HealthState exit_state = HealthState::E;
  std::int64_t lid = 0;
  double rho = 0.0;  // propensity of the selected triple
};

// One applicable (p', exit, contact) triple with its propensity; exposed for
// tracing.
struct ContactTriple {
  std::uint32_t infector_index = 0;
  std::uint64_t infector_pid = 0;
  HealthState exit_state = HealthState::E;
  HealthState contact_state = HealthState::Is;
  double rho = 0.0;
};

// Direct Gillespie draw for one (person, location, step). Consumes exactly
// two uniforms from `rng` whenever `contacts` is non-empty, regardless of the
// outcome, so streams stay aligned. `contacts` must be sorted by the
// contact's person index. When `triples_out` is non-null it receives every
// applicable triple in selection order.
std::optional<TransmissionCandidate> sample_location_transmission(
    std::uint64_t susceptible_pid, HealthState susceptible_state,
    double susceptibility_scale, std::span<const ContactExposure> contacts,
    std::int64_t lid, double location_weight, const DiseaseModel& model,
    RngStream& rng, std::vector<ContactTriple>* triples_out = nullptr);

struct ScheduledProgression {
  HealthState next = HealthState::R;
  std::int64_t due_step = 0;  // fires at the end of this step
};

// Samples the next state and dwell upon entry to `state`; nothing for
// terminal states. The due step is current_step + dwell, never before step 0.
std::optional<ScheduledProgression> sample_progression(HealthState state,
                                                       const DiseaseModel& model,
                                                       RngStream& rng,
                                                       std::int64_t current_step);

}  // namespace episim
