#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "episim/behavior.hpp"
#include "episim/config.hpp"
#include "episim/disease.hpp"
#include "episim/population.hpp"
#include "episim/rng.hpp"

namespace episim {

// One visit after the day's action remapping. `day_slot` is the visit's
// position in the person's sorted day schedule; it makes observable merging
// across workers order-free.
struct EffectiveVisit {
  std::uint32_t person_index = 0;
  std::uint64_t pid = 0;
  int activity_type = activity_home;
  std::int64_t start_time = 0;
  std::int64_t end_time = 0;
  std::uint32_t day_slot = 0;
};

struct Contact {
  std::uint32_t a_index = 0;
  std::uint32_t b_index = 0;
  std::int64_t lid = 0;
  std::int64_t overlap_seconds = 0;
  int day = 0;
};

// Every unordered pair of temporally overlapping, non-transit visits by
// distinct persons, thinned by one Bernoulli(contact_probability) draw per
// pair in enumeration order. `visits` must be sorted by (start_time, pid).
std::vector<Contact> compute_contacts(std::int64_t lid, int day,
                                      std::span<const EffectiveVisit> visits,
                                      double contact_probability, RngStream& rng);

// Start-of-visit occupancy snapshot for every visit: all visits u (observer
// included) with u.start <= v.start < u.end, plus v itself when v has zero
// duration. States are the start-of-day states; mask/distancing read the
// day's actions. obs_step is left at -1 for the caller to stamp.
std::vector<behavior::LocalObservable> snapshot_observables(
    std::int64_t lid, std::span<const EffectiveVisit> visits,
    std::span<const HealthState> states, std::span<const behavior::Action> actions);

// Locations spread over workers, balanced by weekly visit count; worker of
// location_ids[i] is assignment[i]. Deterministic in its inputs.
std::vector<int> partition_locations(
    std::span<const std::pair<std::int64_t, std::uint64_t>> location_loads,
    int num_workers);

struct TransitionRecord {
  std::int64_t iteration = 0;  // -1 for initialization
  int state = 0;               // new state code
  std::uint64_t p1_pid = 0;
  std::int64_t p2_pid = -1;    // infector pid for transmissions, else -1
};

struct ActionRecord {
  std::int64_t iteration = 0;
  std::uint64_t pid = 0;
  behavior::Action action;
};

struct LocalObservableRecord {
  std::int64_t iteration = 0;
  std::uint64_t pid = 0;
  behavior::LocalObservable observable;
};

struct PropensityTraceEntry {
  std::int64_t step = 0;
  std::int64_t lid = 0;
  std::uint64_t susceptible_pid = 0;
  std::uint64_t infector_pid = 0;
  int exit_state = 0;
  int contact_state = 0;
  double rho = 0.0;
};

struct SimulationOutputs {
  std::uint64_t population_size = 0;
  std::int64_t iterations = 0;
  std::vector<std::uint64_t> pids;  // dense order
  std::vector<int> model_classes;   // dense order
  std::vector<TransitionRecord> transitions;
  std::vector<ActionRecord> actions;
  std::vector<LocalObservableRecord> local_observables;
  std::vector<behavior::GlobalObservablesRow> global;
  std::vector<HealthState> final_states;
};

struct SimulationState {
  std::vector<HealthState> states;
  std::vector<std::optional<ScheduledProgression>> scheduled;
  std::vector<double> beta_susceptibility;  // current step, from actions
  std::vector<double> beta_infectivity;
  std::vector<std::array<behavior::LocalObservable, kNumObservableSlots>> observables;
  std::vector<behavior::GlobalObservablesRow> global_history;
  std::int64_t step = 0;

  std::array<std::int64_t, kNumHealthStates> state_counts() const;
};

class Simulation {
 public:
  // Seeds `initial_exposed` uniformly random persons into E with progressions
  // sampled on entry and logged at iteration -1.
  Simulation(const Config& config, const Population& population,
             const DiseaseModel& disease, const behavior::BehaviorModel& model,
             std::vector<PropensityTraceEntry>* trace = nullptr);

  void step();
  void run_all();

  const SimulationState& state() const noexcept { return state_; }
  std::int64_t current_step() const noexcept { return state_.step; }
  SimulationOutputs take_outputs();

 private:
  struct WorkerBatch;
  void step_phases(const char*& phase);
  void process_location(std::int64_t t, int weekday, std::int64_t lid,
                        std::span<const EffectiveVisit> visits,
                        std::span<const behavior::Action> actions,
                        WorkerBatch& batch) const;

  const Config& config_;
  const Population& population_;
  const DiseaseModel& disease_;
  const behavior::BehaviorModel& model_;
  std::vector<PropensityTraceEntry>* trace_ = nullptr;

  SimulationState state_;
  SimulationOutputs outputs_;
  std::vector<std::int64_t> location_ids_;
  std::vector<int> partition_;            // worker of location_ids_[i]
  std::vector<std::uint32_t> pid_order_;  // dense indices sorted by pid
};

SimulationOutputs run(const Config& config, const Population& population,
                      const DiseaseModel& disease,
                      const behavior::BehaviorModel& model,
                      std::vector<PropensityTraceEntry>* trace = nullptr);

}  // namespace episim
