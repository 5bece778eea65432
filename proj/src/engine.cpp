#include "episim/engine.hpp"

#include <algorithm>
#include <chrono>
#include <exception>
#include <fmt/format.h>
#include <map>
#include <thread>
#include <unordered_map>

#include "episim/error.hpp"
#include "episim/log.hpp"

namespace episim {

std::vector<Contact> compute_contacts(std::int64_t lid, int day,
                                      std::span<const EffectiveVisit> visits,
                                      double contact_probability, RngStream& rng) {
  // Transit visits carry zero contact weight; they never enter the pairing.
  std::vector<std::uint32_t> eligible;
  eligible.reserve(visits.size());
  for (std::uint32_t i = 0; i < visits.size(); ++i)
    if (visits[i].activity_type != activity_transit) eligible.push_back(i);

  std::vector<Contact> out;
  for (std::size_t a = 0; a < eligible.size(); ++a) {
    const auto& va = visits[eligible[a]];
    for (std::size_t b = a + 1; b < eligible.size(); ++b) {
      const auto& vb = visits[eligible[b]];
      if (vb.start_time >= va.end_time) break;  // sorted by start_time
      const std::int64_t overlap =
          std::min(va.end_time, vb.end_time) - vb.start_time;
      if (overlap <= 0) continue;
      if (va.person_index == vb.person_index) continue;
      // One Bernoulli per overlapping pair, in enumeration order.
      if (rng.uniform01() < contact_probability)
        out.push_back({va.person_index, vb.person_index, lid, overlap, day});
    }
  }
  return out;
}

std::vector<behavior::LocalObservable> snapshot_observables(
    std::int64_t lid, std::span<const EffectiveVisit> visits,
    std::span<const HealthState> states, std::span<const behavior::Action> actions) {
  std::vector<behavior::LocalObservable> out(visits.size());
  for (std::size_t k = 0; k < visits.size(); ++k) {
    const auto& v = visits[k];
    std::int64_t n = 0, symp = 0, mask = 0, distancing = 0;
    for (std::size_t j = 0; j < visits.size(); ++j) {
      const auto& u = visits[j];
      if (u.start_time > v.start_time) break;  // sorted by start_time
      bool present = v.start_time < u.end_time;
      if (j == k && v.start_time == v.end_time) present = true;  // zero-duration self
      if (!present) continue;
      ++n;
      if (states[u.person_index] == HealthState::Is) ++symp;
      if (actions[u.person_index].mask) ++mask;
      if (actions[u.person_index].distancing) ++distancing;
    }
    auto& obs = out[k];
    obs.obs_step = -1;
    obs.pid = v.pid;
    obs.lid = lid;
    obs.activity_type = v.activity_type;
    obs.n_total = n;
    obs.symp_abs = symp;
    obs.mask_abs = mask;
    obs.distancing_abs = distancing;
    if (n > 0) {
      obs.symp_rel = static_cast<double>(symp) / static_cast<double>(n);
      obs.mask_rel = static_cast<double>(mask) / static_cast<double>(n);
      obs.distancing_rel = static_cast<double>(distancing) / static_cast<double>(n);
    }
  }
  return out;
}

std::vector<int> partition_locations(
    std::span<const std::pair<std::int64_t, std::uint64_t>> location_loads,
    int num_workers) {
  std::vector<std::size_t> order(location_loads.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (location_loads[a].second != location_loads[b].second)
      return location_loads[a].second > location_loads[b].second;
    return location_loads[a].first < location_loads[b].first;
  });

  std::vector<int> assignment(location_loads.size(), 0);
  std::vector<std::uint64_t> totals(static_cast<std::size_t>(num_workers), 0);
  for (auto idx : order) {
    int best = 0;
    for (int w = 1; w < num_workers; ++w)
      if (totals[static_cast<std::size_t>(w)] < totals[static_cast<std::size_t>(best)])
        best = w;
    assignment[idx] = best;
    totals[static_cast<std::size_t>(best)] += location_loads[idx].second;
  }
  return assignment;
}

std::array<std::int64_t, kNumHealthStates> SimulationState::state_counts() const {
  std::array<std::int64_t, kNumHealthStates> counts{};
  for (auto s : states) ++counts[static_cast<std::size_t>(s)];
  return counts;
}

struct Simulation::WorkerBatch {
  struct SnapshotUpdate {
    std::uint32_t person_index;
    int slot;
    std::uint32_t day_slot;
    behavior::LocalObservable observable;
  };
  std::vector<TransmissionCandidate> candidates;
  std::vector<SnapshotUpdate> snapshots;
  std::vector<PropensityTraceEntry> trace;
};

Simulation::Simulation(const Config& config, const Population& population,
                       const DiseaseModel& disease,
                       const behavior::BehaviorModel& model,
                       std::vector<PropensityTraceEntry>* trace)
    : config_(config),
      population_(population),
      disease_(disease),
      model_(model),
      trace_(trace) {
  const std::size_t n = population_.size();
  if (config_.initial_exposed > static_cast<std::int64_t>(n))
    throw Error(Error::Kind::too_many_exposed,
                fmt::format("initial_exposed {} exceeds population size {}",
                            config_.initial_exposed, n));

  state_.states.assign(n, HealthState::S);
  state_.scheduled.assign(n, std::nullopt);
  state_.beta_susceptibility.assign(n, 1.0);
  state_.beta_infectivity.assign(n, 1.0);
  state_.observables.resize(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    for (int slot = 0; slot < kNumObservableSlots; ++slot) {
      auto& obs = state_.observables[i][static_cast<std::size_t>(slot)];
      obs.obs_step = -1;
      obs.pid = population_.persons[i].pid;
      obs.lid = 0;
      obs.activity_type = slot + 1;
    }
  }

  outputs_.population_size = n;
  outputs_.pids.reserve(n);
  outputs_.model_classes.reserve(n);
  for (const auto& p : population_.persons) {
    outputs_.pids.push_back(p.pid);
    outputs_.model_classes.push_back(model_.assign_class(p));
  }

  location_ids_ = population_.location_ids;
  partition_ = partition_locations(population_.location_loads(), config_.num_workers);

  // Seed the initial exposed set: a uniformly random subset via partial
  // Fisher-Yates, applied in pid order.
  const auto k = static_cast<std::size_t>(config_.initial_exposed);
  std::vector<std::uint32_t> indices(n);
  for (std::uint32_t i = 0; i < n; ++i) indices[i] = i;
  RngStream init_rng(config_.seed, RngPurpose::init_exposed);
  for (std::size_t i = 0; i < k; ++i)
    std::swap(indices[i], indices[i + init_rng.below(n - i)]);
  std::vector<std::uint32_t> exposed(indices.begin(),
                                     indices.begin() + static_cast<std::ptrdiff_t>(k));
  std::sort(exposed.begin(), exposed.end(), [&](std::uint32_t a, std::uint32_t b) {
    return population_.persons[a].pid < population_.persons[b].pid;
  });
  for (auto i : exposed) {
    const auto pid = population_.persons[i].pid;
    state_.states[i] = HealthState::E;
    outputs_.transitions.push_back({-1, state_code(HealthState::E), pid, -1});
    RngStream prog_rng(config_.seed, RngPurpose::progression, step_key(-1), pid);
    state_.scheduled[i] = sample_progression(HealthState::E, disease_, prog_rng, -1);
  }
}

void Simulation::process_location(std::int64_t t, int weekday, std::int64_t lid,
                                  std::span<const EffectiveVisit> visits,
                                  std::span<const behavior::Action> actions,
                                  WorkerBatch& batch) const {
  const double location_weight = population_.location_weight(lid);

  auto snapshots = snapshot_observables(lid, visits, state_.states, actions);
  for (std::size_t k = 0; k < visits.size(); ++k) {
    const auto& v = visits[k];
    if (v.activity_type < activity_home || v.activity_type > activity_religion)
      continue;
    batch.snapshots.push_back(
        {v.person_index, observable_slot(v.activity_type), v.day_slot, snapshots[k]});
  }

  RngStream contact_rng(config_.seed, RngPurpose::contacts, step_key(t),
                        static_cast<std::uint64_t>(lid));
  auto contacts = compute_contacts(lid, weekday, visits, config_.contact_probability,
                                   contact_rng);

  // Per-susceptible contact lists; std::map keeps person order deterministic.
  std::map<std::uint32_t, std::vector<ContactExposure>> exposures;
  auto add_exposure = [&](std::uint32_t to, std::uint32_t from, std::int64_t overlap) {
    if (!disease_.is_entry_state(state_.states[to])) return;
    exposures[to].push_back({from, population_.persons[from].pid, state_.states[from],
                             static_cast<double>(overlap),
                             state_.beta_infectivity[from]});
  };
  for (const auto& c : contacts) {
    add_exposure(c.a_index, c.b_index, c.overlap_seconds);
    add_exposure(c.b_index, c.a_index, c.overlap_seconds);
  }

  std::vector<ContactTriple> triples;
  for (auto& [person, contact_list] : exposures) {
    std::stable_sort(contact_list.begin(), contact_list.end(),
                     [](const ContactExposure& a, const ContactExposure& b) {
                       return a.person_index < b.person_index;
                     });
    const auto pid = population_.persons[person].pid;
    RngStream rng(config_.seed, RngPurpose::transmission, step_key(t),
                  static_cast<std::uint64_t>(lid), pid);
    auto candidate = sample_location_transmission(
        pid, state_.states[person], state_.beta_susceptibility[person], contact_list,
        lid, location_weight, disease_, rng, trace_ ? &triples : nullptr);
    if (trace_) {
      for (const auto& triple : triples)
        batch.trace.push_back({t, lid, pid, triple.infector_pid,
                               state_code(triple.exit_state),
                               state_code(triple.contact_state), triple.rho});
    }
    if (candidate) batch.candidates.push_back(*candidate);
  }
}

void Simulation::step() {
  const char* phase = "actions";
  try {
    step_phases(phase);
  } catch (const Error& e) {
    throw Error(e.kind(),
                fmt::format("step {} ({}): {}", state_.step, phase, e.what()));
  } catch (const std::exception& e) {
    throw Error(Error::Kind::validation,
                fmt::format("step {} ({}): {}", state_.step, phase, e.what()));
  }
}

void Simulation::step_phases(const char*& phase) {
  const std::int64_t t = state_.step;
  const int weekday = static_cast<int>(t % 7);
  const std::size_t n = population_.size();
  const auto started = std::chrono::steady_clock::now();

  // Phase 1: every person picks an action; scaling factors follow.
  const behavior::ScalingFactors scaling{
      config_.mask_inf_scale, config_.mask_susc_scale,
      config_.distancing_inf_scale, config_.distancing_susc_scale};
  std::vector<behavior::Action> actions(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    const auto& person = population_.persons[i];
    const behavior::BehaviorContext ctx{
        t,
        weekday,
        &person,
        state_.states[i],
        std::span<const behavior::LocalObservable, kNumObservableSlots>(
            state_.observables[i]),
        state_.global_history,
        outputs_.model_classes[i]};
    RngStream rng(config_.seed, RngPurpose::behavior, step_key(t), person.pid);
    actions[i] = model_.select_action(ctx, rng);
    outputs_.actions.push_back({t, person.pid, actions[i]});
    const auto scales = behavior::action_scales(actions[i], scaling);
    state_.beta_susceptibility[i] = scales.susceptibility;
    state_.beta_infectivity[i] = scales.infectivity;
  }

  phase = "visit remapping";
  // Phase 2: remap the day's visits and group them by location.
  std::unordered_map<std::int64_t, std::vector<EffectiveVisit>> by_location;
  for (std::uint32_t i = 0; i < n; ++i) {
    const auto& person = population_.persons[i];
    auto effective = behavior::apply_action_to_day(actions[i], person,
                                                   population_.day_visits(i, weekday));
    for (std::uint32_t k = 0; k < effective.size(); ++k) {
      const auto& v = effective[k];
      by_location[v.lid].push_back(
          {i, person.pid, v.activity_type, v.start_time, v.end_time, k});
    }
  }
  for (auto& [lid, visits] : by_location)
    std::sort(visits.begin(), visits.end(),
              [](const EffectiveVisit& a, const EffectiveVisit& b) {
                if (a.start_time != b.start_time) return a.start_time < b.start_time;
                if (a.pid != b.pid) return a.pid < b.pid;
                return a.day_slot < b.day_slot;
              });

  phase = "location processing";
  // Phase 3: contacts, snapshots, and per-location Gillespie draws; workers
  // own disjoint location partitions and only read shared state.
  const int num_workers = config_.num_workers;
  std::vector<WorkerBatch> batches(static_cast<std::size_t>(num_workers));
  auto run_worker = [&](int w) {
    auto& batch = batches[static_cast<std::size_t>(w)];
    for (std::size_t li = 0; li < location_ids_.size(); ++li) {
      if (partition_[li] != w) continue;
      auto it = by_location.find(location_ids_[li]);
      if (it == by_location.end()) continue;
      process_location(t, weekday, location_ids_[li], it->second, actions, batch);
    }
  };
  if (num_workers == 1) {
    run_worker(0);
  } else {
    std::vector<std::thread> threads;
    std::vector<std::exception_ptr> failures(static_cast<std::size_t>(num_workers));
    for (int w = 1; w < num_workers; ++w)
      threads.emplace_back([&, w] {
        try {
          run_worker(w);
        } catch (...) {
          failures[static_cast<std::size_t>(w)] = std::current_exception();
        }
      });
    try {
      run_worker(0);
    } catch (...) {
      failures[0] = std::current_exception();
    }
    for (auto& thread : threads) thread.join();
    for (auto& failure : failures)
      if (failure) std::rethrow_exception(failure);
  }

  phase = "candidate merge";
  // Phase 4: merge candidates; the final infector is drawn proportionally to
  // the single propensity each location returned.
  std::vector<TransmissionCandidate> candidates;
  for (auto& batch : batches)
    candidates.insert(candidates.end(), batch.candidates.begin(),
                      batch.candidates.end());
  std::sort(candidates.begin(), candidates.end(),
            [](const TransmissionCandidate& a, const TransmissionCandidate& b) {
              if (a.susceptible_pid != b.susceptible_pid)
                return a.susceptible_pid < b.susceptible_pid;
              return a.lid < b.lid;
            });
  std::unordered_map<std::uint32_t, TransmissionCandidate> chosen;
  for (std::size_t i = 0; i < candidates.size();) {
    std::size_t j = i;
    double total = 0.0;
    while (j < candidates.size() &&
           candidates[j].susceptible_pid == candidates[i].susceptible_pid) {
      total += candidates[j].rho;
      ++j;
    }
    RngStream rng(config_.seed, RngPurpose::infector_merge, step_key(t),
                  candidates[i].susceptible_pid);
    const double alpha = rng.uniform01_open() * total;
    double cumulative = 0.0;
    std::size_t pick = j - 1;
    for (std::size_t k = i; k < j; ++k) {
      cumulative += candidates[k].rho;
      if (alpha <= cumulative) {
        pick = k;
        break;
      }
    }
    chosen.emplace(population_.pid_to_index.at(candidates[pick].susceptible_pid),
                   candidates[pick]);
    i = j;
  }

  if (trace_) {
    std::vector<PropensityTraceEntry> step_trace;
    for (auto& batch : batches)
      step_trace.insert(step_trace.end(), batch.trace.begin(), batch.trace.end());
    std::sort(step_trace.begin(), step_trace.end(),
              [](const PropensityTraceEntry& a, const PropensityTraceEntry& b) {
                return std::tie(a.susceptible_pid, a.lid, a.infector_pid, a.exit_state,
                                a.contact_state) <
                       std::tie(b.susceptible_pid, b.lid, b.infector_pid, b.exit_state,
                                b.contact_state);
              });
    trace_->insert(trace_->end(), step_trace.begin(), step_trace.end());
  }

  phase = "state application";
  // Phase 5: state changes land at the end of the step. Transmission first
  // (it overrides any progression scheduled for today), then every due
  // progression, chaining zero-dwell hops within the step.
  for (std::uint32_t i = 0; i < n; ++i) {
    const auto pid = population_.persons[i].pid;
    std::optional<RngStream> prog_rng;
    auto rng = [&]() -> RngStream& {
      if (!prog_rng)
        prog_rng.emplace(config_.seed, RngPurpose::progression, step_key(t), pid);
      return *prog_rng;
    };
    if (auto it = chosen.find(i); it != chosen.end()) {
      const auto& cand = it->second;
      state_.scheduled[i].reset();
      state_.states[i] = cand.exit_state;
      outputs_.transitions.push_back({t, state_code(cand.exit_state), pid,
                                      static_cast<std::int64_t>(cand.infector_pid)});
      state_.scheduled[i] = sample_progression(cand.exit_state, disease_, rng(), t);
    }
    while (state_.scheduled[i] && state_.scheduled[i]->due_step <= t) {
      const HealthState next = state_.scheduled[i]->next;
      state_.states[i] = next;
      outputs_.transitions.push_back({t, state_code(next), pid, -1});
      state_.scheduled[i] = sample_progression(next, disease_, rng(), t);
    }
  }

  phase = "observables";
  // Phase 6: newest snapshot per (person, activity type), then the global row.
  std::vector<std::array<std::int32_t, kNumObservableSlots>> best(n);
  for (auto& slots : best) slots.fill(-1);
  for (const auto& batch : batches) {
    for (const auto& update : batch.snapshots) {
      auto& current = best[update.person_index][static_cast<std::size_t>(update.slot)];
      if (static_cast<std::int32_t>(update.day_slot) > current) {
        current = static_cast<std::int32_t>(update.day_slot);
        auto obs = update.observable;
        obs.obs_step = t;
        state_.observables[update.person_index][static_cast<std::size_t>(update.slot)] =
            obs;
      }
    }
  }
  if (config_.write_local_observables) {
    if (pid_order_.empty() && n > 0) {
      pid_order_.resize(n);
      for (std::uint32_t i = 0; i < n; ++i) pid_order_[i] = i;
      std::sort(pid_order_.begin(), pid_order_.end(),
                [&](std::uint32_t a, std::uint32_t b) {
                  return population_.persons[a].pid < population_.persons[b].pid;
                });
    }
    for (auto i : pid_order_)
      for (int slot = 0; slot < kNumObservableSlots; ++slot)
        outputs_.local_observables.push_back(
            {t, population_.persons[i].pid,
             state_.observables[i][static_cast<std::size_t>(slot)]});
  }

  behavior::GlobalObservablesRow row;
  row.iteration = t;
  row.counts = state_.state_counts();
  for (int s = 0; s < kNumHealthStates; ++s)
    row.fractions[static_cast<std::size_t>(s)] =
        n == 0 ? 0.0
               : static_cast<double>(row.counts[static_cast<std::size_t>(s)]) /
                     static_cast<double>(n);
  state_.global_history.push_back(row);
  outputs_.global.push_back(row);

  ++state_.step;
  if (log_level() >= LogLevel::debug) {
    const auto elapsed = std::chrono::duration_cast<std::chrono::microseconds>(
        std::chrono::steady_clock::now() - started);
    log_debug("step {} ({} us): {} candidates, {} infected", t, elapsed.count(),
              candidates.size(), chosen.size());
  }
}

void Simulation::run_all() {
  while (state_.step < config_.iterations) step();
}

SimulationOutputs Simulation::take_outputs() {
  outputs_.iterations = state_.step;
  outputs_.final_states = state_.states;
  return std::move(outputs_);
}

SimulationOutputs run(const Config& config, const Population& population,
                      const DiseaseModel& disease,
                      const behavior::BehaviorModel& model,
                      std::vector<PropensityTraceEntry>* trace) {
  Simulation sim(config, population, disease, model, trace);
  sim.run_all();
  return sim.take_outputs();
}

}  // namespace episim
