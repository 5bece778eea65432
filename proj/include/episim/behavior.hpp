#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "episim/disease.hpp"
#include "episim/population.hpp"
#include "episim/rng.hpp"

namespace episim::behavior {

// The eight per-day decisions of one person.
struct Action {
  bool mask = false;        // a1
  bool distancing = false;  // a2
  bool no_other = false;    // a3
  bool no_college = false;  // a4
  bool no_shopping = false; // a5
  bool no_religion = false; // a6
  bool no_school = false;   // a7
  bool no_work = false;     // a8

  bool drops(int activity_type) const noexcept {
    switch (activity_type) {
      case activity_other: return no_other;
      case activity_college: return no_college;
      case activity_shopping: return no_shopping;
      case activity_religion: return no_religion;
      case activity_school: return no_school;
      case activity_work: return no_work;
      default: return false;  // home and transit are never droppable
    }
  }

  bool operator==(const Action&) const = default;
};

// Snapshot taken at the start of a person's most recent visit for one
// activity type. Counts include the observer.
struct LocalObservable {
  std::int64_t obs_step = -1;  // -1: never recorded
  std::uint64_t pid = 0;
  std::int64_t lid = 0;
  int activity_type = 0;
  std::int64_t n_total = 0;
  std::int64_t symp_abs = 0;
  double symp_rel = 0.0;
  std::int64_t mask_abs = 0;
  double mask_rel = 0.0;
  std::int64_t distancing_abs = 0;
  double distancing_rel = 0.0;
};

// Population-wide per-step counts and fractions of each health state.
struct GlobalObservablesRow {
  std::int64_t iteration = 0;
  std::array<std::int64_t, kNumHealthStates> counts{};
  std::array<double, kNumHealthStates> fractions{};
};

struct BehaviorContext {
  std::int64_t time_step = 0;
  int weekday = 0;  // Monday = 0
  const Person* person = nullptr;
  HealthState state = HealthState::S;
  std::span<const LocalObservable, kNumObservableSlots> observables;
  std::span<const GlobalObservablesRow> global_history;
  int model_class = 0;
};

class BehaviorModel {
 public:
  virtual ~BehaviorModel() = default;
  virtual std::string_view name() const noexcept = 0;
  virtual int assign_class(const Person& person) const = 0;
  // Pure function of (context, stream); the stream is keyed by (step, pid).
  virtual Action select_action(const BehaviorContext& ctx, RngStream& rng) const = 0;
};

// Built-in model identifiers:
//   default, base                      -- no protective actions
//   mask_distancing_random             -- fraction of people re-drawn each step
//   mask_distancing_fixed              -- fixed random subset
//   visit_drop_mandated_random/_fixed  -- drop non-home/work from start_day,
//                                         high income works from home
//   visit_drop_observed                -- drop activities with recently
//                                         observed symptomatic cases
// Parameters (all optional): fraction, start_day, income_threshold,
// window_days. `run_seed` anchors fixed-subset membership.
std::unique_ptr<BehaviorModel> builtin(std::string_view identifier,
                                       const nlohmann::json& params,
                                       std::uint64_t run_seed);

std::vector<std::string> builtin_identifiers();

struct ScalingFactors {
  double mask_inf_scale = 0.8;
  double mask_susc_scale = 0.8;
  double distancing_inf_scale = 0.8;
  double distancing_susc_scale = 0.8;
};

// (susceptibility multiplier, infectivity multiplier) for one day's action.
struct BetaScales {
  double susceptibility = 1.0;
  double infectivity = 1.0;
};

BetaScales action_scales(const Action& action, const ScalingFactors& scales) noexcept;

// Dropped visits keep their times and activity type but move to the person's
// residence.
std::vector<Visit> apply_action_to_day(const Action& action, const Person& person,
                                       std::span<const Visit> day_visits);

}  // namespace episim::behavior
