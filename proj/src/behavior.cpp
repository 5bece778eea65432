#include "episim/behavior.hpp"

#include <fmt/format.h>

#include <nlohmann/json.hpp>

#include "episim/error.hpp"

namespace episim::behavior {

using nlohmann::json;

namespace {

struct Params {
  double fraction = 0.0;
  std::int64_t start_day = 8;
  std::int64_t income_threshold = 100000;
  std::int64_t window_days = 7;
};

Params parse_params(const json& params, double default_fraction) {
  Params out;
  out.fraction = default_fraction;
  if (!params.is_object())
    throw Error(Error::Kind::bad_parameter, "behavior params must be an object");
  for (const auto& [key, value] : params.items()) {
    if (key == "fraction") {
      if (!value.is_number() || value.get<double>() < 0.0 || value.get<double>() > 1.0)
        throw Error(Error::Kind::bad_parameter, "fraction must be a number in [0, 1]");
      out.fraction = value.get<double>();
    } else if (key == "start_day") {
      if (!value.is_number_integer() || value.get<std::int64_t>() < 0)
        throw Error(Error::Kind::bad_parameter, "start_day must be an integer >= 0");
      out.start_day = value.get<std::int64_t>();
    } else if (key == "income_threshold") {
      if (!value.is_number_integer())
        throw Error(Error::Kind::bad_parameter, "income_threshold must be an integer");
      out.income_threshold = value.get<std::int64_t>();
    } else if (key == "window_days") {
      if (!value.is_number_integer() || value.get<std::int64_t>() < 0)
        throw Error(Error::Kind::bad_parameter, "window_days must be an integer >= 0");
      out.window_days = value.get<std::int64_t>();
    } else {
      throw Error(Error::Kind::bad_parameter,
                  fmt::format("unknown behavior parameter '{}'", key));
    }
  }
  return out;
}

// Membership of fixed random subsets: a seeded hash of (seed, model, pid)
// against the fraction. Reproducible and independent of call order.
bool fixed_member(std::uint64_t seed, std::string_view model_name, std::uint64_t pid,
                  double fraction) {
  RngStream rng(seed, RngPurpose::membership, key_from_string(model_name), pid);
  return rng.uniform01() < fraction;
}

class BaseModel final : public BehaviorModel {
 public:
  explicit BaseModel(std::string name) : name_(std::move(name)) {}
  std::string_view name() const noexcept override { return name_; }
  int assign_class(const Person&) const override { return 0; }
  Action select_action(const BehaviorContext&, RngStream&) const override {
    return {};
  }

 private:
  std::string name_;
};

class MaskDistancingRandom final : public BehaviorModel {
 public:
  explicit MaskDistancingRandom(Params p) : params_(p) {}
  std::string_view name() const noexcept override { return "mask_distancing_random"; }
  int assign_class(const Person&) const override { return 0; }
  Action select_action(const BehaviorContext&, RngStream& rng) const override {
    Action a;
    if (rng.uniform01() < params_.fraction) a.mask = a.distancing = true;
    return a;
  }

 private:
  Params params_;
};

class MaskDistancingFixed final : public BehaviorModel {
 public:
  MaskDistancingFixed(Params p, std::uint64_t seed) : params_(p), seed_(seed) {}
  std::string_view name() const noexcept override { return "mask_distancing_fixed"; }
  int assign_class(const Person& person) const override {
    return fixed_member(seed_, name(), person.pid, params_.fraction) ? 1 : 0;
  }
  Action select_action(const BehaviorContext& ctx, RngStream&) const override {
    Action a;
    if (fixed_member(seed_, name(), ctx.person->pid, params_.fraction))
      a.mask = a.distancing = true;
    return a;
  }

 private:
  Params params_;
  std::uint64_t seed_;
};

class VisitDropMandated final : public BehaviorModel {
 public:
  VisitDropMandated(Params p, std::uint64_t seed, bool fixed_subset)
      : params_(p), seed_(seed), fixed_subset_(fixed_subset) {}
  std::string_view name() const noexcept override {
    return fixed_subset_ ? "visit_drop_mandated_fixed" : "visit_drop_mandated_random";
  }
  int assign_class(const Person& person) const override {
    if (!fixed_subset_) return 0;
    return fixed_member(seed_, name(), person.pid, params_.fraction) ? 1 : 0;
  }
  Action select_action(const BehaviorContext& ctx, RngStream& rng) const override {
    Action a;
    if (ctx.time_step < params_.start_day) return a;
    const bool member = fixed_subset_
                            ? fixed_member(seed_, name(), ctx.person->pid, params_.fraction)
                            : rng.uniform01() < params_.fraction;
    if (member) {
      a.no_other = a.no_college = a.no_shopping = a.no_religion = a.no_school = true;
    }
    if (ctx.person->hh_income >= params_.income_threshold) a.no_work = true;
    return a;
  }

 private:
  Params params_;
  std::uint64_t seed_;
  bool fixed_subset_;
};

class VisitDropObserved final : public BehaviorModel {
 public:
  explicit VisitDropObserved(Params p) : params_(p) {}
  std::string_view name() const noexcept override { return "visit_drop_observed"; }
  int assign_class(const Person& person) const override {
    return person.hh_income >= params_.income_threshold ? 1 : 0;
  }
  Action select_action(const BehaviorContext& ctx, RngStream&) const override {
    Action a;
    auto recent_symptomatic = [&](int activity_type) {
      const auto& obs = ctx.observables[observable_slot(activity_type)];
      if (obs.obs_step < 0) return false;
      return ctx.time_step - obs.obs_step < params_.window_days && obs.symp_abs >= 1;
    };
    a.no_shopping = recent_symptomatic(activity_shopping);
    a.no_other = recent_symptomatic(activity_other);
    a.no_school = recent_symptomatic(activity_school);
    a.no_college = recent_symptomatic(activity_college);
    a.no_religion = recent_symptomatic(activity_religion);
    if (ctx.person->hh_income >= params_.income_threshold)
      a.no_work = recent_symptomatic(activity_work);
    return a;
  }

 private:
  Params params_;
};

}  // namespace

std::vector<std::string> builtin_identifiers() {
  return {"default",
          "base",
          "mask_distancing_random",
          "mask_distancing_fixed",
          "visit_drop_mandated_random",
          "visit_drop_mandated_fixed",
          "visit_drop_observed"};
}

std::unique_ptr<BehaviorModel> builtin(std::string_view identifier,
                                       const nlohmann::json& params,
                                       std::uint64_t run_seed) {
  if (identifier == "default" || identifier == "base") {
    if (!params.is_object() || !params.empty())
      throw Error(Error::Kind::bad_parameter,
                  fmt::format("model '{}' takes no parameters", identifier));
    return std::make_unique<BaseModel>(std::string(identifier));
  }
  if (identifier == "mask_distancing_random")
    return std::make_unique<MaskDistancingRandom>(parse_params(params, 0.70));
  if (identifier == "mask_distancing_fixed")
    return std::make_unique<MaskDistancingFixed>(parse_params(params, 0.70), run_seed);
  if (identifier == "visit_drop_mandated_random")
    return std::make_unique<VisitDropMandated>(parse_params(params, 0.75), run_seed,
                                               false);
  if (identifier == "visit_drop_mandated_fixed")
    return std::make_unique<VisitDropMandated>(parse_params(params, 0.75), run_seed,
                                               true);
  if (identifier == "visit_drop_observed")
    return std::make_unique<VisitDropObserved>(parse_params(params, 0.0));
  throw Error(Error::Kind::unknown_model,
              fmt::format("unknown behavior model '{}'", identifier));
}

BetaScales action_scales(const Action& action, const ScalingFactors& scales) noexcept {
  BetaScales out;
  if (action.mask) {
    out.susceptibility *= scales.mask_susc_scale;
    out.infectivity *= scales.mask_inf_scale;
  }
  if (action.distancing) {
    out.susceptibility *= scales.distancing_susc_scale;
    out.infectivity *= scales.distancing_inf_scale;
  }
  return out;
}

std::vector<Visit> apply_action_to_day(const Action& action, const Person& person,
                                       std::span<const Visit> day_visits) {
  std::vector<Visit> out(day_visits.begin(), day_visits.end());
  for (auto& v : out)
    if (action.drops(v.activity_type)) v.lid = person.residence_lid;
  return out;
}

}  // namespace episim::behavior
