#include <doctest.h>

#include <array>
#include <cmath>

#include <nlohmann/json.hpp>

#include "episim/behavior.hpp"
#include "episim/error.hpp"

using namespace episim;
using namespace episim::behavior;
using nlohmann::json;

namespace {

Person test_person(std::uint64_t pid, std::int64_t income = 50000) {
  Person p;
  p.pid = pid;
  p.hh_income = income;
  p.residence_lid = 1001018209;
  return p;
}

struct ContextFixture {
  Person person = test_person(1);
  std::array<LocalObservable, kNumObservableSlots> observables{};
  std::vector<GlobalObservablesRow> history;

  BehaviorContext ctx(std::int64_t t) {
    return BehaviorContext{
        t,
        static_cast<int>(t % 7),
        &person,
        HealthState::S,
        std::span<const LocalObservable, kNumObservableSlots>(observables),
        history,
        0};
  }
};

RngStream ctx_stream(std::uint64_t seed, std::int64_t t, std::uint64_t pid) {
  return RngStream(seed, RngPurpose::behavior, step_key(t), pid);
}

}  // namespace

TEST_CASE("base model never acts") {
  auto model = builtin("base", json::object(), 42);
  ContextFixture fx;
  auto rng = ctx_stream(42, 0, 1);
  CHECK(model->select_action(fx.ctx(0), rng) == Action{});
  CHECK(model->assign_class(fx.person) == 0);
}

TEST_CASE("unknown model and bad parameters are rejected") {
  CHECK_THROWS_AS(static_cast<void>(builtin("nonexistent", json::object(), 1)), Error);
  try {
    static_cast<void>(builtin("mask_distancing_fixed", json{{"fraction", 1.5}}, 1));
    FAIL("expected bad parameter");
  } catch (const Error& e) {
    CHECK(e.kind() == Error::Kind::bad_parameter);
  }
}

TEST_CASE("mask_distancing_fixed members always mask and distance") {
  auto model = builtin("mask_distancing_fixed", json{{"fraction", 0.7}}, 42);
  int members = 0;
  for (std::uint64_t pid = 1; pid <= 1000; ++pid) {
    ContextFixture fx;
    fx.person = test_person(pid);
    // Constant over time for a fixed seed.
    auto rng0 = ctx_stream(42, 0, pid);
    auto rng9 = ctx_stream(42, 9, pid);
    Action a0 = model->select_action(fx.ctx(0), rng0);
    Action a9 = model->select_action(fx.ctx(9), rng9);
    CHECK(a0 == a9);
    CHECK(a0.mask == a0.distancing);
    CHECK((model->assign_class(fx.person) == 1) == a0.mask);
    if (a0.mask) ++members;
  }
  CHECK(members > 600);
  CHECK(members < 800);
}

TEST_CASE("mask_distancing_random hits the target fraction each step") {
  auto model = builtin("mask_distancing_random", json::object(), 7);
  for (std::int64_t t : {0, 3}) {
    int masked = 0;
    const int n = 10000;
    for (std::uint64_t pid = 1; pid <= n; ++pid) {
      ContextFixture fx;
      fx.person = test_person(pid);
      auto rng = ctx_stream(7, t, pid);
      if (model->select_action(fx.ctx(t), rng).mask) ++masked;
    }
    CHECK(std::abs(static_cast<double>(masked) / n - 0.70) < 0.02);
  }
}

TEST_CASE("behavior selection is deterministic given (seed, step, pid)") {
  for (const auto& id : builtin_identifiers()) {
    auto model = builtin(id, json::object(), 99);
    ContextFixture fx;
    fx.person = test_person(17, 120000);
    auto r1 = ctx_stream(99, 5, 17);
    auto r2 = ctx_stream(99, 5, 17);
    CHECK(model->select_action(fx.ctx(5), r1) == model->select_action(fx.ctx(5), r2));
  }
}

TEST_CASE("visit_drop_mandated holds off until start_day") {
  auto model = builtin("visit_drop_mandated_random", json::object(), 3);
  ContextFixture fx;
  fx.person = test_person(4, 150000);

  auto rng7 = ctx_stream(3, 7, 4);
  Action before = model->select_action(fx.ctx(7), rng7);
  CHECK(before == Action{});

  auto rng8 = ctx_stream(3, 8, 4);
  Action after = model->select_action(fx.ctx(8), rng8);
  // Income above the threshold moves work home from start_day on.
  CHECK(after.no_work);
  CHECK_FALSE(after.mask);
}

TEST_CASE("visit_drop_mandated_fixed membership drops the non-home activities") {
  auto model = builtin("visit_drop_mandated_fixed", json{{"fraction", 1.0}}, 3);
  ContextFixture fx;
  fx.person = test_person(5, 10000);
  auto rng = ctx_stream(3, 10, 5);
  Action a = model->select_action(fx.ctx(10), rng);
  CHECK(a.no_other);
  CHECK(a.no_college);
  CHECK(a.no_shopping);
  CHECK(a.no_religion);
  CHECK(a.no_school);
  CHECK_FALSE(a.no_work);  // income below the threshold
  CHECK_FALSE(a.mask);
}

TEST_CASE("visit_drop_observed reacts to fresh symptomatic observations") {
  auto model = builtin("visit_drop_observed", json::object(), 1);
  ContextFixture fx;
  const std::int64_t t = 10;

  auto& shopping = fx.observables[observable_slot(activity_shopping)];
  shopping.obs_step = t - 3;
  shopping.symp_abs = 2;
  auto rng = ctx_stream(1, t, 1);
  Action a = model->select_action(fx.ctx(t), rng);
  CHECK(a.no_shopping);
  CHECK_FALSE(a.no_other);
  CHECK_FALSE(a.no_work);  // income below the threshold

  // A stale observation no longer qualifies.
  shopping.obs_step = t - 7;
  auto rng2 = ctx_stream(1, t, 1);
  CHECK_FALSE(model->select_action(fx.ctx(t), rng2).no_shopping);

  // Never-observed slots never qualify.
  shopping.obs_step = -1;
  auto rng3 = ctx_stream(1, t, 1);
  CHECK_FALSE(model->select_action(fx.ctx(t), rng3).no_shopping);

  // High income couples the work drop to the work observable.
  fx.person = test_person(1, 100000);
  auto& work = fx.observables[observable_slot(activity_work)];
  work.obs_step = t - 1;
  work.symp_abs = 1;
  auto rng4 = ctx_stream(1, t, 1);
  CHECK(model->select_action(fx.ctx(t), rng4).no_work);
}

TEST_CASE("action scales multiply per active measure") {
  ScalingFactors scales;
  CHECK(action_scales({}, scales).susceptibility == 1.0);
  CHECK(action_scales({}, scales).infectivity == 1.0);

  Action mask;
  mask.mask = true;
  CHECK(action_scales(mask, scales).susceptibility == doctest::Approx(0.8));
  CHECK(action_scales(mask, scales).infectivity == doctest::Approx(0.8));

  Action both;
  both.mask = both.distancing = true;
  CHECK(action_scales(both, scales).susceptibility == doctest::Approx(0.64));
  CHECK(action_scales(both, scales).infectivity == doctest::Approx(0.64));
}

TEST_CASE("apply_action_to_day remaps dropped visits to the residence") {
  Person person = test_person(5586585);
  std::vector<Visit> day{
      {0, 5586585, 0, activity_home, 0, 27900, 27900, 1001018209},
      {0, 5586585, 2, activity_work, 28800, 45900, 17100, 82246},
      {0, 5586585, 4, activity_other, 46800, 48000, 1200, 86726},
  };

  SUBCASE("all-zero action changes nothing") {
    auto out = apply_action_to_day({}, person, day);
    REQUIRE(out.size() == 3);
    for (std::size_t i = 0; i < day.size(); ++i) CHECK(out[i].lid == day[i].lid);
  }

  SUBCASE("no_work moves the work interval home, times and type unchanged") {
    Action a;
    a.no_work = true;
    auto out = apply_action_to_day(a, person, day);
    CHECK(out[1].lid == 1001018209);
    CHECK(out[1].start_time == 28800);
    CHECK(out[1].end_time == 45900);
    CHECK(out[1].activity_type == activity_work);
    CHECK(out[0].lid == day[0].lid);
    CHECK(out[2].lid == day[2].lid);
  }

  SUBCASE("dropping an absent type is a no-op; home is never remapped") {
    Action a;
    a.no_shopping = true;
    auto out = apply_action_to_day(a, person, day);
    for (std::size_t i = 0; i < day.size(); ++i) CHECK(out[i].lid == day[i].lid);

    Action all;
    all.no_other = all.no_college = all.no_shopping = all.no_religion =
        all.no_school = all.no_work = true;
    person.residence_lid = 555;
    auto remapped = apply_action_to_day(all, person, day);
    CHECK(remapped[0].lid == 1001018209);  // home stays put
    CHECK(remapped[1].lid == 555);
    CHECK(remapped[2].lid == 555);
  }
}
