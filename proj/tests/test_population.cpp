#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>

#include "episim/error.hpp"
#include "episim/population.hpp"

using namespace episim;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
  auto dir = fs::temp_directory_path() / "episim_pop_tests";
  fs::create_directories(dir);
  return dir;
}

fs::path write_file(const std::string& name, const std::string& content) {
  auto path = temp_dir() / name;
  std::ofstream out(path);
  out << content;
  return path;
}

const std::string kPersonHeader =
    "hid,pid,age,sex,employment_status,race,hispanic,designation,hh_size,"
    "hh_income,workers_in_family,lid,longitude,latitude,admin1,admin2,admin3,admin4\n";

const std::string kVisitHeader =
    "daynum,pid,activity_number,activity_type,start_time,end_time,duration,lid\n";

}  // namespace

TEST_CASE("person loader parses the documented example row exactly") {
  auto path = write_file(
      "persons_example.csv",
      kPersonHeader +
          "2208253,5586585,38,1,4,1,1,military,6,55000,1,1001018209,"
          "-78.4884675,38.0430255,51,540,201,1\n");
  auto persons = load_persons(path);
  REQUIRE(persons.size() == 1);
  const auto& p = persons[0];
  CHECK(p.hid == 2208253);
  CHECK(p.pid == 5586585);
  CHECK(p.age == 38);
  CHECK(p.sex == 1);
  CHECK(p.employment_status == 4);
  CHECK(p.race == 1);
  CHECK(p.hispanic == 1);
  CHECK(p.designation == "military");
  CHECK(p.hh_size == 6);
  CHECK(p.hh_income == 55000);
  CHECK(p.workers_in_family == 1);
  CHECK(p.residence_lid == 1001018209);
  CHECK(p.longitude == doctest::Approx(-78.4884675));
  CHECK(p.latitude == doctest::Approx(38.0430255));
  CHECK(p.admin1 == "51");
  CHECK(p.admin4 == "1");
}

TEST_CASE("person loader edge cases") {
  auto empty = write_file("persons_empty.csv", kPersonHeader);
  CHECK(load_persons(empty).empty());

  auto dup = write_file(
      "persons_dup.csv",
      kPersonHeader +
          "1,7,30,1,4,1,0,none,1,1000,1,11,0.0,0.0,51,540,201,1\n"
          "2,7,31,2,4,1,0,none,1,1000,1,12,0.0,0.0,51,540,201,1\n");
  CHECK_THROWS_WITH_AS(static_cast<void>(load_persons(dup)),
                       doctest::Contains("duplicate pid"), Error);

  auto badheader = write_file("persons_badheader.csv", "hid,pid,age\n");
  try {
    static_cast<void>(load_persons(badheader));
    FAIL("expected header mismatch");
  } catch (const Error& e) {
    CHECK(e.kind() == Error::Kind::header_mismatch);
  }
}

TEST_CASE("visit loader parses the documented example row exactly") {
  auto persons = write_file(
      "persons_v.csv",
      kPersonHeader +
          "2208253,5586585,38,1,4,1,1,military,6,55000,1,1001018209,"
          "-78.4884675,38.0430255,51,540,201,1\n");
  auto visits = write_file("visits_v.csv",
                           kVisitHeader + "0,5586585,0,1,0,27900,27900,1001018209\n");
  auto pop = load_population(persons, visits);
  REQUIRE(pop.size() == 1);
  const auto& day0 = pop.day_visits(0, 0);
  REQUIRE(day0.size() == 1);
  CHECK(day0[0].daynum == 0);
  CHECK(day0[0].activity_type == activity_home);
  CHECK(day0[0].duration == 27900);
  CHECK(day0[0].lid == 1001018209);
}

TEST_CASE("visit loader rejects unknown pids and negative durations") {
  auto persons = write_file(
      "persons_w.csv",
      kPersonHeader + "1,5,30,1,4,1,0,none,1,1000,1,11,0.0,0.0,51,540,201,1\n");

  auto unknown = write_file("visits_unknown.csv",
                            kVisitHeader + "0,999,0,1,0,100,100,11\n");
  try {
    static_cast<void>(load_population(persons, unknown));
    FAIL("expected unknown pid");
  } catch (const Error& e) {
    CHECK(e.kind() == Error::Kind::unknown_pid);
  }

  auto negative = write_file("visits_negative.csv",
                             kVisitHeader + "0,5,0,1,500,100,-400,11\n");
  try {
    static_cast<void>(load_population(persons, negative));
    FAIL("expected negative duration");
  } catch (const Error& e) {
    CHECK(e.kind() == Error::Kind::negative_duration);
  }
}

TEST_CASE("visit loader tolerates one-second duration drift with a warning") {
  auto persons = write_file(
      "persons_drift.csv",
      kPersonHeader + "1,5,30,1,4,1,0,none,1,1000,1,11,0.0,0.0,51,540,201,1\n");
  // duration off by one second: accepted, corrected to end - start
  auto drift = write_file("visits_drift.csv", kVisitHeader + "0,5,0,1,0,100,99,11\n");
  auto pop = load_population(persons, drift);
  CHECK(pop.day_visits(0, 0)[0].duration == 100);

  // off by more than one second: rejected
  auto broken = write_file("visits_broken.csv", kVisitHeader + "0,5,0,1,0,100,50,11\n");
  CHECK_THROWS_AS(static_cast<void>(load_population(persons, broken)), Error);
}

TEST_CASE("smallville: schedules follow the weekday table") {
  auto pop = generate_smallville();
  REQUIRE(pop.size() == 3);
  check_invariants(pop);

  for (int i = 0; i < 3; ++i) {
    CHECK(pop.persons[static_cast<std::size_t>(i)].pid == static_cast<std::uint64_t>(i + 1));
    CHECK(pop.persons[static_cast<std::size_t>(i)].residence_lid == 11 + i);
  }

  // Person 1, Thursday: one hour of work at lid 1 starting at midnight.
  const auto& p1_thu = pop.day_visits(0, 3);
  REQUIRE(p1_thu.size() == 2);
  CHECK(p1_thu[0].activity_type == activity_work);
  CHECK(p1_thu[0].lid == 1);
  CHECK(p1_thu[0].start_time == 0);
  CHECK(p1_thu[0].duration == 3600);
  CHECK(p1_thu[1].activity_type == activity_home);
  CHECK(p1_thu[1].duration == 86400 - 3600);

  // Person 3 works at lid 3 on Tuesdays.
  CHECK(pop.day_visits(2, 1)[0].lid == 3);
  // Person 2 moves to lid 2 from Thursday on.
  CHECK(pop.day_visits(1, 2)[0].lid == 1);
  CHECK(pop.day_visits(1, 3)[0].lid == 2);

  // Weekly co-location pairs form the complete graph on {1,2,3}: derived by
  // sweeping shared (day, work lid) assignments.
  std::set<std::pair<int, int>> pairs;
  for (int day = 0; day < 7; ++day)
    for (int a = 1; a <= 3; ++a)
      for (int b = a + 1; b <= 3; ++b)
        if (pop.day_visits(static_cast<std::uint32_t>(a - 1), day)[0].lid ==
            pop.day_visits(static_cast<std::uint32_t>(b - 1), day)[0].lid)
          pairs.insert({a, b});
  CHECK(pairs == std::set<std::pair<int, int>>{{1, 2}, {1, 3}, {2, 3}});
}

TEST_CASE("smallville round-trips through the CSV writers") {
  auto pop = generate_smallville();
  auto pfile = temp_dir() / "smallville_persons.csv";
  auto vfile = temp_dir() / "smallville_visits.csv";
  write_persons_csv(pop.persons, pfile);
  write_visits_csv(pop, vfile);

  auto loaded = load_population(pfile, vfile);
  REQUIRE(loaded.size() == pop.size());
  for (std::size_t i = 0; i < pop.size(); ++i) {
    CHECK(loaded.persons[i].pid == pop.persons[i].pid);
    CHECK(loaded.persons[i].residence_lid == pop.persons[i].residence_lid);
    CHECK(loaded.persons[i].hh_income == pop.persons[i].hh_income);
  }
  for (std::uint32_t i = 0; i < pop.size(); ++i) {
    for (int day = 0; day < 7; ++day) {
      const auto& a = pop.day_visits(i, day);
      const auto& b = loaded.day_visits(i, day);
      REQUIRE(a.size() == b.size());
      for (std::size_t k = 0; k < a.size(); ++k) {
        CHECK(a[k].start_time == b[k].start_time);
        CHECK(a[k].end_time == b[k].end_time);
        CHECK(a[k].activity_type == b[k].activity_type);
        CHECK(a[k].lid == b[k].lid);
      }
    }
  }
}

TEST_CASE("random population generator") {
  auto lone = generate_random_population(1, 1, 7);
  check_invariants(lone);
  REQUIRE(lone.size() == 1);

  auto a = generate_random_population(200, 20, 42);
  auto b = generate_random_population(200, 20, 42);
  check_invariants(a);
  // Determinism: identical CSV bytes for identical arguments.
  auto pa = temp_dir() / "rand_a_p.csv";
  auto pb = temp_dir() / "rand_b_p.csv";
  auto va = temp_dir() / "rand_a_v.csv";
  auto vb = temp_dir() / "rand_b_v.csv";
  write_persons_csv(a.persons, pa);
  write_persons_csv(b.persons, pb);
  write_visits_csv(a, va);
  write_visits_csv(b, vb);
  auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
  };
  CHECK(slurp(pa) == slurp(pb));
  CHECK(slurp(va) == slurp(vb));

  auto big = generate_random_population(1000, 50, 42);
  check_invariants(big);
  CHECK(big.size() == 1000);
}

TEST_CASE("location weight sidecar overrides the default") {
  auto pop = generate_smallville();
  CHECK(pop.location_weight(1) == 1.0);
  auto path = write_file("weights.csv", "lid,weight\n1,0.5\n2,2.0\n");
  load_location_weights(path, pop);
  CHECK(pop.location_weight(1) == 0.5);
  CHECK(pop.location_weight(2) == 2.0);
  CHECK(pop.location_weight(3) == 1.0);
}
