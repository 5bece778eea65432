#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace episim {

enum ActivityType : int {
  activity_transit = 0,
  activity_home = 1,
  activity_work = 2,
  activity_shopping = 3,
  activity_other = 4,
  activity_school = 5,
  activity_college = 6,
  activity_religion = 7,
};

inline constexpr int kNumActivityTypes = 8;
// Local observables are tracked for activity types 1..7 (home..religion);
// transit never appears in distributed data and has no observable slot.
inline constexpr int kNumObservableSlots = 7;

constexpr int observable_slot(int activity_type) noexcept {
  return activity_type - 1;  // valid for types 1..7
}

struct Person {
  std::int64_t hid = 0;
  std::uint64_t pid = 0;
  int age = 0;
  int sex = 0;  // 1: male, 2: female
  int employment_status = 0;
  int race = 0;
  int hispanic = 0;
  std::string designation;
  int hh_size = 0;
  std::int64_t hh_income = 0;
  int workers_in_family = 0;
  std::int64_t residence_lid = 0;
  double longitude = 0.0;
  double latitude = 0.0;
  std::string admin1, admin2, admin3, admin4;
};

struct Visit {
  int daynum = 0;  // 0: Monday ... 6: Sunday
  std::uint64_t pid = 0;
  int activity_number = 0;
  int activity_type = activity_home;
  std::int64_t start_time = 0;  // seconds within the day
  std::int64_t end_time = 0;
  std::int64_t duration = 0;
  std::int64_t lid = 0;
};

// Reference to one visit: owning person (dense index) and position within
// that person's sorted day schedule.
struct VisitRef {
  std::uint32_t person_index = 0;
  std::uint32_t visit_index = 0;
};

class Population {
 public:
  std::vector<Person> persons;  // dense order == person file order
  std::unordered_map<std::uint64_t, std::uint32_t> pid_to_index;

  // visits[person][day], sorted by (start_time, activity_number).
  std::vector<std::array<std::vector<Visit>, 7>> visits;

  std::vector<std::int64_t> location_ids;  // sorted, unique
  std::unordered_map<std::int64_t, double> location_weights;  // sparse; default 1.0

  std::size_t size() const noexcept { return persons.size(); }

  double location_weight(std::int64_t lid) const noexcept {
    auto it = location_weights.find(lid);
    return it == location_weights.end() ? 1.0 : it->second;
  }

  const std::vector<Visit>& day_visits(std::uint32_t person_index, int day) const {
    return visits[person_index][static_cast<std::size_t>(day)];
  }

  // Baseline schedule grouped by (day, location), sorted by (start, pid).
  const std::vector<VisitRef>& visits_at(int day, std::int64_t lid) const;

  // Total baseline visit count per location over the week; partitioning load.
  std::vector<std::pair<std::int64_t, std::uint64_t>> location_loads() const;

  // Rebuilds indices after persons/visits were filled in. Throws on broken
  // referential integrity.
  void reindex();

 private:
  std::array<std::unordered_map<std::int64_t, std::vector<VisitRef>>, 7> by_day_location_;
};

std::vector<Person> load_persons(const std::filesystem::path& path);

// Requires persons to be loaded first; sorts and groups everything.
Population load_population(const std::filesystem::path& person_file,
                           const std::filesystem::path& visit_file);

// Optional "lid,weight" sidecar.
void load_location_weights(const std::filesystem::path& path, Population& pop);

// The three-person test town: one hour of work at midnight, the rest at home,
// work locations rotating over the week so the weekly contact graph is the
// complete graph on {1,2,3}.
Population generate_smallville();

// Seeded synthetic population for desk-scale runs: households of size 1-5,
// 1-3 non-home activities per person per day at random locations.
Population generate_random_population(std::size_t n_people, std::size_t n_locations,
                                      std::uint64_t seed);

void write_persons_csv(std::span<const Person> persons,
                       const std::filesystem::path& path);
void write_visits_csv(const Population& pop, const std::filesystem::path& path);

// Validates every documented structural invariant; throws on violation.
void check_invariants(const Population& pop);

}  // namespace episim
