#include "episim/population.hpp"

#include <algorithm>
#include <cstdlib>
#include <fmt/format.h>
#include <fstream>
#include <set>

#include "episim/csv.hpp"
#include "episim/error.hpp"
#include "episim/log.hpp"
#include "episim/rng.hpp"

namespace episim {

namespace {

const std::vector<std::string> kPersonHeader = {
    "hid", "pid", "age", "sex", "employment_status", "race", "hispanic",
    "designation", "hh_size", "hh_income", "workers_in_family", "lid",
    "longitude", "latitude", "admin1", "admin2", "admin3", "admin4"};

const std::vector<std::string> kVisitHeader = {
    "daynum", "pid", "activity_number", "activity_type",
    "start_time", "end_time", "duration", "lid"};

void require_header(const csv::Table& table, const std::vector<std::string>& expected,
                    const std::filesystem::path& path) {
  if (table.header != expected)
    throw Error(Error::Kind::header_mismatch,
                fmt::format("{}: header mismatch, expected '{}'", path.string(),
                            csv::join(expected)));
}

}  // namespace

std::vector<Person> load_persons(const std::filesystem::path& path) {
  auto table = csv::read_file(path);
  require_header(table, kPersonHeader, path);

  std::vector<Person> persons;
  persons.reserve(table.rows.size());
  std::set<std::uint64_t> seen;
  std::size_t line = 1;
  for (const auto& row : table.rows) {
    ++line;
    Person p;
    p.hid = csv::parse_i64(row[0], line);
    p.pid = csv::parse_u64(row[1], line);
    p.age = static_cast<int>(csv::parse_i64(row[2], line));
    p.sex = static_cast<int>(csv::parse_i64(row[3], line));
    p.employment_status = static_cast<int>(csv::parse_i64(row[4], line));
    p.race = static_cast<int>(csv::parse_i64(row[5], line));
    p.hispanic = static_cast<int>(csv::parse_i64(row[6], line));
    p.designation = row[7];
    p.hh_size = static_cast<int>(csv::parse_i64(row[8], line));
    p.hh_income = csv::parse_i64(row[9], line);
    p.workers_in_family = static_cast<int>(csv::parse_i64(row[10], line));
    p.residence_lid = csv::parse_i64(row[11], line);
    p.longitude = csv::parse_double(row[12], line);
    p.latitude = csv::parse_double(row[13], line);
    p.admin1 = row[14];
    p.admin2 = row[15];
    p.admin3 = row[16];
    p.admin4 = row[17];
    if (p.age < 0)
      throw Error(Error::Kind::row_parse, fmt::format("line {}: negative age", line));
    if (p.hh_size < 1)
      throw Error(Error::Kind::row_parse, fmt::format("line {}: hh_size < 1", line));
    if (!seen.insert(p.pid).second)
      throw Error(Error::Kind::duplicate_pid,
                  fmt::format("line {}: duplicate pid {}", line, p.pid));
    persons.push_back(std::move(p));
  }
  return persons;
}

namespace {

std::vector<Visit> load_visits_rows(const std::filesystem::path& path,
                                    const std::vector<Person>& persons) {
  auto table = csv::read_file(path);
  require_header(table, kVisitHeader, path);

  std::set<std::uint64_t> pids;
  for (const auto& p : persons) pids.insert(p.pid);

  std::vector<Visit> visits;
  visits.reserve(table.rows.size());
  std::size_t line = 1;
  for (const auto& row : table.rows) {
    ++line;
    Visit v;
    v.daynum = static_cast<int>(csv::parse_i64(row[0], line));
    v.pid = csv::parse_u64(row[1], line);
    v.activity_number = static_cast<int>(csv::parse_i64(row[2], line));
    v.activity_type = static_cast<int>(csv::parse_i64(row[3], line));
    v.start_time = csv::parse_i64(row[4], line);
    v.end_time = csv::parse_i64(row[5], line);
    v.duration = csv::parse_i64(row[6], line);
    v.lid = csv::parse_i64(row[7], line);
    if (v.daynum < 0 || v.daynum > 6)
      throw Error(Error::Kind::row_parse,
                  fmt::format("line {}: daynum {} out of 0..6", line, v.daynum));
    if (v.activity_type < 0 || v.activity_type >= kNumActivityTypes)
      throw Error(Error::Kind::row_parse,
                  fmt::format("line {}: unknown activity_type {}", line, v.activity_type));
    if (!pids.contains(v.pid))
      throw Error(Error::Kind::unknown_pid,
                  fmt::format("line {}: visit references unknown pid {}", line, v.pid));
    if (v.end_time < v.start_time)
      throw Error(Error::Kind::negative_duration,
                  fmt::format("line {}: end_time {} before start_time {}", line,
                              v.end_time, v.start_time));
    const std::int64_t delta = v.duration - (v.end_time - v.start_time);
    if (delta != 0) {
      if (std::abs(delta) <= 1) {
        log_warning("{}:{}: duration differs from end-start by {} s; using end-start",
                    path.string(), line, delta);
        v.duration = v.end_time - v.start_time;
      } else {
        throw Error(Error::Kind::row_parse,
                    fmt::format("line {}: duration {} inconsistent with interval {}",
                                line, v.duration, v.end_time - v.start_time));
      }
    }
    visits.push_back(v);
  }
  return visits;
}

}  // namespace

void Population::reindex() {
  pid_to_index.clear();
  for (std::uint32_t i = 0; i < persons.size(); ++i) {
    if (!pid_to_index.emplace(persons[i].pid, i).second)
      throw Error(Error::Kind::duplicate_pid,
                  fmt::format("duplicate pid {}", persons[i].pid));
  }

  std::set<std::int64_t> lids;
  for (const auto& p : persons) lids.insert(p.residence_lid);
  for (auto& per_person : visits)
    for (auto& day : per_person)
      for (auto& v : day) lids.insert(v.lid);
  location_ids.assign(lids.begin(), lids.end());

  for (auto& per_person : visits)
    for (auto& day : per_person)
      std::sort(day.begin(), day.end(), [](const Visit& a, const Visit& b) {
        if (a.start_time != b.start_time) return a.start_time < b.start_time;
        return a.activity_number < b.activity_number;
      });

  for (auto& m : by_day_location_) m.clear();
  for (std::uint32_t pi = 0; pi < visits.size(); ++pi) {
    for (int day = 0; day < 7; ++day) {
      const auto& list = visits[pi][static_cast<std::size_t>(day)];
      for (std::uint32_t vi = 0; vi < list.size(); ++vi)
        by_day_location_[static_cast<std::size_t>(day)][list[vi].lid].push_back(
            {pi, vi});
    }
  }
  // (start_time, pid) ordering within each location-day.
  for (int day = 0; day < 7; ++day) {
    for (auto& [lid, refs] : by_day_location_[static_cast<std::size_t>(day)]) {
      std::sort(refs.begin(), refs.end(), [&](const VisitRef& a, const VisitRef& b) {
        const Visit& va = visits[a.person_index][static_cast<std::size_t>(day)][a.visit_index];
        const Visit& vb = visits[b.person_index][static_cast<std::size_t>(day)][b.visit_index];
        if (va.start_time != vb.start_time) return va.start_time < vb.start_time;
        if (va.pid != vb.pid) return va.pid < vb.pid;
        return a.visit_index < b.visit_index;
      });
    }
  }
}

const std::vector<VisitRef>& Population::visits_at(int day, std::int64_t lid) const {
  static const std::vector<VisitRef> empty;
  const auto& m = by_day_location_[static_cast<std::size_t>(day)];
  auto it = m.find(lid);
  return it == m.end() ? empty : it->second;
}

std::vector<std::pair<std::int64_t, std::uint64_t>> Population::location_loads() const {
  std::unordered_map<std::int64_t, std::uint64_t> loads;
  for (auto lid : location_ids) loads[lid] = 0;
  for (const auto& per_person : visits)
    for (const auto& day : per_person)
      for (const auto& v : day) ++loads[v.lid];
  std::vector<std::pair<std::int64_t, std::uint64_t>> out(loads.begin(), loads.end());
  std::sort(out.begin(), out.end());
  return out;
}

Population load_population(const std::filesystem::path& person_file,
                           const std::filesystem::path& visit_file) {
  Population pop;
  pop.persons = load_persons(person_file);
  pop.visits.resize(pop.persons.size());

  std::unordered_map<std::uint64_t, std::uint32_t> index;
  for (std::uint32_t i = 0; i < pop.persons.size(); ++i)
    index.emplace(pop.persons[i].pid, i);

  for (auto& v : load_visits_rows(visit_file, pop.persons))
    pop.visits[index.at(v.pid)][static_cast<std::size_t>(v.daynum)].push_back(v);

  pop.reindex();
  return pop;
}

void load_location_weights(const std::filesystem::path& path, Population& pop) {
  auto table = csv::read_file(path);
  if (table.header != std::vector<std::string>{"lid", "weight"})
    throw Error(Error::Kind::header_mismatch,
                fmt::format("{}: expected header 'lid,weight'", path.string()));
  std::size_t line = 1;
  for (const auto& row : table.rows) {
    ++line;
    const std::int64_t lid = csv::parse_i64(row[0], line);
    const double weight = csv::parse_double(row[1], line);
    if (weight < 0.0)
      throw Error(Error::Kind::row_parse,
                  fmt::format("line {}: negative location weight", line));
    pop.location_weights[lid] = weight;
  }
}

namespace {

Person make_person(std::int64_t hid, std::uint64_t pid, int age, int sex,
                   std::int64_t income, int hh_size, std::int64_t residence) {
  Person p;
  p.hid = hid;
  p.pid = pid;
  p.age = age;
  p.sex = sex;
  p.employment_status = 4;
  p.race = 1;
  p.hispanic = 0;
  p.designation = "none";
  p.hh_size = hh_size;
  p.hh_income = income;
  p.workers_in_family = 1;
  p.residence_lid = residence;
  p.longitude = 0.0;
  p.latitude = 0.0;
  p.admin1 = "51";
  p.admin2 = "540";
  p.admin3 = "201";
  p.admin4 = "1";
  return p;
}

// Work location per (person 1..3, weekday); lid 1 sees the most mixing.
std::int64_t smallville_work_lid(int person, int day) {
  switch (person) {
    case 1:
      return 1;
    case 2:
      return day <= 2 ? 1 : 2;
    default:
      if (day == 0) return 1;
      if (day == 1 || day == 2) return 3;
      return 2;  // Thursday onward, weekends included
  }
}

}  // namespace

Population generate_smallville() {
  Population pop;
  for (int i = 1; i <= 3; ++i)
    pop.persons.push_back(make_person(i, static_cast<std::uint64_t>(i), 25 + 5 * i,
                                      1 + (i % 2), 50000, 1, 10 + i));
  pop.visits.resize(3);
  for (int i = 1; i <= 3; ++i) {
    for (int day = 0; day < 7; ++day) {
      Visit work{day, static_cast<std::uint64_t>(i), 0, activity_work,
                 0, 3600, 3600, smallville_work_lid(i, day)};
      Visit home{day, static_cast<std::uint64_t>(i), 1, activity_home,
                 3600, 86400, 86400 - 3600, 10 + i};
      auto& list = pop.visits[static_cast<std::size_t>(i - 1)][static_cast<std::size_t>(day)];
      list.push_back(work);
      list.push_back(home);
    }
  }
  pop.reindex();
  return pop;
}

Population generate_random_population(std::size_t n_people, std::size_t n_locations,
                                      std::uint64_t seed) {
  if (n_people < 1)
    throw Error(Error::Kind::validation, "population needs at least one person");
  if (n_locations < 1)
    throw Error(Error::Kind::validation, "population needs at least one location");

  Population pop;
  pop.persons.reserve(n_people);
  pop.visits.resize(n_people);

  RngStream rng(seed, RngPurpose::population);

  // Households of size 1..5; residences live above the activity lid range.
  std::int64_t hid = 0;
  std::size_t assigned = 0;
  std::vector<std::int64_t> residence_of_person(n_people);
  std::vector<int> hh_size_of_person(n_people);
  while (assigned < n_people) {
    ++hid;
    const std::size_t size =
        std::min<std::size_t>(1 + rng.below(5), n_people - assigned);
    const std::int64_t residence = static_cast<std::int64_t>(n_locations) + hid;
    const std::int64_t income = 20000 + static_cast<std::int64_t>(rng.below(115001));
    for (std::size_t k = 0; k < size; ++k) {
      const std::uint64_t pid = assigned + 1;
      const int age = 1 + static_cast<int>(rng.below(90));
      const int sex = 1 + static_cast<int>(rng.below(2));
      pop.persons.push_back(make_person(hid, pid, age, sex, income,
                                        static_cast<int>(size), residence));
      residence_of_person[assigned] = residence;
      hh_size_of_person[assigned] = static_cast<int>(size);
      ++assigned;
    }
  }

  // Stable workplace per person; the other activity types move around.
  std::vector<std::int64_t> work_lid(n_people);
  for (std::size_t i = 0; i < n_people; ++i)
    work_lid[i] = 1 + static_cast<std::int64_t>(rng.below(n_locations));

  constexpr std::int64_t kWindowStarts[3] = {28800, 46800, 64800};  // 8h, 13h, 18h
  for (std::size_t i = 0; i < n_people; ++i) {
    for (int day = 0; day < 7; ++day) {
      auto& list = pop.visits[i][static_cast<std::size_t>(day)];
      const int n_activities = 1 + static_cast<int>(rng.below(3));
      // Choose that many of the three disjoint daytime windows.
      bool used[3] = {false, false, false};
      for (int a = 0; a < n_activities; ++a) {
        int w = static_cast<int>(rng.below(3));
        while (used[w]) w = (w + 1) % 3;
        used[w] = true;
      }
      int activity_number = 0;
      std::int64_t cursor = 0;
      for (int w = 0; w < 3; ++w) {
        if (!used[w]) continue;
        const std::int64_t start = kWindowStarts[w] + static_cast<std::int64_t>(rng.below(3600));
        const std::int64_t duration = 3600 + static_cast<std::int64_t>(rng.below(7200));
        int type;
        const std::uint64_t roll = rng.below(100);
        if (roll < 40) type = activity_work;
        else if (roll < 60) type = activity_shopping;
        else if (roll < 80) type = activity_other;
        else if (roll < 90) type = activity_school;
        else if (roll < 95) type = activity_college;
        else type = activity_religion;
        const std::int64_t lid =
            type == activity_work
                ? work_lid[i]
                : 1 + static_cast<std::int64_t>(rng.below(n_locations));
        if (start > cursor)
          list.push_back({day, pop.persons[i].pid, activity_number++, activity_home,
                          cursor, start, start - cursor, residence_of_person[i]});
        list.push_back({day, pop.persons[i].pid, activity_number++, type, start,
                        start + duration, duration, lid});
        cursor = start + duration;
      }
      if (cursor < 86400)
        list.push_back({day, pop.persons[i].pid, activity_number++, activity_home,
                        cursor, 86400, 86400 - cursor, residence_of_person[i]});
    }
  }

  pop.reindex();
  return pop;
}

void write_persons_csv(std::span<const Person> persons,
                       const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out)
    throw Error(Error::Kind::io, fmt::format("cannot write {}", path.string()));
  out << csv::join(kPersonHeader) << "\n";
  for (const auto& p : persons) {
    out << p.hid << ',' << p.pid << ',' << p.age << ',' << p.sex << ','
        << p.employment_status << ',' << p.race << ',' << p.hispanic << ','
        << p.designation << ',' << p.hh_size << ',' << p.hh_income << ','
        << p.workers_in_family << ',' << p.residence_lid << ','
        << csv::format_real(p.longitude) << ',' << csv::format_real(p.latitude)
        << ',' << p.admin1 << ',' << p.admin2 << ',' << p.admin3 << ','
        << p.admin4 << "\n";
  }
}

void write_visits_csv(const Population& pop, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out)
    throw Error(Error::Kind::io, fmt::format("cannot write {}", path.string()));
  out << csv::join(kVisitHeader) << "\n";
  for (int day = 0; day < 7; ++day) {
    for (const auto& per_person : pop.visits) {
      for (const auto& v : per_person[static_cast<std::size_t>(day)]) {
        out << v.daynum << ',' << v.pid << ',' << v.activity_number << ','
            << v.activity_type << ',' << v.start_time << ',' << v.end_time << ','
            << v.duration << ',' << v.lid << "\n";
      }
    }
  }
}

void check_invariants(const Population& pop) {
  std::set<std::int64_t> lids(pop.location_ids.begin(), pop.location_ids.end());
  std::set<std::uint64_t> pids;
  std::unordered_map<std::int64_t, std::int64_t> hh_residence;
  for (const auto& p : pop.persons) {
    if (!pids.insert(p.pid).second)
      throw Error(Error::Kind::duplicate_pid, fmt::format("duplicate pid {}", p.pid));
    if (p.age < 0 || p.hh_size < 1)
      throw Error(Error::Kind::validation,
                  fmt::format("pid {}: bad age or household size", p.pid));
    if (!lids.contains(p.residence_lid))
      throw Error(Error::Kind::validation,
                  fmt::format("pid {}: residence {} not in location set", p.pid,
                              p.residence_lid));
    auto [it, fresh] = hh_residence.emplace(p.hid, p.residence_lid);
    if (!fresh && it->second != p.residence_lid)
      throw Error(Error::Kind::validation,
                  fmt::format("household {} spans multiple residences", p.hid));
  }
  for (std::uint32_t pi = 0; pi < pop.visits.size(); ++pi) {
    for (int day = 0; day < 7; ++day) {
      const auto& list = pop.visits[pi][static_cast<std::size_t>(day)];
      for (std::size_t k = 0; k < list.size(); ++k) {
        const auto& v = list[k];
        if (v.pid != pop.persons[pi].pid)
          throw Error(Error::Kind::validation, "visit filed under wrong person");
        if (v.duration != v.end_time - v.start_time || v.duration < 0)
          throw Error(Error::Kind::negative_duration,
                      fmt::format("pid {} day {}: inconsistent interval", v.pid, day));
        if (!lids.contains(v.lid))
          throw Error(Error::Kind::validation,
                      fmt::format("visit lid {} not in location set", v.lid));
        if (k > 0) {
          if (list[k - 1].start_time > v.start_time)
            throw Error(Error::Kind::validation, "day visits not sorted");
          if (list[k - 1].end_time > v.start_time)
            throw Error(Error::Kind::validation,
                        fmt::format("pid {} day {}: overlapping visits", v.pid, day));
        }
      }
    }
  }
}

}  // namespace episim
