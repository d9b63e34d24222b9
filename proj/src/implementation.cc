// Copyright 2026 The bundlechoice Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "bundlechoice/implementation.h"

#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>
#include <string>

#include "bundlechoice/rng.h"

namespace bundlechoice {
namespace {

struct Group {
  BundleId bundle;
  std::vector<StudentId> students;  // Canonical order.
};

// Bundles holding students, smallest first, ties in canonical bundle order.
std::vector<Group> Steps(const Instance& instance, const BundleMatching& nu) {
  const std::vector<std::string> problems = CheckBundleMatching(instance, nu);
  if (!problems.empty()) {
    throw std::invalid_argument("not a bundle-matching: " + problems.front());
  }
  std::vector<Group> groups;
  std::vector<int> slot(instance.num_bundles(), -1);
  for (int i = 0; i < instance.num_students(); ++i) {
    const auto& b = nu.assignment[i];
    if (!b) continue;
    if (slot[b->index()] < 0) {
      slot[b->index()] = static_cast<int>(groups.size());
      groups.push_back({*b, {}});
    }
    groups[slot[b->index()]].students.emplace_back(i);
  }
  std::sort(groups.begin(), groups.end(), [&](const Group& x, const Group& y) {
    const auto nx = instance.bundle(x.bundle).schools.size();
    const auto ny = instance.bundle(y.bundle).schools.size();
    return nx != ny ? nx < ny : x.bundle < y.bundle;
  });
  return groups;
}

std::vector<int> InitialSeats(const Instance& instance) {
  std::vector<int> seats;
  for (const School& s : instance.schools()) seats.push_back(s.quota);
  return seats;
}

// Remaining seats of the bundle's schools, one entry per seat.
std::vector<SchoolId> SeatList(const Instance& instance, BundleId b, const std::vector<int>& seats) {
  std::vector<SchoolId> list;
  for (SchoolId s : instance.bundle(b).schools) {
    for (int k = 0; k < seats[s.index()]; ++k) list.push_back(s);
  }
  return list;
}

void RequireRoom(const Instance& instance, const Group& g, std::size_t room) {
  if (room < g.students.size()) {
    throw std::logic_error("implementation ran out of seats in bundle '" +
                           instance.bundle(g.bundle).name + "'");
  }
}

void Enumerate(const Instance& instance, const std::vector<Group>& groups, std::size_t g,
               std::size_t k, std::vector<int>& seats, StandardMatching& mu,
               std::set<StandardMatching>& out, std::size_t cap, bool& truncated) {
  if (truncated) return;
  if (g == groups.size()) {
    out.insert(mu);
    if (out.size() > cap) truncated = true;
    return;
  }
  const Group& group = groups[g];
  if (k == 0) RequireRoom(instance, group, SeatList(instance, group.bundle, seats).size());
  if (k == group.students.size()) {
    Enumerate(instance, groups, g + 1, 0, seats, mu, out, cap, truncated);
    return;
  }
  const StudentId i = group.students[k];
  for (SchoolId s : instance.bundle(group.bundle).schools) {
    if (seats[s.index()] == 0) continue;
    --seats[s.index()];
    mu[i] = s;
    Enumerate(instance, groups, g, k + 1, seats, mu, out, cap, truncated);
    mu[i].reset();
    ++seats[s.index()];
  }
}

void Distribute(const Instance& instance, const std::vector<Group>& groups, std::size_t g,
                std::size_t k, std::vector<SchoolId>& pool, std::vector<int>& seats,
                StandardMatching& mu, double weight, std::map<StandardMatching, double>& out) {
  if (g == groups.size()) {
    out[mu] += weight;
    return;
  }
  const Group& group = groups[g];
  if (k == 0) {
    pool = SeatList(instance, group.bundle, seats);
    RequireRoom(instance, group, pool.size());
  }
  if (k == group.students.size()) {
    std::vector<SchoolId> next_pool;
    Distribute(instance, groups, g + 1, 0, next_pool, seats, mu, weight, out);
    return;
  }
  // Seats already used in this bundle are marked invalid in `pool`.
  std::size_t free = 0;
  for (SchoolId s : pool) free += s.valid();
  const StudentId i = group.students[k];
  for (std::size_t p = 0; p < pool.size(); ++p) {
    if (!pool[p].valid()) continue;
    const SchoolId s = pool[p];
    pool[p] = SchoolId();
    --seats[s.index()];
    mu[i] = s;
    Distribute(instance, groups, g, k + 1, pool, seats, mu, weight / free, out);
    mu[i].reset();
    ++seats[s.index()];
    pool[p] = s;
  }
}

}  // namespace

StandardMatching Implement(const Instance& instance, const BundleMatching& nu,
                           const ImplementationPolicy& policy) {
  if (policy.mode == ImplementationPolicy::Mode::kPreferences) {
    return ImplementWithPreferences(instance, nu, policy.preferences);
  }
  const std::vector<Group> groups = Steps(instance, nu);
  std::vector<int> seats = InitialSeats(instance);
  StandardMatching mu(instance.num_students());
  Rng rng(policy.seed);
  for (const Group& group : groups) {
    std::vector<SchoolId> pool = SeatList(instance, group.bundle, seats);
    RequireRoom(instance, group, pool.size());
    if (policy.mode == ImplementationPolicy::Mode::kRandom) rng.Shuffle(pool);
    // Deterministic mode: the pool is in school order, so each student in
    // turn takes the first school with a free seat.
    for (std::size_t k = 0; k < group.students.size(); ++k) {
      mu[group.students[k]] = pool[k];
      --seats[pool[k].index()];
    }
  }
  return mu;
}

StandardMatching ImplementWithPreferences(const Instance& instance, const BundleMatching& nu,
                                          const SecondStagePreferences& prefs) {
  const std::vector<Group> groups = Steps(instance, nu);
  if (static_cast<int>(prefs.size()) != instance.num_students()) {
    throw std::invalid_argument("second-stage preferences must cover every student");
  }
  std::vector<int> seats = InitialSeats(instance);
  StandardMatching mu(instance.num_students());
  for (const Group& group : groups) {
    const Bundle& bundle = instance.bundle(group.bundle);
    for (StudentId i : group.students) {
      const auto& ranking = prefs[i.index()];
      if (!ranking) {
        if (bundle.trivial()) continue;
        throw std::invalid_argument("no second-stage ranking for '" + instance.student_name(i) + "'");
      }
      std::vector<SchoolId> sorted = *ranking;
      std::sort(sorted.begin(), sorted.end());
      if (sorted != bundle.schools) {
        throw std::invalid_argument("second-stage ranking of '" + instance.student_name(i) +
                                    "' must list exactly the schools of '" + bundle.name + "'");
      }
    }
    RequireRoom(instance, group, SeatList(instance, group.bundle, seats).size());
    if (bundle.trivial()) {
      for (StudentId i : group.students) {
        mu[i] = bundle.schools.front();
        --seats[bundle.schools.front().index()];
      }
      continue;
    }
    // Every school of the bundle orders its targets the same way.
    const SchoolId reference = bundle.schools.front();
    std::map<SchoolId, std::vector<StudentId>> held;
    std::vector<std::size_t> next(instance.num_students(), 0);
    std::vector<StudentId> free = group.students;
    while (!free.empty()) {
      const StudentId i = free.back();
      free.pop_back();
      const std::vector<SchoolId>& ranking = *prefs[i.index()];
      if (next[i.index()] >= ranking.size()) {
        throw std::logic_error("within-bundle DA left a student without a seat");
      }
      const SchoolId s = ranking[next[i.index()]++];
      auto& list = held[s];
      list.push_back(i);
      std::sort(list.begin(), list.end(), [&](StudentId a, StudentId b) {
        return instance.HigherPriority(reference, a, b);
      });
      if (static_cast<int>(list.size()) > seats[s.index()]) {
        free.push_back(list.back());
        list.pop_back();
      }
    }
    for (const auto& [s, list] : held) {
      for (StudentId i : list) mu[i] = s;
      seats[s.index()] -= static_cast<int>(list.size());
    }
  }
  return mu;
}

ImplementationSet EnumerateImplementations(const Instance& instance, const BundleMatching& nu,
                                           std::size_t cap) {
  const std::vector<Group> groups = Steps(instance, nu);
  std::vector<int> seats = InitialSeats(instance);
  StandardMatching mu(instance.num_students());
  std::set<StandardMatching> found;
  ImplementationSet out;
  Enumerate(instance, groups, 0, 0, seats, mu, found, cap, out.truncated);
  out.matchings.assign(found.begin(), found.end());
  if (out.matchings.size() > cap) out.matchings.resize(cap);
  return out;
}

std::vector<std::pair<StandardMatching, double>> ImplementationDistribution(
    const Instance& instance, const BundleMatching& nu) {
  const std::vector<Group> groups = Steps(instance, nu);
  std::vector<int> seats = InitialSeats(instance);
  StandardMatching mu(instance.num_students());
  std::map<StandardMatching, double> out;
  std::vector<SchoolId> pool;
  Distribute(instance, groups, 0, 0, pool, seats, mu, 1.0, out);
  return {out.begin(), out.end()};
}

}  // namespace bundlechoice
