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

#include "bundlechoice/engines.h"

#include <algorithm>
#include <optional>
#include <sstream>
#include <utility>

namespace bundlechoice {
namespace {

// Remaining quotas of every bundle with the nested decrement and cascading
// zero rules shared by both bundle engines.
class Quotas {
 public:
  explicit Quotas(const Instance& instance) : instance_(instance) {
    for (const Bundle& b : instance.bundles()) rem_.push_back(b.quota);
  }

  int operator[](BundleId b) const { return rem_[b.index()]; }
  const std::vector<int>& values() const { return rem_; }

  void Reset(const std::vector<BundleId>& bundles) {
    for (BundleId b : bundles) rem_[b.index()] = instance_.bundle(b).quota;
  }

  void Admit(BundleId target) {
    Decrement(target, 1);
  }

  // Zeroes `b` and everything below it; the seats left in `b` are withdrawn
  // from its sup-bundles as well.
  void Close(BundleId b) {
    const int left = rem_[b.index()];
    rem_[b.index()] = 0;
    for (BundleId d : instance_.Descendants(b)) rem_[d.index()] = 0;
    for (BundleId up : instance_.Ancestors(b)) {
      rem_[up.index()] -= left;
      if (rem_[up.index()] <= 0) ZeroSubtree(up);
    }
  }

 private:
  void Decrement(BundleId target, int amount) {
    rem_[target.index()] -= amount;
    if (rem_[target.index()] <= 0) ZeroSubtree(target);
    for (BundleId up : instance_.Ancestors(target)) {
      rem_[up.index()] -= amount;
      if (rem_[up.index()] <= 0) ZeroSubtree(up);
    }
  }

  void ZeroSubtree(BundleId b) {
    rem_[b.index()] = 0;
    for (BundleId d : instance_.Descendants(b)) rem_[d.index()] = 0;
  }

  const Instance& instance_;
  std::vector<int> rem_;
};

// Shared round bookkeeping: who holds what and who applies next.
struct RoundState {
  explicit RoundState(const Instance& instance)
      : held(instance.num_students()), pointer(instance.num_students(), 0),
        matching(instance.num_students()) {}

  std::vector<std::optional<BundleId>> held;
  std::vector<int> pointer;  // Index of the ROL entry currently held/applied.
  BundleMatching matching;
};

class Recorder {
 public:
  explicit Recorder(bool enabled) : enabled_(enabled) {}

  void Apply(int round, StudentId i, BundleId b) {
    if (enabled_) trace_.events.push_back({EventKind::kApply, round, 0, i, b, {}, {}});
  }
  void Step(int round, int step, std::vector<StudentId> h) {
    if (enabled_) {
      trace_.events.push_back({EventKind::kStep, round, step, {}, {}, std::move(h), {}});
    }
  }
  void Admit(int round, int step, StudentId i, BundleId b, const std::vector<int>& remaining) {
    if (enabled_) {
      trace_.events.push_back({EventKind::kAdmit, round, step, i, b, {}, remaining});
    }
  }
  void Overdemand(int round, int step, BundleId b, std::vector<StudentId> admitted,
                  const std::vector<int>& remaining) {
    if (enabled_) {
      trace_.events.push_back(
          {EventKind::kOverdemand, round, step, {}, b, std::move(admitted), remaining});
    }
  }
  void Reject(int round, int step, StudentId i, BundleId b) {
    if (enabled_) trace_.events.push_back({EventKind::kReject, round, step, i, b, {}, {}});
  }

  EngineTrace Finish(int rounds) {
    trace_.rounds = rounds;
    return std::move(trace_);
  }

 private:
  bool enabled_;
  EngineTrace trace_;
};

// Lets every unmatched student with entries left apply. Returns the new
// applicants in id order.
std::vector<StudentId> Apply(const Instance& instance, const RolProfile& rols, RoundState& state,
                             int round, Recorder& recorder) {
  std::vector<StudentId> applicants;
  for (int i = 0; i < instance.num_students(); ++i) {
    if (state.held[i]) continue;
    const auto& entries = rols[i].entries;
    if (state.pointer[i] >= static_cast<int>(entries.size())) continue;
    const BundleId b = entries[state.pointer[i]];
    state.held[i] = b;  // Target for this round; cleared on rejection.
    applicants.emplace_back(i);
    recorder.Apply(round, StudentId(i), b);
  }
  return applicants;
}

void Reject(RoundState& state, StudentId i) {
  state.held[i.index()].reset();
  ++state.pointer[i.index()];
}

EngineResult Finish(const Instance& instance, RoundState& state, Recorder& recorder, int rounds) {
  for (int i = 0; i < instance.num_students(); ++i) state.matching.assignment[i] = state.held[i];
  return EngineResult{std::move(state.matching), recorder.Finish(rounds)};
}

// Hierarchies touched by this round's applications, ascending.
std::vector<int> TouchedHierarchies(const Instance& instance, const RoundState& state,
                                    const std::vector<StudentId>& applicants) {
  std::vector<int> touched;
  for (StudentId i : applicants) touched.push_back(instance.HierarchyOf(*state.held[i.index()]));
  std::sort(touched.begin(), touched.end());
  touched.erase(std::unique(touched.begin(), touched.end()), touched.end());
  return touched;
}

std::vector<StudentId> MembersOf(const Instance& instance, const RoundState& state,
                                 const std::vector<int>& hierarchies) {
  std::vector<bool> in(instance.simplicity().hierarchies.size(), false);
  for (int h : hierarchies) in[h] = true;
  std::vector<StudentId> members;
  for (int i = 0; i < instance.num_students(); ++i) {
    if (state.held[i] && in[instance.HierarchyOf(*state.held[i])]) members.emplace_back(i);
  }
  return members;
}

}  // namespace

TieBreakOrder::TieBreakOrder(std::vector<StudentId> order, int num_students)
    : order_(std::move(order)), position_(num_students, -1) {
  if (static_cast<int>(order_.size()) != num_students) {
    throw std::invalid_argument("tie-break order must list every student exactly once");
  }
  for (std::size_t k = 0; k < order_.size(); ++k) {
    const StudentId i = order_[k];
    if (!i.valid() || i.value() >= num_students || position_[i.index()] >= 0) {
      throw std::invalid_argument("tie-break order must list every student exactly once");
    }
    position_[i.index()] = static_cast<int>(k);
  }
}

TieBreakOrder TieBreakOrder::Canonical(int num_students) {
  std::vector<StudentId> order;
  for (int i = 0; i < num_students; ++i) order.emplace_back(i);
  return TieBreakOrder(std::move(order), num_students);
}

const char* EventKindName(EventKind kind) {
  switch (kind) {
    case EventKind::kApply: return "apply";
    case EventKind::kStep: return "step";
    case EventKind::kAdmit: return "admit";
    case EventKind::kOverdemand: return "overdemand";
    case EventKind::kReject: return "reject";
  }
  return "unknown";
}

int EngineTrace::Count(EventKind kind) const {
  return static_cast<int>(std::count_if(events.begin(), events.end(),
                                        [kind](const TraceEvent& e) { return e.kind == kind; }));
}

EngineResult RunStandardDa(const Instance& instance, const RolProfile& rols,
                           const EngineOptions& options) {
  RequireValidRols(instance, rols);
  for (const Rol& rol : rols) {
    for (BundleId b : rol.entries) {
      if (!instance.bundle(b).trivial()) {
        throw EngineError("standard DA accepts only single-school entries; '" +
                          instance.student_name(rol.student) + "' lists bundle '" +
                          instance.bundle(b).name + "'");
      }
    }
  }
  RoundState state(instance);
  Recorder recorder(options.record_trace);
  int round = 0;
  while (true) {
    const std::vector<StudentId> applicants = Apply(instance, rols, state, round + 1, recorder);
    if (applicants.empty()) break;
    ++round;
    std::vector<bool> touched(instance.num_schools(), false);
    for (StudentId i : applicants) touched[state.held[i.index()]->index()] = true;
    std::vector<int> load(instance.num_schools(), 0);
    for (int i = 0; i < instance.num_students(); ++i) {
      if (state.held[i] && !touched[state.held[i]->index()]) ++load[state.held[i]->index()];
    }
    for (const School& school : instance.schools()) {
      if (!touched[school.id.index()]) continue;
      const BundleId b = instance.TrivialBundle(school.id);
      for (StudentId i : school.priority) {
        if (state.held[i.index()] != b) continue;
        if (load[school.id.index()] < school.quota) {
          ++load[school.id.index()];
          if (options.record_trace) {
            std::vector<int> remaining(instance.num_bundles());
            for (const Bundle& x : instance.bundles()) {
              int used = 0;
              for (SchoolId s : x.schools) used += load[s.index()];
              remaining[x.id.index()] = x.quota - used;
            }
            recorder.Admit(round, 0, i, b, remaining);
          }
        } else {
          recorder.Reject(round, 0, i, b);
          Reject(state, i);
        }
      }
    }
  }
  return Finish(instance, state, recorder, round);
}

EngineResult RunBundleDaSimple(const Instance& instance, const RolProfile& rols,
                               const EngineOptions& options) {
  if (!instance.simple()) {
    throw EngineError(
        "the bundle system is not simple; use the general engine with a tie-break order");
  }
  RequireValidRols(instance, rols);
  const auto& hierarchies = instance.simplicity().hierarchies;
  std::vector<int> sequence = options.hierarchy_order;
  if (sequence.empty()) {
    for (std::size_t h = 0; h < hierarchies.size(); ++h) sequence.push_back(static_cast<int>(h));
  } else {
    std::vector<int> sorted = sequence;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t h = 0; h < sorted.size(); ++h) {
      if (sorted[h] != static_cast<int>(h) || sorted.size() != hierarchies.size()) {
        throw std::invalid_argument("hierarchy_order must be a permutation of the hierarchies");
      }
    }
  }

  RoundState state(instance);
  Quotas quotas(instance);
  Recorder recorder(options.record_trace);
  int round = 0;
  while (true) {
    const std::vector<StudentId> applicants = Apply(instance, rols, state, round + 1, recorder);
    if (applicants.empty()) break;
    ++round;
    std::vector<bool> touched(hierarchies.size(), false);
    for (StudentId i : applicants) touched[instance.HierarchyOf(*state.held[i.index()])] = true;
    for (int h : sequence) {
      if (!touched[h]) continue;
      const SubHierarchy& tree = hierarchies[h];
      quotas.Reset(tree.bundles);
      for (StudentId i : tree.order) {
        const auto& target = state.held[i.index()];
        if (!target || instance.HierarchyOf(*target) != h) continue;
        if (quotas[*target] > 0) {
          quotas.Admit(*target);
          recorder.Admit(round, 0, i, *target, quotas.values());
        } else {
          recorder.Reject(round, 0, i, *target);
          Reject(state, i);
        }
      }
    }
  }
  return Finish(instance, state, recorder, round);
}

EngineResult RunBundleDaGeneral(const Instance& instance, const RolProfile& rols,
                                const TieBreakOrder& tiebreak, const EngineOptions& options) {
  RequireValidRols(instance, rols);
  if (static_cast<int>(tiebreak.order().size()) != instance.num_students()) {
    throw std::invalid_argument("tie-break order does not match the instance");
  }
  const auto& hierarchies = instance.simplicity().hierarchies;
  RoundState state(instance);
  Quotas quotas(instance);
  Recorder recorder(options.record_trace);
  int round = 0;
  while (true) {
    const std::vector<StudentId> applicants = Apply(instance, rols, state, round + 1, recorder);
    if (applicants.empty()) break;
    ++round;
    const std::vector<int> touched = TouchedHierarchies(instance, state, applicants);
    std::vector<SchoolId> schools;
    for (int h : touched) {
      quotas.Reset(hierarchies[h].bundles);
      schools.insert(schools.end(), hierarchies[h].schools.begin(), hierarchies[h].schools.end());
    }
    std::sort(schools.begin(), schools.end());
    const std::vector<StudentId> members = MembersOf(instance, state, touched);
    std::vector<bool> admitted(instance.num_students(), false);
    auto target = [&](StudentId i) { return *state.held[i.index()]; };
    auto admit = [&](int step, StudentId i) {
      quotas.Admit(target(i));
      admitted[i.index()] = true;
      recorder.Admit(round, step, i, target(i), quotas.values());
    };

    for (int step = 1;; ++step) {
      std::vector<StudentId> active;
      for (StudentId i : members) {
        if (!admitted[i.index()] && quotas[target(i)] > 0) active.push_back(i);
      }
      if (active.empty()) break;

      // Highest-priority applicant of every active school.
      std::vector<std::optional<StudentId>> best(instance.num_schools());
      for (SchoolId s : schools) {
        if (quotas[instance.TrivialBundle(s)] <= 0) continue;
        for (StudentId i : active) {
          if (!instance.Contains(target(i), s)) continue;
          if (!best[s.index()] || instance.HigherPriority(s, i, *best[s.index()])) best[s.index()] = i;
        }
      }
      std::vector<StudentId> h_set;
      for (StudentId i : active) {
        bool top = false;
        bool everywhere = true;
        for (SchoolId s : instance.bundle(target(i)).schools) {
          if (quotas[instance.TrivialBundle(s)] <= 0) continue;
          top = true;
          if (best[s.index()] != i) everywhere = false;
        }
        if (top && everywhere) h_set.push_back(i);
      }
      if (h_set.empty()) {
        throw InvariantError("round " + std::to_string(round) + " step " + std::to_string(step) +
                             ": highest-priority applicant set is empty");
      }
      for (std::size_t a = 0; a < h_set.size(); ++a) {
        for (std::size_t b = a + 1; b < h_set.size(); ++b) {
          if (instance.Overlaps(target(h_set[a]), target(h_set[b]))) {
            throw InvariantError("round " + std::to_string(round) + " step " +
                                 std::to_string(step) +
                                 ": highest-priority applicants have overlapping targets");
          }
        }
      }
      recorder.Step(round, step, h_set);

      // Settle maximally overdemanded bundles, innermost first.
      std::vector<StudentId> pending = h_set;
      while (true) {
        std::vector<int> excess(instance.num_bundles(), 0);
        std::vector<std::vector<StudentId>> demand(instance.num_bundles());
        for (const Bundle& b : instance.bundles()) {
          if (quotas[b.id] <= 0) continue;
          for (StudentId i : pending) {
            if (quotas[target(i)] > 0 && instance.IsStrictSubBundle(target(i), b.id)) {
              demand[b.id.index()].push_back(i);
            }
          }
          excess[b.id.index()] = static_cast<int>(demand[b.id.index()].size()) - quotas[b.id];
        }
        std::optional<BundleId> pick;
        for (const Bundle& b : instance.bundles()) {
          if (quotas[b.id] <= 0 || excess[b.id.index()] <= 0) continue;
          bool maximal = true;
          for (BundleId up : instance.Ancestors(b.id)) {
            if (quotas[up] > 0 && excess[b.id.index()] <= excess[up.index()]) maximal = false;
          }
          if (!maximal) continue;
          if (!pick || b.schools.size() < instance.bundle(*pick).schools.size()) pick = b.id;
        }
        if (!pick) break;
        std::vector<StudentId> d = demand[pick->index()];
        std::sort(d.begin(), d.end(),
                  [&](StudentId x, StudentId y) { return tiebreak.Precedes(x, y); });
        std::vector<StudentId> winners;
        for (StudentId i : d) {
          if (quotas[*pick] <= 0) break;
          if (quotas[target(i)] <= 0) continue;
          admit(step, i);
          winners.push_back(i);
        }
        quotas.Close(*pick);
        recorder.Overdemand(round, step, *pick, winners, quotas.values());
        std::erase_if(pending, [&](StudentId i) {
          return std::find(d.begin(), d.end(), i) != d.end();
        });
      }
      for (StudentId i : pending) {
        if (quotas[target(i)] > 0) admit(step, i);
      }
    }
    for (StudentId i : members) {
      if (admitted[i.index()]) continue;
      recorder.Reject(round, 0, i, target(i));
      Reject(state, i);
    }
  }
  return Finish(instance, state, recorder, round);
}

EngineResult RunBundleDa(const Instance& instance, const RolProfile& rols,
                         const TieBreakOrder& tiebreak, const EngineOptions& options) {
  if (instance.simple()) return RunBundleDaSimple(instance, rols, options);
  return RunBundleDaGeneral(instance, rols, tiebreak, options);
}

bool EnginesAgreeOnSimple(const Instance& instance, const RolProfile& rols,
                          const TieBreakOrder& tiebreak) {
  EngineOptions options;
  options.record_trace = false;
  return RunBundleDaSimple(instance, rols, options).matching ==
         RunBundleDaGeneral(instance, rols, tiebreak, options).matching;
}

BundleMatching ReplayTrace(const Instance& instance, const RolProfile& rols,
                           const EngineTrace& trace) {
  std::vector<std::optional<BundleId>> target(instance.num_students());
  std::vector<int> applications(instance.num_students(), 0);
  BundleMatching nu(instance.num_students());
  auto fail = [](const TraceEvent& e, const std::string& what) {
    throw InvariantError("trace replay, round " + std::to_string(e.round) + ": " + what);
  };
  for (const TraceEvent& e : trace.events) {
    switch (e.kind) {
      case EventKind::kApply: {
        const auto& entries = rols[e.student.index()].entries;
        int& k = applications[e.student.index()];
        // Rejected entries are skipped implicitly; the application must be
        // to a later entry than the last one.
        auto it = std::find(entries.begin() + std::min<int>(k, entries.size()), entries.end(),
                            e.bundle);
        if (it == entries.end()) fail(e, "application out of ROL order");
        k = static_cast<int>(it - entries.begin()) + 1;
        if (target[e.student.index()]) fail(e, "held student applied again");
        target[e.student.index()] = e.bundle;
        break;
      }
      case EventKind::kAdmit:
      case EventKind::kReject:
        if (target[e.student.index()] != e.bundle) fail(e, "event for a bundle not applied to");
        if (e.kind == EventKind::kAdmit) {
          nu[e.student] = e.bundle;
          for (std::size_t b = 0; b < e.remaining.size(); ++b) {
            if (e.remaining[b] < 0 || e.remaining[b] > instance.bundles()[b].quota) {
              fail(e, "quota snapshot out of range");
            }
          }
        } else {
          nu[e.student].reset();
          target[e.student.index()].reset();
        }
        break;
      case EventKind::kStep:
      case EventKind::kOverdemand:
        break;
    }
  }
  if (!CheckBundleMatching(instance, nu).empty()) {
    throw InvariantError("trace replay produced an infeasible matching");
  }
  return nu;
}

std::string FormatTrace(const Instance& instance, const EngineTrace& trace) {
  std::ostringstream out;
  auto students = [&](const std::vector<StudentId>& list) {
    std::string s;
    for (std::size_t k = 0; k < list.size(); ++k) {
      if (k) s += ",";
      s += instance.student_name(list[k]);
    }
    return s;
  };
  for (const TraceEvent& e : trace.events) {
    out << "round=" << e.round << " step=" << e.step << " " << EventKindName(e.kind);
    switch (e.kind) {
      case EventKind::kApply:
      case EventKind::kAdmit:
      case EventKind::kReject:
        out << " student=" << instance.student_name(e.student)
            << " bundle=" << instance.bundle(e.bundle).name;
        break;
      case EventKind::kStep:
        out << " students=" << students(e.students);
        break;
      case EventKind::kOverdemand:
        out << " bundle=" << instance.bundle(e.bundle).name << " admitted=" << students(e.students);
        break;
    }
    if (!e.remaining.empty()) {
      out << " remaining=";
      for (std::size_t b = 0; b < e.remaining.size(); ++b) {
        if (b) out << ",";
        out << instance.bundles()[b].name << ":" << e.remaining[b];
      }
    }
    out << "\n";
  }
  return out.str();
}

}  // namespace bundlechoice
