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

#include "bundlechoice/stability.h"

#include <algorithm>
#include <functional>
#include <limits>
#include <set>
#include <utility>

namespace bundlechoice {
namespace {

// ROL position of `b` for student `i`; unmatched and unreported bundles sit
// just past the end.
int Position(const RolProfile& rols, StudentId i, const std::optional<BundleId>& b) {
  const Rol& rol = rols[i.index()];
  const int end = static_cast<int>(rol.entries.size());
  if (!b) return end;
  const int r = rol.RankOf(*b);
  return r < 0 ? end : r;
}

bool Reported(const RolProfile& rols, StudentId i, const std::optional<BundleId>& b) {
  return b && rols[i.index()].Contains(*b);
}

void RequireSizes(const Instance& instance, const RolProfile& rols, std::size_t matching_size) {
  RequireValidRols(instance, rols);
  if (static_cast<int>(matching_size) != instance.num_students()) {
    throw std::invalid_argument("matching does not cover every student");
  }
}

// Depth-first search over individually rational bundle-matchings. Each
// student's options are tried in the given order, so the first accepted
// leaf is the canonically least one.
class MatchingSearch {
 public:
  MatchingSearch(const Instance& instance,
                 std::vector<std::vector<std::optional<BundleId>>> options,
                 std::function<bool(const BundleMatching&)> accept)
      : instance_(instance), options_(std::move(options)), accept_(std::move(accept)),
        load_(instance.num_bundles(), 0), current_(instance.num_students()) {}

  std::optional<BundleMatching> Run() {
    if (Dfs(0)) return current_;
    return std::nullopt;
  }

 private:
  bool Fits(BundleId b) const {
    if (load_[b.index()] >= instance_.bundle(b).quota) return false;
    for (BundleId up : instance_.Ancestors(b)) {
      if (load_[up.index()] >= instance_.bundle(up).quota) return false;
    }
    return true;
  }

  void Add(BundleId b, int delta) {
    load_[b.index()] += delta;
    for (BundleId up : instance_.Ancestors(b)) load_[up.index()] += delta;
  }

  bool Dfs(std::size_t k) {
    if (k == options_.size()) return accept_(current_);
    const StudentId i(static_cast<int>(k));
    for (const auto& option : options_[k]) {
      if (option) {
        if (!Fits(*option)) continue;
        Add(*option, 1);
        current_[i] = option;
        const bool found = Dfs(k + 1);
        if (found) return true;
        current_[i].reset();
        Add(*option, -1);
      } else if (Dfs(k + 1)) {
        return true;
      }
    }
    return false;
  }

  const Instance& instance_;
  std::vector<std::vector<std::optional<BundleId>>> options_;
  std::function<bool(const BundleMatching&)> accept_;
  std::vector<int> load_;
  BundleMatching current_;
};

void RequireBound(const RolProfile& rols, std::uint64_t bound) {
  const std::uint64_t space = SearchSpace(rols);
  if (space > bound) {
    throw OracleRefusal("search space of " + std::to_string(space) +
                        " candidate assignments exceeds the bound of " + std::to_string(bound));
  }
}

// Options for a student who must end up at least as well off as under `nu`.
std::vector<std::optional<BundleId>> WeaklyBetter(const RolProfile& rols, StudentId i,
                                                  const BundleMatching& nu) {
  const Rol& rol = rols[i.index()];
  std::vector<std::optional<BundleId>> out;
  if (Reported(rols, i, nu[i])) {
    for (int r = 0; r <= rol.RankOf(*nu[i]); ++r) out.emplace_back(rol.entries[r]);
  } else {
    for (BundleId b : rol.entries) out.emplace_back(b);
    out.emplace_back(std::nullopt);
  }
  return out;
}

OracleResult SizeSearch(const Instance& instance, const RolProfile& rols, const BundleMatching& nu,
                        std::uint64_t bound, bool pareto) {
  RequireSizes(instance, rols, nu.assignment.size());
  OracleResult result;
  for (StudentId i : instance.students()) {
    if (nu[i] && !Reported(rols, i, nu[i])) {
      result.reason = "not individually rational: '" + instance.student_name(i) +
                      "' holds an unreported bundle";
      return result;
    }
  }
  RequireBound(rols, bound);
  std::vector<std::vector<std::optional<BundleId>>> options;
  for (StudentId i : instance.students()) {
    if (pareto) {
      options.push_back(WeaklyBetter(rols, i, nu));
    } else {
      std::vector<std::optional<BundleId>> list(rols[i.index()].entries.begin(),
                                                rols[i.index()].entries.end());
      if (!nu[i]) list.emplace_back(std::nullopt);
      options.push_back(std::move(list));
    }
  }
  // Previously matched students stay matched by construction, so a strict
  // superset needs one newcomer.
  auto accept = [&](const BundleMatching& other) {
    for (StudentId i : instance.students()) {
      if (!nu[i] && other[i]) return true;
    }
    return false;
  };
  result.witness = MatchingSearch(instance, std::move(options), accept).Run();
  result.holds = !result.witness.has_value();
  if (!result.holds) result.reason = "a bundle-matching with strictly more matched students exists";
  return result;
}

EngineResult RunEngine(EngineKind kind, const Instance& instance, const RolProfile& rols,
                       const std::optional<TieBreakOrder>& tiebreak) {
  EngineOptions options;
  options.record_trace = false;
  const TieBreakOrder order = tiebreak ? *tiebreak : TieBreakOrder::Canonical(instance.num_students());
  switch (kind) {
    case EngineKind::kSimple: return RunBundleDaSimple(instance, rols, options);
    case EngineKind::kGeneral: return RunBundleDaGeneral(instance, rols, order, options);
    case EngineKind::kAuto: return RunBundleDa(instance, rols, order, options);
  }
  throw std::invalid_argument("unknown engine kind");
}

std::string Describe(const Instance& instance, const std::optional<BundleId>& b) {
  return b ? instance.bundle(*b).name : std::string("unmatched");
}

}  // namespace

const char* ViolationKindName(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::kIndividualRationality: return "individual-rationality";
    case ViolationKind::kWaste: return "waste";
    case ViolationKind::kEnvyCase1: return "envy-case-1";
    case ViolationKind::kEnvyCase2: return "envy-case-2";
    case ViolationKind::kEnvyCase3: return "envy-case-3";
    case ViolationKind::kEnvy: return "envy";
  }
  return "unknown";
}

std::vector<EnvyPair> EnvyPairs(const StabilityVerdict& verdict) {
  std::vector<EnvyPair> out;
  std::set<std::pair<StudentId, StudentId>> seen;
  for (const Violation& v : verdict.violations) {
    if (!v.other) continue;
    if (seen.insert({v.student, *v.other}).second) out.push_back({v.student, *v.other, v.kind});
  }
  return out;
}

StabilityVerdict CheckBundleStability(const Instance& instance, const RolProfile& rols,
                                      const BundleMatching& nu) {
  RequireSizes(instance, rols, nu.assignment.size());
  StabilityVerdict verdict;
  const std::vector<int> q = Occupancy(instance, nu);
  auto full = [&](BundleId b) { return q[b.index()] == instance.bundle(b).quota; };
  auto above_on_all = [&](BundleId where, StudentId i, StudentId j) {
    return instance.HigherPriorityOnAll(where, i, j);
  };

  for (StudentId i : instance.students()) {
    if (nu[i] && !Reported(rols, i, nu[i])) {
      verdict.violations.push_back(
          {ViolationKind::kIndividualRationality, i, std::nullopt, nu[i], std::nullopt});
    }
  }
  for (StudentId i : instance.students()) {
    const Rol& rol = rols[i.index()];
    const int held = Position(rols, i, nu[i]);
    for (int r = 0; r < held; ++r) {
      const BundleId b = rol.entries[r];
      bool saturated = full(b);
      for (BundleId up : instance.Ancestors(b)) saturated = saturated || full(up);
      if (!saturated) {
        verdict.violations.push_back({ViolationKind::kWaste, i, std::nullopt, b, std::nullopt});
      }
      for (StudentId j : instance.students()) {
        if (j == i || !nu[j]) continue;
        const BundleId other = *nu[j];
        if (other == b) {
          if (above_on_all(b, i, j)) {
            verdict.violations.push_back({ViolationKind::kEnvyCase1, i, j, b, std::nullopt});
          }
        } else if (instance.IsStrictSubBundle(other, b)) {
          if (above_on_all(other, i, j)) {
            verdict.violations.push_back({ViolationKind::kEnvyCase2, i, j, b, std::nullopt});
          }
        } else if (instance.IsStrictSubBundle(b, other)) {
          // Every bundle from b up to (excluding) nu(j) must have room.
          bool room = !full(b);
          for (BundleId up : instance.Ancestors(b)) {
            if (up == other) break;
            room = room && !full(up);
          }
          if (room && above_on_all(b, i, j)) {
            verdict.violations.push_back({ViolationKind::kEnvyCase3, i, j, b, std::nullopt});
          }
        }
      }
    }
  }
  return verdict;
}

StabilityVerdict CheckStandardStability(const Instance& instance, const RolProfile& rols,
                                        const StandardMatching& mu) {
  RequireSizes(instance, rols, mu.assignment.size());
  StabilityVerdict verdict;
  std::vector<int> load(instance.num_schools(), 0);
  for (const auto& s : mu.assignment) {
    if (s) ++load[s->index()];
  }
  std::vector<InducedPreference> prefs;
  for (const Rol& rol : rols) prefs.push_back(InducePreference(instance, rol));

  for (StudentId i : instance.students()) {
    const InducedPreference& pref = prefs[i.index()];
    if (mu[i] && !pref.Acceptable(*mu[i])) {
      verdict.violations.push_back(
          {ViolationKind::kIndividualRationality, i, std::nullopt, std::nullopt, mu[i]});
    }
    for (const School& s : instance.schools()) {
      if (load[s.id.index()] < s.quota && pref.StrictlyPrefers(s.id, mu[i])) {
        verdict.violations.push_back({ViolationKind::kWaste, i, std::nullopt, std::nullopt, s.id});
      }
    }
    for (StudentId j : instance.students()) {
      if (j == i || !mu[j]) continue;
      if (pref.StrictlyPrefers(mu[j], mu[i]) && instance.HigherPriority(*mu[j], i, j)) {
        verdict.violations.push_back({ViolationKind::kEnvy, i, j, std::nullopt, mu[j]});
      }
    }
  }
  return verdict;
}

std::uint64_t SearchSpace(const RolProfile& rols) {
  std::uint64_t space = 1;
  for (const Rol& rol : rols) {
    const std::uint64_t options = rol.entries.size() + 1;
    if (space > std::numeric_limits<std::uint64_t>::max() / options) {
      return std::numeric_limits<std::uint64_t>::max();
    }
    space *= options;
  }
  return space;
}

OracleResult OracleSizeMaximal(const Instance& instance, const RolProfile& rols,
                               const BundleMatching& nu, std::uint64_t bound) {
  return SizeSearch(instance, rols, nu, bound, /*pareto=*/false);
}

OracleResult OracleParetoUndominatedSizeMaximal(const Instance& instance, const RolProfile& rols,
                                                const BundleMatching& nu, std::uint64_t bound) {
  return SizeSearch(instance, rols, nu, bound, /*pareto=*/true);
}

std::optional<BundleMatching> FindStableParetoImprovement(const Instance& instance,
                                                          const RolProfile& rols,
                                                          const BundleMatching& nu,
                                                          std::uint64_t bound) {
  RequireSizes(instance, rols, nu.assignment.size());
  RequireBound(rols, bound);
  std::vector<std::vector<std::optional<BundleId>>> options;
  for (StudentId i : instance.students()) options.push_back(WeaklyBetter(rols, i, nu));
  auto accept = [&](const BundleMatching& other) {
    bool better = false;
    for (StudentId i : instance.students()) {
      if (Position(rols, i, other[i]) < Position(rols, i, nu[i])) better = true;
    }
    return better && CheckBundleStability(instance, rols, other).stable();
  };
  return MatchingSearch(instance, std::move(options), accept).Run();
}

PropertyResult PropertyTruthTelling(const Instance& instance, const RolProfile& rols,
                                    StudentId student) {
  RequireValidRols(instance, rols);
  const EngineOptions quiet{false, {}};
  const BundleMatching truthful = RunBundleDaSimple(instance, rols, quiet).matching;
  const int base = Position(rols, student, truthful[student]);

  std::vector<BundleId> order = rols[student.index()].entries;
  std::sort(order.begin(), order.end());
  PropertyResult result;
  do {
    if (order == rols[student.index()].entries) continue;
    RolProfile deviated = rols;
    deviated[student.index()].entries = order;
    const BundleMatching other = RunBundleDaSimple(instance, deviated, quiet).matching;
    // Compare under the original ROL.
    if (Position(rols, student, other[student]) < base) {
      result.pass = false;
      result.deviation = deviated[student.index()];
      result.detail = "'" + instance.student_name(student) + "' obtains " +
                      Describe(instance, other[student]) + " instead of " +
                      Describe(instance, truthful[student]) + " by reordering";
      return result;
    }
  } while (std::next_permutation(order.begin(), order.end()));
  return result;
}

PropertyResult PropertySupBundleMonotone(const Instance& instance, const RolProfile& rols,
                                         StudentId student, BundleId b, BundleId b_sup,
                                         EngineKind engine,
                                         const std::optional<TieBreakOrder>& tiebreak) {
  RequireValidRols(instance, rols);
  const Rol& rol = rols[student.index()];
  const int slot = rol.RankOf(b);
  if (slot < 0) throw std::invalid_argument("bundle is not in the student's ROL");
  if (!instance.IsStrictSubBundle(b, b_sup)) {
    throw std::invalid_argument("replacement is not a strict sup-bundle");
  }
  if (rol.Contains(b_sup)) throw std::invalid_argument("sup-bundle is already in the ROL");
  if (!instance.Available(student, b_sup)) {
    throw std::invalid_argument("sup-bundle is not available to the student");
  }

  const BundleMatching before = RunEngine(engine, instance, rols, tiebreak).matching;
  RolProfile replaced = rols;
  replaced[student.index()].entries[slot] = b_sup;
  const BundleMatching after = RunEngine(engine, instance, replaced, tiebreak).matching;

  const std::optional<BundleId> old_b = before[student];
  const std::optional<BundleId> new_b = after[student];
  const int held = Position(rols, student, old_b);
  PropertyResult result;
  result.deviation = replaced[student.index()];
  auto fail = [&](const std::string& clause) {
    result.pass = false;
    result.detail = clause + ": '" + instance.student_name(student) + "' moves from " +
                    Describe(instance, old_b) + " to " + Describe(instance, new_b);
  };
  if (held < slot) {
    if (new_b != old_b) fail("assignment above the replaced entry changed");
  } else if (held == slot) {
    if (new_b != b_sup) fail("assignment to the replaced entry did not move to the sup-bundle");
  } else if (new_b != b_sup && new_b != old_b) {
    fail("assignment below the replaced entry moved elsewhere");
  }
  if (result.pass && old_b && !new_b) fail("matched student became unmatched");
  return result;
}

std::vector<RolWarning> AuditRolDominance(const Instance& instance, const Rol& rol,
                                          const std::optional<std::vector<SchoolId>>& indifference) {
  std::vector<RolWarning> warnings;
  for (std::size_t k = 0; k < rol.entries.size(); ++k) {
    for (std::size_t j = 0; j < k; ++j) {
      if (instance.IsStrictSubBundle(rol.entries[k], rol.entries[j])) {
        warnings.push_back({static_cast<int>(k) + 1, rol.entries[k], rol.entries[j],
                            "'" + instance.bundle(rol.entries[k]).name + "' is ranked below its sup-bundle '" +
                                instance.bundle(rol.entries[j]).name +
                                "' and can never be reached"});
        break;
      }
    }
  }
  if (indifference && !indifference->empty()) {
    std::vector<SchoolId> cls = *indifference;
    std::sort(cls.begin(), cls.end());
    cls.erase(std::unique(cls.begin(), cls.end()), cls.end());
    std::optional<BundleId> whole;
    for (const Bundle& b : instance.bundles()) {
      if (b.schools == cls && instance.Available(rol.student, b.id)) whole = b.id;
    }
    if (whole && !rol.Contains(*whole)) {
      for (std::size_t k = 0; k < rol.entries.size(); ++k) {
        if (instance.IsStrictSubBundle(rol.entries[k], *whole)) {
          warnings.push_back({static_cast<int>(k) + 1, rol.entries[k], *whole,
                              "'" + instance.bundle(rol.entries[k]).name +
                                  "' covers only part of an indifference class offered as '" +
                                  instance.bundle(*whole).name + "'"});
        }
      }
    }
  }
  std::sort(warnings.begin(), warnings.end(),
            [](const RolWarning& a, const RolWarning& b) { return a.slot < b.slot; });
  return warnings;
}

}  // namespace bundlechoice
