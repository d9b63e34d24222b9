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


#include "support.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <limits>
#include <numeric>
#include <set>

#include "bundlechoice/io.h"

namespace bundlechoice::testing {
namespace {

[[noreturn]] void Die(const std::string& message) {
  std::fprintf(stderr, "test support: %s\n", message.c_str());
  std::abort();
}

constexpr int kUnranked = std::numeric_limits<int>::max();

using Mask = unsigned;

Mask SchoolMask(const Instance& instance, BundleId b) {
  Mask m = 0;
  for (SchoolId s : instance.bundle(b).schools) m |= 1u << s.value();
  return m;
}

bool Subset(Mask a, Mask b) { return (a & ~b) == 0; }

int Quota(const Instance& instance, Mask m) {
  int q = 0;
  for (int s = 0; s < instance.num_schools(); ++s) {
    if (m & (1u << s)) q += instance.school(SchoolId(s)).quota;
  }
  return q;
}

// Students whose assigned school set lies inside `m`.
int Load(const Instance& instance, const BundleMatching& nu, Mask m) {
  int n = 0;
  for (const auto& b : nu.assignment) {
    if (b && Subset(SchoolMask(instance, *b), m)) ++n;
  }
  return n;
}

int RolRank(const RolProfile& rols, StudentId i, const std::optional<BundleId>& b) {
  if (!b) return kUnranked;
  const auto& e = rols[i.index()].entries;
  auto it = std::find(e.begin(), e.end(), *b);
  return it == e.end() ? kUnranked : static_cast<int>(it - e.begin());
}

bool AboveOnAll(const Instance& instance, Mask m, StudentId a, StudentId b) {
  for (int s = 0; s < instance.num_schools(); ++s) {
    if ((m & (1u << s)) && instance.Rank(SchoolId(s), a) > instance.Rank(SchoolId(s), b)) {
      return false;
    }
  }
  return true;
}

bool Feasible(const Instance& instance, const BundleMatching& nu) {
  for (BundleId b{0}; b.value() < instance.num_bundles(); b = BundleId(b.value() + 1)) {
    const Mask m = SchoolMask(instance, b);
    if (Load(instance, nu, m) > Quota(instance, m)) return false;
  }
  return true;
}

// First ROL entry containing the school; students are indifferent inside an
// entry.
int InducedClass(const Instance& instance, const Rol& rol, std::optional<SchoolId> s) {
  if (!s) return kUnranked;
  for (std::size_t k = 0; k < rol.entries.size(); ++k) {
    if (instance.Contains(rol.entries[k], *s)) return static_cast<int>(k);
  }
  return kUnranked;
}

std::vector<std::string> Shuffled(std::vector<std::string> v, std::mt19937_64& gen) {
  std::shuffle(v.begin(), v.end(), gen);
  return v;
}

int Uniform(std::mt19937_64& gen, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(gen);
}

bool Coin(std::mt19937_64& gen, double p) { return std::bernoulli_distribution(p)(gen); }

// Either every student or a random subset containing `required`.
std::optional<std::vector<std::string>> RandomTargets(const std::vector<std::string>& students,
                                                      const std::set<std::string>& required,
                                                      double p_all, std::mt19937_64& gen) {
  if (Coin(gen, p_all)) return std::nullopt;
  std::vector<std::string> out;
  for (const auto& s : students) {
    if (required.count(s) || Coin(gen, 0.5)) out.push_back(s);
  }
  if (out.empty()) out.push_back(students[Uniform(gen, 0, static_cast<int>(students.size()) - 1)]);
  return out;
}

}  // namespace

std::string FixturePath(const std::string& name) { return std::string(BC_FIXTURE_DIR) + "/" + name; }

Instance LoadFixture(const std::string& name) { return LoadInstance(FixturePath(name)); }

RolProfile LoadFixtureRols(const Instance& instance, const std::string& name) {
  return LoadRols(instance, FixturePath(name));
}

BundleMatching NamedBundleMatching(const Instance& instance,
                                   const std::map<std::string, std::string>& assignment) {
  BundleMatching nu(instance.num_students());
  for (const auto& [student, bundle] : assignment) {
    auto i = instance.FindStudent(student);
    auto b = instance.FindBundle(bundle);
    if (!i || !b) Die("unknown name in " + student + "=" + bundle);
    nu[*i] = *b;
  }
  return nu;
}

StandardMatching NamedMatching(const Instance& instance,
                               const std::map<std::string, std::string>& assignment) {
  StandardMatching mu(instance.num_students());
  for (const auto& [student, school] : assignment) {
    auto i = instance.FindStudent(student);
    auto s = instance.FindSchool(school);
    if (!i || !s) Die("unknown name in " + student + "=" + school);
    mu[*i] = *s;
  }
  return mu;
}

std::string Describe(const Instance& instance, const BundleMatching& nu) {
  std::string out;
  for (StudentId i : instance.students()) {
    if (!out.empty()) out += ' ';
    out += instance.student_name(i) + "=" + (nu[i] ? instance.bundle(*nu[i]).name : "-");
  }
  return out;
}

std::string Describe(const Instance& instance, const StandardMatching& mu) {
  std::string out;
  for (StudentId i : instance.students()) {
    if (!out.empty()) out += ' ';
    out += instance.student_name(i) + "=" + (mu[i] ? instance.school(*mu[i]).name : "-");
  }
  return out;
}

RawInstance RandomRawInstance(std::mt19937_64& gen, bool simple) {
  RawInstance raw;
  const int n = Uniform(gen, 1, 6);
  const int m = Uniform(gen, 1, 5);
  for (int k = 0; k < n; ++k) raw.students.push_back("i" + std::to_string(k + 1));
  std::vector<std::string> schools;
  for (int k = 0; k < m; ++k) schools.push_back("s" + std::to_string(k + 1));
  raw.rol_length = Uniform(gen, 1, 3);

  // Inner units: runs of shuffled schools, some of them bundled. Outer units
  // group consecutive inner units; groups of two or more become bundles.
  struct Unit {
    std::vector<std::string> schools;
    int bundle = -1;  // Index into raw.bundles.
  };
  const std::vector<std::string> order = Shuffled(schools, gen);
  std::vector<Unit> inner;
  for (std::size_t k = 0; k < order.size();) {
    const int len = std::min<int>(Uniform(gen, 1, 3), static_cast<int>(order.size() - k));
    inner.push_back({{order.begin() + k, order.begin() + k + len}, -1});
    k += len;
  }
  std::vector<std::vector<int>> outer;
  for (std::size_t k = 0; k < inner.size();) {
    const int len = std::min<int>(Uniform(gen, 1, 3), static_cast<int>(inner.size() - k));
    outer.emplace_back();
    for (int t = 0; t < len; ++t) outer.back().push_back(static_cast<int>(k) + t);
    k += len;
  }

  // Targets shrink towards the root; each school's priority follows one
  // global order on the targets of its innermost bundle.
  const std::vector<std::string> sigma = Shuffled(raw.students, gen);
  const double p_all = simple ? 0.5 : 0.1;
  const double p_bundle = simple ? 0.7 : 0.9;
  std::map<std::string, std::vector<std::string>> priority;
  for (const auto& group : outer) {
    std::vector<std::string> members;
    for (int u : group) members.insert(members.end(), inner[u].schools.begin(), inner[u].schools.end());
    std::optional<RawBundle> root;
    std::set<std::string> root_targets;
    if (group.size() >= 2 && members.size() >= 2 && Coin(gen, p_bundle)) {
      root = RawBundle{"b" + std::to_string(raw.bundles.size() + 1), members,
                       RandomTargets(raw.students, {}, p_all, gen)};
      if (root->targets) root_targets.insert(root->targets->begin(), root->targets->end());
      else root_targets.insert(raw.students.begin(), raw.students.end());
      std::sort(root->schools.begin(), root->schools.end());
      raw.bundles.push_back(*root);
    }
    const std::vector<std::string> tree_order = Shuffled(raw.students, gen);
    for (int u : group) {
      Unit& unit = inner[u];
      std::set<std::string> targets = root_targets;
      const bool same_as_root = root && unit.schools.size() == members.size();
      if (unit.schools.size() >= 2 && !same_as_root && Coin(gen, p_bundle)) {
        RawBundle b{"b" + std::to_string(raw.bundles.size() + 1), unit.schools,
                    RandomTargets(raw.students, root_targets, p_all, gen)};
        if (root && !root->targets) b.targets = std::nullopt;
        std::sort(b.schools.begin(), b.schools.end());
        if (b.targets) targets = {b.targets->begin(), b.targets->end()};
        else targets = {raw.students.begin(), raw.students.end()};
        unit.bundle = static_cast<int>(raw.bundles.size());
        raw.bundles.push_back(b);
      }
      for (const auto& s : unit.schools) {
        if (simple) {
          priority[s] = tree_order;
          continue;
        }
        // Targets take random positions in their sigma order; the others
        // fill the rest in random order.
        std::vector<std::string> ranked;
        std::vector<std::string> others;
        for (const auto& i : sigma) (targets.count(i) ? ranked : others).push_back(i);
        others = Shuffled(others, gen);
        std::vector<bool> slot(raw.students.size(), false);
        std::fill(slot.begin(), slot.begin() + ranked.size(), true);
        std::shuffle(slot.begin(), slot.end(), gen);
        auto rt = ranked.begin();
        auto ot = others.begin();
        std::vector<std::string> p;
        for (bool take_target : slot) p.push_back(take_target ? *rt++ : *ot++);
        priority[s] = p;
      }
    }
  }
  for (const auto& s : schools) raw.schools.push_back({s, Uniform(gen, 1, 2), priority[s]});
  return raw;
}

RolProfile RandomRols(const Instance& instance, std::mt19937_64& gen) {
  RawRols raw;
  for (StudentId i : instance.students()) {
    std::vector<std::string> menu;
    for (BundleId b : instance.Menu(i)) menu.push_back(instance.bundle(b).name);
    menu = Shuffled(menu, gen);
    int len = std::min<int>(instance.rol_length(), static_cast<int>(menu.size()));
    if (Coin(gen, 0.25)) len = Uniform(gen, 0, len);
    raw.push_back({instance.student_name(i), {menu.begin(), menu.begin() + len}});
  }
  return BuildRols(instance, raw);
}

RandomMarket RandomMarketFor(std::uint64_t seed, bool simple) {
  std::mt19937_64 gen(seed);
  for (;;) {
    auto result = ValidateInstance(RandomRawInstance(gen, simple));
    if (auto* instance = std::get_if<Instance>(&result)) {
      RolProfile rols = RandomRols(*instance, gen);
      std::vector<StudentId> order = instance->students();
      std::shuffle(order.begin(), order.end(), gen);
      TieBreakOrder tiebreak(order, instance->num_students());
      return {std::move(*instance), std::move(rols), std::move(tiebreak)};
    }
    Die("generator produced an invalid instance: " + std::get<ValidationReport>(result).ToString());
  }
}

bool ReferenceBundleStable(const Instance& instance, const RolProfile& rols,
                           const BundleMatching& nu) {
  const int n = instance.num_students();
  for (StudentId i : instance.students()) {
    if (nu[i] && RolRank(rols, i, nu[i]) == kUnranked) return false;
  }
  for (StudentId i : instance.students()) {
    const int current = RolRank(rols, i, nu[i]);
    for (BundleId b : rols[i.index()].entries) {
      if (RolRank(rols, i, b) >= current) continue;
      const Mask mb = SchoolMask(instance, b);
      // Waste: nothing containing b is full.
      bool blocked = false;
      for (BundleId c{0}; c.value() < instance.num_bundles(); c = BundleId(c.value() + 1)) {
        const Mask mc = SchoolMask(instance, c);
        if (Subset(mb, mc) && Load(instance, nu, mc) == Quota(instance, mc)) blocked = true;
      }
      if (!blocked) return false;
      for (int jv = 0; jv < n; ++jv) {
        const StudentId j(jv);
        if (j == i || !nu[j]) continue;
        const Mask mj = SchoolMask(instance, *nu[j]);
        if (*nu[j] == b) {
          if (AboveOnAll(instance, mb, i, j)) return false;
        } else if (mj != mb && Subset(mj, mb)) {
          if (AboveOnAll(instance, mj, i, j)) return false;
        } else if (mj != mb && Subset(mb, mj)) {
          bool room = true;
          for (BundleId c{0}; c.value() < instance.num_bundles(); c = BundleId(c.value() + 1)) {
            const Mask mc = SchoolMask(instance, c);
            if (Subset(mb, mc) && mc != mj && Subset(mc, mj) &&
                Load(instance, nu, mc) >= Quota(instance, mc)) {
              room = false;
            }
          }
          if (room && AboveOnAll(instance, mb, i, j)) return false;
        }
      }
    }
  }
  return true;
}

bool ReferenceStandardStable(const Instance& instance, const RolProfile& rols,
                             const StandardMatching& mu) {
  std::vector<int> filled(instance.num_schools(), 0);
  for (const auto& s : mu.assignment) {
    if (s) ++filled[s->index()];
  }
  for (StudentId i : instance.students()) {
    const Rol& rol = rols[i.index()];
    if (mu[i] && InducedClass(instance, rol, mu[i]) == kUnranked) return false;
    const int current = InducedClass(instance, rol, mu[i]);
    for (const School& s : instance.schools()) {
      if (InducedClass(instance, rol, s.id) >= current) continue;
      if (filled[s.id.index()] < s.quota) return false;
      for (StudentId j : instance.students()) {
        if (mu[j] == s.id && instance.Rank(s.id, i) < instance.Rank(s.id, j)) return false;
      }
    }
  }
  return true;
}

std::vector<BundleMatching> AllRationalMatchings(const Instance& instance, const RolProfile& rols) {
  std::vector<BundleMatching> out;
  BundleMatching nu(instance.num_students());
  std::function<void(int)> fill = [&](int k) {
    if (k == instance.num_students()) {
      if (Feasible(instance, nu)) out.push_back(nu);
      return;
    }
    nu.assignment[k] = std::nullopt;
    fill(k + 1);
    for (BundleId b : rols[k].entries) {
      nu.assignment[k] = b;
      fill(k + 1);
    }
    nu.assignment[k] = std::nullopt;
  };
  fill(0);
  return out;
}

namespace {

bool MatchedSuperset(const BundleMatching& nu, const BundleMatching& other) {
  bool extra = false;
  for (std::size_t k = 0; k < nu.assignment.size(); ++k) {
    if (nu.assignment[k] && !other.assignment[k]) return false;
    if (!nu.assignment[k] && other.assignment[k]) extra = true;
  }
  return extra;
}

bool IndividuallyRational(const RolProfile& rols, const BundleMatching& nu) {
  for (std::size_t k = 0; k < nu.assignment.size(); ++k) {
    if (nu.assignment[k] && RolRank(rols, StudentId(static_cast<int>(k)), nu.assignment[k]) == kUnranked) {
      return false;
    }
  }
  return true;
}

}  // namespace

bool ReferenceSizeMaximal(const Instance& instance, const RolProfile& rols,
                          const BundleMatching& nu) {
  if (!IndividuallyRational(rols, nu)) return false;
  for (const BundleMatching& other : AllRationalMatchings(instance, rols)) {
    if (MatchedSuperset(nu, other)) return false;
  }
  return true;
}

bool ReferencePusm(const Instance& instance, const RolProfile& rols, const BundleMatching& nu) {
  if (!IndividuallyRational(rols, nu)) return false;
  for (const BundleMatching& other : AllRationalMatchings(instance, rols)) {
    if (!MatchedSuperset(nu, other)) continue;
    bool weakly_better = true;
    for (StudentId i : instance.students()) {
      if (RolRank(rols, i, other[i]) > RolRank(rols, i, nu[i])) weakly_better = false;
    }
    if (weakly_better) return false;
  }
  return true;
}

std::vector<StandardMatching> ReferenceImplementations(const Instance& instance,
                                                       const BundleMatching& nu) {
  std::vector<StandardMatching> out;
  StandardMatching mu(instance.num_students());
  std::vector<int> seats(instance.num_schools());
  for (const School& s : instance.schools()) seats[s.id.index()] = s.quota;
  std::function<void(int)> fill = [&](int k) {
    if (k == instance.num_students()) {
      out.push_back(mu);
      return;
    }
    if (!nu.assignment[k]) {
      fill(k + 1);
      return;
    }
    for (SchoolId s : instance.bundle(*nu.assignment[k]).schools) {
      if (seats[s.index()] == 0) continue;
      --seats[s.index()];
      mu.assignment[k] = s;
      fill(k + 1);
      mu.assignment[k] = std::nullopt;
      ++seats[s.index()];
    }
  };
  fill(0);
  std::sort(out.begin(), out.end());
  return out;
}

StandardMatching ReferenceDa(const Instance& instance, const RolProfile& rols) {
  const int n = instance.num_students();
  std::vector<std::size_t> next(n, 0);
  std::vector<std::vector<StudentId>> held(instance.num_schools());
  std::vector<bool> free(n, true);
  for (;;) {
    int proposer = -1;
    for (int k = 0; k < n; ++k) {
      if (free[k] && next[k] < rols[k].entries.size()) {
        proposer = k;
        break;
      }
    }
    if (proposer < 0) break;
    const BundleId b = rols[proposer].entries[next[proposer]++];
    if (!instance.bundle(b).trivial()) Die("ReferenceDa needs single-school lists");
    const SchoolId s = instance.bundle(b).schools.front();
    auto& h = held[s.index()];
    h.push_back(StudentId(proposer));
    free[proposer] = false;
    std::sort(h.begin(), h.end(), [&](StudentId a, StudentId c) { return instance.Rank(s, a) < instance.Rank(s, c); });
    if (static_cast<int>(h.size()) > instance.school(s).quota) {
      free[h.back().index()] = true;
      h.pop_back();
    }
  }
  StandardMatching mu(n);
  for (const School& s : instance.schools()) {
    for (StudentId i : held[s.id.index()]) mu[i] = s.id;
  }
  return mu;
}

PropertySweep RunPropertySweep(std::uint64_t first_seed, int markets) {
  PropertySweep sweep;
  auto fail = [&](int& counter, std::uint64_t seed, const std::string& what) {
    ++counter;
    if (sweep.failures.size() < 10) sweep.failures.push_back("seed " + std::to_string(seed) + ": " + what);
  };
  const EngineOptions quiet{false, {}};
  for (int k = 0; k < markets; ++k) {
    const std::uint64_t seed = first_seed + k;
    const RandomMarket m = RandomMarketFor(seed, k % 2 == 0);
    const Instance& inst = m.instance;
    ++sweep.markets;
    if (inst.simple()) ++sweep.simple_markets;

    EngineResult general;
    std::optional<BundleMatching> simple;
    try {
      general = RunBundleDaGeneral(inst, m.rols, m.tiebreak);
      if (inst.simple()) simple = RunBundleDaSimple(inst, m.rols, quiet).matching;
    } catch (const InvariantError& e) {
      fail(sweep.invariant_failures, seed, e.what());
      continue;
    }
    if (!ReferenceBundleStable(inst, m.rols, general.matching)) {
      fail(sweep.unstable_general, seed, "general engine unstable: " + Describe(inst, general.matching));
      if (general.trace.Count(EventKind::kOverdemand) == 0) ++sweep.unstable_without_tiebreak;
    }
    if (simple && !ReferenceBundleStable(inst, m.rols, *simple)) {
      fail(sweep.unstable_simple, seed, "simple engine unstable: " + Describe(inst, *simple));
    }
    for (const BundleMatching* nu : {&general.matching, simple ? &*simple : nullptr}) {
      if (nu && !ReferencePusm(inst, m.rols, *nu)) {
        fail(sweep.dominated_outputs, seed, "dominated " + Describe(inst, *nu));
      }
    }

    for (const BundleMatching& nu : AllRationalMatchings(inst, m.rols)) {
      if (!ReferenceBundleStable(inst, m.rols, nu)) continue;
      for (const StandardMatching& mu : ReferenceImplementations(inst, nu)) {
        ++sweep.implementations_checked;
        if (!ReferenceStandardStable(inst, m.rols, mu)) {
          fail(sweep.unstable_implementations, seed, "unstable implementation " + Describe(inst, mu));
        }
      }
    }

    if (!inst.simple()) continue;
    const BundleMatching& truthful = *simple;
    for (StudentId i : inst.students()) {
      const Rol& rol = m.rols[i.index()];
      const int held = RolRank(m.rols, i, truthful[i]);
      std::vector<BundleId> order = rol.entries;
      std::sort(order.begin(), order.end());
      do {
        if (order == rol.entries) continue;
        RolProfile dev = m.rols;
        dev[i.index()].entries = order;
        ++sweep.deviations_checked;
        const auto got = RunBundleDaSimple(inst, dev, quiet).matching[i];
        if (RolRank(m.rols, i, got) < held) {
          fail(sweep.truth_telling_violations, seed, inst.student_name(i) + " gains by reordering");
        }
      } while (std::next_permutation(order.begin(), order.end()));

      for (std::size_t slot = 0; slot < rol.entries.size(); ++slot) {
        const BundleId b = rol.entries[slot];
        for (BundleId sup : inst.Ancestors(b)) {
          if (!inst.Available(i, sup) || rol.Contains(sup)) continue;
          RolProfile dev = m.rols;
          dev[i.index()].entries[slot] = sup;
          ++sweep.deviations_checked;
          const auto got = RunBundleDaSimple(inst, dev, quiet).matching[i];
          const int s = static_cast<int>(slot);
          bool ok = true;
          if (held < s) ok = got == truthful[i];
          else if (held == s) ok = got == sup;
          else ok = got == sup || got == truthful[i];
          if (truthful[i] && !got) ok = false;
          if (!ok) {
            fail(sweep.monotonicity_violations, seed,
                 inst.student_name(i) + " replacing " + inst.bundle(b).name + " by " + inst.bundle(sup).name);
          }
        }
      }
    }
  }
  return sweep;
}

namespace {

// Schools A=0, B=1, C=2. Bundle names map to school sets.
std::vector<int> Exp1Schools(const std::string& name) {
  std::vector<int> out;
  for (char c : name) out.push_back(c - 'A');
  return out;
}

double Exp1Payoff(int type, int school) {
  if (school < 0) return 0;
  if (school == 2) return 20;
  return school == type ? 110 : 100;
}

bool Offered(int treatment, const std::string& name) {
  if (name.size() == 1) return true;
  return (treatment == 1 && name == "AB") || (treatment == 2 && name == "AC");
}

// Expected final school of each student (as probability vectors) under
// serial admission in `order`: each student takes the first listed option
// that can still seat it without exceeding a reserved bundle; bundle
// holders draw their seat uniformly from what is left once all have been
// admitted.
struct Outcome {
  std::array<std::array<double, 4>, 3> dist{};  // [student][A,B,C,none]
};

Outcome Serial(int treatment, const std::array<int, 3>& order,
               const std::array<std::vector<std::string>, 3>& rols) {
  std::array<std::optional<std::string>, 3> held;
  auto fits = [&](const std::string& name) {
    // Every offered option containing `name` must keep a free seat once the
    // newcomer is added.
    std::vector<std::string> supers = {name};
    if (treatment == 1 && (name == "A" || name == "B")) supers.push_back("AB");
    if (treatment == 2 && (name == "A" || name == "C")) supers.push_back("AC");
    for (const auto& sup : supers) {
      const auto members = Exp1Schools(sup);
      int load = 1;
      for (const auto& h : held) {
        if (!h) continue;
        const auto hs = Exp1Schools(*h);
        bool inside = std::all_of(hs.begin(), hs.end(), [&](int s) {
          return std::find(members.begin(), members.end(), s) != members.end();
        });
        if (inside) ++load;
      }
      if (load > static_cast<int>(members.size())) return false;
    }
    return true;
  };
  for (int k : order) {
    for (const auto& name : rols[k]) {
      if (!Offered(treatment, name)) Die("unavailable option " + name);
      if (fits(name)) {
        held[k] = name;
        break;
      }
    }
  }
  Outcome out;
  std::array<bool, 3> taken{};
  for (int k = 0; k < 3; ++k) {
    if (held[k] && held[k]->size() == 1) {
      const int s = Exp1Schools(*held[k]).front();
      taken[s] = true;
      out.dist[k][s] = 1;
    }
    if (!held[k]) out.dist[k][3] = 1;
  }
  // At most one two-school holder fits next to the singles in any treatment,
  // except when nobody else takes a seat of the bundle: then two holders
  // split the two seats.
  std::vector<int> bundled;
  for (int k = 0; k < 3; ++k) {
    if (held[k] && held[k]->size() == 2) bundled.push_back(k);
  }
  if (!bundled.empty()) {
    const auto seats = Exp1Schools(*held[bundled.front()]);
    std::vector<int> free;
    for (int s : seats) {
      if (!taken[s]) free.push_back(s);
    }
    if (free.size() < bundled.size()) Die("bundle overfilled");
    // Uniform over injective seat assignments.
    std::vector<int> perm(free.size());
    std::iota(perm.begin(), perm.end(), 0);
    int count = 0;
    std::array<std::array<double, 4>, 3> acc{};
    do {
      ++count;
      for (std::size_t t = 0; t < bundled.size(); ++t) acc[bundled[t]][free[perm[t]]] += 1;
    } while (std::next_permutation(perm.begin(), perm.end()));
    for (int k : bundled) {
      for (int s = 0; s < 3; ++s) out.dist[k][s] = acc[k][s] / count;
    }
  }
  return out;
}

template <typename Visit>
void ForEachWorld(const std::array<Exp1Lottery, 2>& lotteries,
                  const std::optional<std::pair<int, std::vector<std::string>>>& pinned,
                  Visit visit) {
  std::array<int, 3> order = {0, 1, 2};
  do {
    for (int types = 0; types < 8; ++types) {
      std::array<int, 3> t = {types & 1, (types >> 1) & 1, (types >> 2) & 1};
      if (pinned && t[0] != pinned->first) continue;
      const double type_w = pinned ? 0.25 : 0.125;
      const Exp1Lottery self = pinned ? Exp1Lottery{{1.0, pinned->second}} : lotteries[t[0]];
      for (const auto& c0 : self) {
        for (const auto& c1 : lotteries[t[1]]) {
          for (const auto& c2 : lotteries[t[2]]) {
            const double w = type_w * c0.first * c1.first * c2.first / 6.0;
            if (w == 0) continue;
            visit(order, t, std::array<std::vector<std::string>, 3>{c0.second, c1.second, c2.second}, w);
          }
        }
      }
    }
  } while (std::next_permutation(order.begin(), order.end()));
}

}  // namespace

ReferenceExp1 ReferenceExp1Metrics(int treatment, const std::array<Exp1Lottery, 2>& lotteries) {
  double payoff = 0, matched = 0, mismatched = 0;
  ForEachWorld(lotteries, std::nullopt,
               [&](const std::array<int, 3>& order, const std::array<int, 3>& types,
                   const std::array<std::vector<std::string>, 3>& rols, double w) {
                 const Outcome o = Serial(treatment, order, rols);
                 for (int k = 0; k < 3; ++k) {
                   for (int s = 0; s < 3; ++s) {
                     payoff += w * o.dist[k][s] * Exp1Payoff(types[k], s);
                     matched += w * o.dist[k][s];
                   }
                 }
                 for (int top = 0; top < 2; ++top) {
                   mismatched += w * (o.dist[order[top]][2] + o.dist[order[top]][3]);
                 }
               });
  ReferenceExp1 r;
  r.payoff = payoff / 3;
  r.match_rate = matched / 3;
  r.mismatch_rate = mismatched / 2;
  r.payoff_if_matched = matched > 0 ? payoff / matched : 0;
  return r;
}

double ReferenceExp1Deviation(int treatment, const std::array<Exp1Lottery, 2>& lotteries, int type,
                              const std::vector<std::string>& rol) {
  double value = 0;
  ForEachWorld(lotteries, std::make_pair(type, rol),
               [&](const std::array<int, 3>& order, const std::array<int, 3>& types,
                   const std::array<std::vector<std::string>, 3>& rols, double w) {
                 const Outcome o = Serial(treatment, order, rols);
                 for (int s = 0; s < 3; ++s) value += w * o.dist[0][s] * Exp1Payoff(types[0], s);
               });
  return value;
}

std::vector<double> ReferenceScoreDistribution() {
  // Composite Simpson integration of the normal density over each rounding
  // cell, renormalized to the admissible range.
  auto density = [](double x) {
    const double z = (x - 70.0) / 10.0;
    return std::exp(-0.5 * z * z) / (10.0 * std::sqrt(2.0 * std::acos(-1.0)));
  };
  std::vector<double> p(100);
  double total = 0;
  constexpr int kSteps = 200;
  for (int k = 1; k <= 100; ++k) {
    const double a = k - 0.5;
    const double h = 1.0 / kSteps;
    double sum = density(a) + density(a + 1.0);
    for (int t = 1; t < kSteps; ++t) sum += density(a + t * h) * (t % 2 ? 4 : 2);
    p[k - 1] = sum * h / 3;
    total += p[k - 1];
  }
  for (double& x : p) x /= total;
  return p;
}

}  // namespace bundlechoice::testing
