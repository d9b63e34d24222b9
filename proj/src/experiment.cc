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

#include "bundlechoice/experiment.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>

#include "bundlechoice/engines.h"
#include "bundlechoice/implementation.h"

namespace bundlechoice {
namespace {

constexpr double kProbabilityTolerance = 1e-9;

const EngineOptions kQuiet{false, {}};

Rol Resolve(const Instance& instance, StudentId student, const std::vector<std::string>& names) {
  Rol rol{student, {}};
  for (const std::string& name : names) {
    auto b = instance.FindBundle(name);
    if (!b) throw std::invalid_argument("unknown bundle '" + name + "' in strategy profile");
    rol.entries.push_back(*b);
  }
  const std::vector<ValidationIssue> issues = CheckRol(instance, rol);
  if (!issues.empty()) throw std::invalid_argument("invalid ROL in profile: " + issues.front().message);
  return rol;
}

std::string StudentName(int k) { return "p" + std::to_string(k + 1); }

RawInstance SchoolMarket(const std::vector<std::string>& schools, int students,
                         const std::vector<int>& priority, int rol_length) {
  RawInstance raw;
  for (int k = 0; k < students; ++k) raw.students.push_back(StudentName(k));
  std::vector<std::string> order;
  for (int k : priority) order.push_back(StudentName(k));
  for (const std::string& s : schools) raw.schools.push_back({s, 1, order});
  raw.rol_length = rol_length;
  return raw;
}

// --- three-school game -----------------------------------------------------

std::vector<std::array<int, 3>> Permutations() {
  std::vector<std::array<int, 3>> out;
  std::array<int, 3> p = {0, 1, 2};
  do {
    out.push_back(p);
  } while (std::next_permutation(p.begin(), p.end()));
  return out;
}

struct Exp1Market {
  Exp1Treatment treatment;
  std::vector<std::array<int, 3>> orders;
  std::vector<Instance> instances;  // One per priority order.
};

const Exp1Market& Market(Exp1Treatment treatment) {
  static const std::vector<Exp1Market> markets = [] {
    std::vector<Exp1Market> out;
    for (Exp1Treatment t : kExp1Treatments) {
      Exp1Market m{t, Permutations(), {}};
      for (const auto& order : m.orders) m.instances.push_back(Exp1Instance(t, order));
      out.push_back(std::move(m));
    }
    return out;
  }();
  return markets[static_cast<int>(treatment)];
}

// Profile lotteries resolved to bundle ids, indexed by type.
struct ResolvedChoice {
  double probability;
  std::vector<BundleId> entries;
};
using Lottery = std::vector<ResolvedChoice>;

Lottery ResolveLottery(const Instance& instance, const std::vector<RolChoice>& choices) {
  Lottery out;
  for (const RolChoice& c : choices) {
    out.push_back({c.probability, Resolve(instance, StudentId(0), c.rol).entries});
  }
  return out;
}

struct GroupOutcome {
  double payoff = 0.0;   // Sum over the group.
  int matched = 0;
  int mismatched = 0;    // Among the two highest-priority students.
};

GroupOutcome Exp1Outcome(const StandardMatching& mu, const std::array<int, 3>& types,
                         const std::array<int, 3>& order) {
  GroupOutcome g;
  for (int k = 0; k < 3; ++k) {
    const auto& s = mu.assignment[k];
    g.payoff += Exp1Utility(types[k], s ? s->value() : -1);
    if (s) ++g.matched;
  }
  for (int top = 0; top < 2; ++top) {
    const auto& s = mu.assignment[order[top]];
    if (!s || s->value() > 1) ++g.mismatched;
  }
  return g;
}

// Calls `visit(instance, order, rols, weight)` for every priority order and
// lottery outcome given fixed types. Student 0 may be pinned to `fixed`.
template <typename Visit>
void ForEachMarket(const Exp1Market& market, const std::array<int, 3>& types,
                   const std::array<Lottery, 2>& lotteries,
                   const std::optional<std::vector<BundleId>>& fixed, double weight, Visit visit) {
  const Lottery pinned = fixed ? Lottery{{1.0, *fixed}} : Lottery{};
  const Lottery& l0 = fixed ? pinned : lotteries[types[0]];
  const Lottery& l1 = lotteries[types[1]];
  const Lottery& l2 = lotteries[types[2]];
  for (const auto& c0 : l0) {
    for (const auto& c1 : l1) {
      for (const auto& c2 : l2) {
        const double w = weight * c0.probability * c1.probability * c2.probability;
        if (w == 0.0) continue;
        for (std::size_t p = 0; p < market.orders.size(); ++p) {
          RolProfile rols = {Rol{StudentId(0), c0.entries}, Rol{StudentId(1), c1.entries},
                             Rol{StudentId(2), c2.entries}};
          visit(market.instances[p], market.orders[p], rols, w / market.orders.size());
        }
      }
    }
  }
}

std::array<Lottery, 2> ResolveProfile(const Exp1Market& market, const StrategyProfile& profile) {
  RequireValidProfile(market.instances.front(), profile);
  return {ResolveLottery(market.instances.front(), profile.ChoicesFor(kTypeA)),
          ResolveLottery(market.instances.front(), profile.ChoicesFor(kTypeB))};
}

void Enumerate(const std::vector<BundleId>& menu, int length, std::vector<BundleId>& prefix,
               std::vector<std::vector<BundleId>>& out) {
  if (!prefix.empty()) out.push_back(prefix);
  if (static_cast<int>(prefix.size()) == length) return;
  for (BundleId b : menu) {
    if (std::find(prefix.begin(), prefix.end(), b) != prefix.end()) continue;
    prefix.push_back(b);
    Enumerate(menu, length, prefix, out);
    prefix.pop_back();
  }
}

// --- six-school game -------------------------------------------------------

const std::vector<std::string> kExp2Schools = {"A", "B", "C", "D", "E", "F"};

double Exp2SchoolUtility(const std::string& s) {
  static const std::map<std::string, double> u = {{"A", 50}, {"B", 45}, {"C", 40},
                                                  {"D", 80}, {"E", 30}, {"F", 20}};
  auto it = u.find(s);
  if (it == u.end()) throw std::invalid_argument("unknown school '" + s + "'");
  return it->second;
}

double NormalCdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

}  // namespace

// --- profiles ----------------------------------------------------------------

const std::vector<RolChoice>& StrategyProfile::ChoicesFor(int key) const {
  for (const StrategyRule& rule : rules) {
    if (rule.lo <= key && key <= rule.hi) return rule.choices;
  }
  throw std::invalid_argument("strategy profile has no rule for key " + std::to_string(key));
}

const std::vector<std::string>& StrategyProfile::Draw(int key, Rng& rng) const {
  const std::vector<RolChoice>& choices = ChoicesFor(key);
  const double u = rng.Uniform();
  double cumulative = 0.0;
  for (const RolChoice& c : choices) {
    cumulative += c.probability;
    if (u < cumulative) return c.rol;
  }
  return choices.back().rol;
}

void RequireValidProfile(const Instance& instance, const StrategyProfile& profile) {
  if (profile.rules.empty()) throw std::invalid_argument("strategy profile has no rules");
  for (const StrategyRule& rule : profile.rules) {
    if (rule.lo > rule.hi) throw std::invalid_argument("strategy rule has an empty key range");
    if (rule.choices.empty()) throw std::invalid_argument("strategy rule has no choices");
    double total = 0.0;
    for (const RolChoice& c : rule.choices) {
      if (!(c.probability >= 0.0)) throw std::invalid_argument("negative choice probability");
      total += c.probability;
      Resolve(instance, StudentId(0), c.rol);
    }
    if (std::abs(total - 1.0) > kProbabilityTolerance) {
      throw std::invalid_argument("choice probabilities of a strategy rule must sum to 1");
    }
  }
}

// --- estimates ---------------------------------------------------------------

void Accumulator::Add(double x) {
  ++n_;
  const double delta = x - mean_;
  mean_ += delta / static_cast<double>(n_);
  m2_ += delta * (x - mean_);
}

Estimate Accumulator::Get() const {
  Estimate e{mean_, 0.0};
  if (n_ > 1) e.std_error = std::sqrt(m2_ / static_cast<double>(n_ - 1) / static_cast<double>(n_));
  return e;
}

void RatioAccumulator::Add(double x, double y) {
  ++n_;
  sx_ += x;
  sy_ += y;
  sxx_ += x * x;
  syy_ += y * y;
  sxy_ += x * y;
}

Estimate RatioAccumulator::Get() const {
  if (n_ == 0 || sy_ == 0.0) return {};
  const double n = static_cast<double>(n_);
  const double r = sx_ / sy_;
  const double ybar = sy_ / n;
  // Sample variance of x - r*y.
  const double ss = sxx_ - 2 * r * sxy_ + r * r * syy_;
  const double var = n > 1 ? std::max(0.0, ss / (n - 1)) : 0.0;
  return {r, std::sqrt(var / n) / ybar};
}

// --- three-school game -------------------------------------------------------

const char* Exp1TreatmentName(Exp1Treatment t) {
  switch (t) {
    case Exp1Treatment::kNoBundleOne: return "NoBundle-One";
    case Exp1Treatment::kIndiffBundle: return "Indiff-Bundle";
    case Exp1Treatment::kStrictBundle: return "Strict-Bundle";
    case Exp1Treatment::kNoBundleTwo: return "NoBundle-Two";
  }
  return "unknown";
}

std::optional<Exp1Treatment> ParseExp1Treatment(const std::string& name) {
  for (Exp1Treatment t : kExp1Treatments) {
    if (name == Exp1TreatmentName(t)) return t;
  }
  return std::nullopt;
}

double Exp1Utility(int type, int school) {
  switch (school) {
    case 0: return type == kTypeA ? 110 : 100;
    case 1: return type == kTypeA ? 100 : 110;
    case 2: return 20;
    default: return 0;
  }
}

Instance Exp1Instance(Exp1Treatment treatment, const std::array<int, 3>& priority) {
  const int length = treatment == Exp1Treatment::kNoBundleTwo ? 2 : 1;
  RawInstance raw = SchoolMarket({"A", "B", "C"}, 3, {priority.begin(), priority.end()}, length);
  if (treatment == Exp1Treatment::kIndiffBundle) raw.bundles.push_back({"AB", {"A", "B"}, std::nullopt});
  if (treatment == Exp1Treatment::kStrictBundle) raw.bundles.push_back({"AC", {"A", "C"}, std::nullopt});
  return BuildInstance(raw);
}

StrategyProfile Exp1EquilibriumProfile(Exp1Treatment treatment) {
  std::vector<std::string> a, b;
  switch (treatment) {
    case Exp1Treatment::kNoBundleOne:
    case Exp1Treatment::kStrictBundle:
      a = {"A"};
      b = {"B"};
      break;
    case Exp1Treatment::kIndiffBundle:
      a = b = {"AB"};
      break;
    case Exp1Treatment::kNoBundleTwo:
      a = {"A", "B"};
      b = {"B", "A"};
      break;
  }
  return {{{kTypeA, kTypeA, {{1.0, a}}}, {kTypeB, kTypeB, {{1.0, b}}}}};
}

StrategyProfile Exp1MixedProfile(Exp1Treatment treatment, const std::vector<std::string>& deviant,
                                 double share) {
  StrategyProfile profile = Exp1EquilibriumProfile(treatment);
  for (StrategyRule& rule : profile.rules) {
    rule.choices.front().probability = 1.0 - share;
    rule.choices.push_back({share, deviant});
  }
  return profile;
}

Exp1Metrics Exp1ExactExpectation(Exp1Treatment treatment, const StrategyProfile& profile) {
  const Exp1Market& market = Market(treatment);
  const std::array<Lottery, 2> lotteries = ResolveProfile(market, profile);
  double payoff = 0, matched = 0, mismatched = 0;
  for (int mask = 0; mask < 8; ++mask) {
    const std::array<int, 3> types = {mask & 1, (mask >> 1) & 1, (mask >> 2) & 1};
    ForEachMarket(market, types, lotteries, std::nullopt, 1.0 / 8,
                  [&](const Instance& inst, const std::array<int, 3>& order, const RolProfile& rols,
                      double w) {
                    const BundleMatching nu = RunBundleDaSimple(inst, rols, kQuiet).matching;
                    for (const auto& [mu, p] : ImplementationDistribution(inst, nu)) {
                      const GroupOutcome g = Exp1Outcome(mu, types, order);
                      payoff += w * p * g.payoff;
                      matched += w * p * g.matched;
                      mismatched += w * p * g.mismatched;
                    }
                  });
  }
  Exp1Metrics m;
  m.payoff = payoff / 3;
  m.match_rate = matched / 3;
  m.mismatch_rate = mismatched / 2;
  m.payoff_if_matched = matched > 0 ? payoff / matched : 0.0;
  return m;
}

double Exp1DeviationValue(Exp1Treatment treatment, const StrategyProfile& profile, int type,
                          const std::vector<std::string>& rol) {
  const Exp1Market& market = Market(treatment);
  const std::array<Lottery, 2> lotteries = ResolveProfile(market, profile);
  const std::vector<BundleId> fixed = Resolve(market.instances.front(), StudentId(0), rol).entries;
  double value = 0;
  for (int mask = 0; mask < 4; ++mask) {
    const std::array<int, 3> types = {type, mask & 1, (mask >> 1) & 1};
    ForEachMarket(market, types, lotteries, fixed, 1.0 / 4,
                  [&](const Instance& inst, const std::array<int, 3>&, const RolProfile& rols,
                      double w) {
                    const BundleMatching nu = RunBundleDaSimple(inst, rols, kQuiet).matching;
                    for (const auto& [mu, p] : ImplementationDistribution(inst, nu)) {
                      const auto& s = mu.assignment[0];
                      value += w * p * Exp1Utility(type, s ? s->value() : -1);
                    }
                  });
  }
  return value;
}

std::vector<std::vector<std::string>> FeasibleRols(const Instance& instance) {
  std::vector<std::vector<BundleId>> ids;
  std::vector<BundleId> prefix;
  Enumerate(instance.Menu(StudentId(0)), instance.rol_length(), prefix, ids);
  std::vector<std::vector<std::string>> out;
  for (const auto& list : ids) {
    std::vector<std::string> names;
    for (BundleId b : list) names.push_back(instance.bundle(b).name);
    out.push_back(std::move(names));
  }
  return out;
}

EquilibriumReport Exp1VerifyEquilibrium(Exp1Treatment treatment) {
  const StrategyProfile profile = Exp1EquilibriumProfile(treatment);
  const Exp1Market& market = Market(treatment);
  EquilibriumReport report;
  report.treatment = treatment;
  const auto rols = FeasibleRols(market.instances.front());
  for (int type : {kTypeA, kTypeB}) {
    report.equilibrium[type] = profile.ChoicesFor(type).front().rol;
    auto& rows = report.table[type];
    for (const auto& rol : rols) {
      rows.push_back({rol, Exp1DeviationValue(treatment, profile, type, rol)});
    }
    std::stable_sort(rows.begin(), rows.end(), [](const BestResponseRow& a, const BestResponseRow& b) {
      return a.value > b.value;
    });
    report.equilibrium_value[type] =
        Exp1DeviationValue(treatment, profile, type, report.equilibrium[type]);
    report.best_response[type] = report.equilibrium_value[type] >= rows.front().value - 1e-9;
  }
  return report;
}

MetricTable Exp1MetricTable(const Exp1Metrics& m) {
  return {{"payoff", {m.payoff, 0}},
          {"match_rate", {m.match_rate, 0}},
          {"mismatch_rate", {m.mismatch_rate, 0}},
          {"payoff_if_matched", {m.payoff_if_matched, 0}}};
}

SimulationResult SimulateExp1(Exp1Treatment treatment, const StrategyProfile& profile,
                              std::int64_t rounds, std::uint64_t seed, bool keep_rounds) {
  if (rounds < 0) throw std::invalid_argument("rounds must be non-negative");
  const Exp1Market& market = Market(treatment);
  const std::array<Lottery, 2> lotteries = ResolveProfile(market, profile);
  std::map<std::array<int, 3>, std::size_t> index;
  for (std::size_t p = 0; p < market.orders.size(); ++p) index[market.orders[p]] = p;

  Accumulator payoff, match, mismatch;
  RatioAccumulator conditional;
  SimulationResult result;
  result.rounds = rounds;
  for (std::int64_t r = 0; r < rounds; ++r) {
    Rng rng(DeriveSeed(seed, static_cast<std::uint64_t>(r)));
    std::array<int, 3> types;
    for (int& t : types) t = static_cast<int>(rng.Below(2));
    std::vector<int> order = {0, 1, 2};
    rng.Shuffle(order);
    const std::array<int, 3> key = {order[0], order[1], order[2]};
    const Instance& inst = market.instances[index.at(key)];
    RolProfile rols;
    for (int k = 0; k < 3; ++k) {
      const Lottery& lottery = lotteries[types[k]];
      const double u = rng.Uniform();
      double cumulative = 0.0;
      const ResolvedChoice* pick = &lottery.back();
      for (const ResolvedChoice& c : lottery) {
        cumulative += c.probability;
        if (u < cumulative) {
          pick = &c;
          break;
        }
      }
      rols.push_back(Rol{StudentId(k), pick->entries});
    }
    const BundleMatching nu = RunBundleDaSimple(inst, rols, kQuiet).matching;
    const StandardMatching mu = Implement(inst, nu, ImplementationPolicy::Random(rng.Next()));
    const GroupOutcome g = Exp1Outcome(mu, types, key);
    payoff.Add(g.payoff / 3);
    match.Add(g.matched / 3.0);
    mismatch.Add(g.mismatched / 2.0);
    conditional.Add(g.payoff, g.matched);
    if (keep_rounds) {
      result.per_round.push_back({r + 1,
                                  {{"payoff", g.payoff / 3},
                                   {"match_rate", g.matched / 3.0},
                                   {"mismatch_rate", g.mismatched / 2.0}}});
    }
  }
  if (rounds > 0) {
    result.metrics = {{"payoff", payoff.Get()},
                      {"match_rate", match.Get()},
                      {"mismatch_rate", mismatch.Get()},
                      {"payoff_if_matched", conditional.Get()}};
  }
  return result;
}

// --- six-school game ---------------------------------------------------------

const char* Exp2TreatmentName(Exp2Treatment t) {
  switch (t) {
    case Exp2Treatment::kNoBundle: return "NoBundle";
    case Exp2Treatment::kIndiffBundle: return "Indiff-Bundle";
    case Exp2Treatment::kStrictBundle: return "Strict-Bundle";
  }
  return "unknown";
}

std::optional<Exp2Treatment> ParseExp2Treatment(const std::string& name) {
  for (Exp2Treatment t : kExp2Treatments) {
    if (name == Exp2TreatmentName(t)) return t;
  }
  return std::nullopt;
}

double Exp2Utility(const std::optional<std::string>& school) {
  return school ? Exp2SchoolUtility(*school) : 0.0;
}

Instance Exp2Instance(Exp2Treatment treatment, const std::vector<int>& scores) {
  std::vector<int> order(scores.size());
  for (std::size_t k = 0; k < order.size(); ++k) order[k] = static_cast<int>(k);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return scores[a] > scores[b]; });
  for (std::size_t k = 1; k < order.size(); ++k) {
    if (scores[order[k]] == scores[order[k - 1]]) {
      throw std::invalid_argument("scores must be pairwise distinct");
    }
  }
  RawInstance raw = SchoolMarket(kExp2Schools, static_cast<int>(scores.size()), order, 2);
  if (treatment == Exp2Treatment::kIndiffBundle) {
    raw.bundles.push_back({"ABC", {"A", "B", "C"}, std::nullopt});
  }
  if (treatment == Exp2Treatment::kStrictBundle) {
    raw.bundles.push_back({"DEF", {"D", "E", "F"}, std::nullopt});
  }
  return BuildInstance(raw);
}

StrategyProfile Exp2TruthfulProfile(Exp2Treatment treatment) {
  const std::vector<std::string> rol =
      treatment == Exp2Treatment::kIndiffBundle ? std::vector<std::string>{"D", "ABC"}
                                                : std::vector<std::string>{"D", "A"};
  return {{{1, 100, {{1.0, rol}}}}};
}

std::vector<int> SampleScores(int n, Rng& rng) {
  if (n < 0 || n > 100) throw std::invalid_argument("can draw at most 100 distinct scores");
  std::vector<int> scores(n);
  while (true) {
    for (int& s : scores) {
      do {
        s = static_cast<int>(std::lround(rng.Normal(70.0, 10.0)));
      } while (s < 1 || s > 100);
    }
    std::set<int> distinct(scores.begin(), scores.end());
    if (static_cast<int>(distinct.size()) == n) return scores;
  }
}

std::vector<int> SampleScores(int n, std::uint64_t seed) {
  Rng rng(seed);
  return SampleScores(n, rng);
}

std::vector<double> ScoreDistribution() {
  std::vector<double> p(100);
  double total = 0.0;
  for (int k = 1; k <= 100; ++k) {
    p[k - 1] = NormalCdf((k + 0.5 - 70.0) / 10.0) - NormalCdf((k - 0.5 - 70.0) / 10.0);
    total += p[k - 1];
  }
  for (double& x : p) x /= total;
  return p;
}

Exp2Metrics Exp2GroupMetrics(const Instance& instance, const StandardMatching& mu,
                             const std::vector<int>& scores,
                             std::vector<std::pair<int, int>>* envy_pairs) {
  const int n = instance.num_students();
  if (static_cast<int>(scores.size()) != n) throw std::invalid_argument("one score per student");
  std::vector<double> u(n);
  std::vector<bool> taken(instance.num_schools(), false);
  Exp2Metrics m;
  int matched = 0;
  for (int k = 0; k < n; ++k) {
    const auto& s = mu.assignment[k];
    u[k] = s ? Exp2SchoolUtility(instance.school(*s).name) : 0.0;
    if (s) {
      ++matched;
      taken[s->index()] = true;
    }
    m.realized += u[k];
  }
  std::vector<int> order(n);
  for (int k = 0; k < n; ++k) order[k] = k;
  std::sort(order.begin(), order.end(), [&](int a, int b) { return scores[a] > scores[b]; });
  int envy = 0;
  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) {
      if (u[order[a]] < u[order[b]]) {
        ++envy;
        if (envy_pairs) envy_pairs->push_back({order[a], order[b]});
      }
    }
  }
  // Unmatched students, best score first, each take the best vacant school.
  m.potential = m.realized;
  for (int k : order) {
    if (mu.assignment[k]) continue;
    int best = -1;
    for (int s = 0; s < instance.num_schools(); ++s) {
      if (taken[s]) continue;
      if (best < 0 || Exp2SchoolUtility(instance.school(SchoolId(s)).name) >
                          Exp2SchoolUtility(instance.school(SchoolId(best)).name)) {
        best = s;
      }
    }
    if (best < 0) break;
    taken[best] = true;
    m.potential += Exp2SchoolUtility(instance.school(SchoolId(best)).name);
  }
  m.payoff = m.realized / n;
  m.match_rate = static_cast<double>(matched) / n;
  m.payoff_if_matched = matched > 0 ? m.realized / matched : 0.0;
  const int pairs = n * (n - 1) / 2;
  m.envy_share = pairs > 0 ? static_cast<double>(envy) / pairs : 0.0;
  m.payoff_loss = m.potential > 0 ? 1.0 - m.realized / m.potential : 0.0;
  return m;
}

Exp2Outcome Exp2RunGroup(Exp2Treatment treatment, const std::vector<int>& scores,
                         const std::vector<std::vector<std::string>>& rols, std::uint64_t seed) {
  const Instance inst = Exp2Instance(treatment, scores);
  if (rols.size() != scores.size()) throw std::invalid_argument("one ROL per student");
  RolProfile profile;
  for (std::size_t k = 0; k < rols.size(); ++k) {
    profile.push_back(Resolve(inst, StudentId(static_cast<int>(k)), rols[k]));
  }
  Exp2Outcome out;
  out.bundle_matching = RunBundleDaSimple(inst, profile, kQuiet).matching;
  out.matching = Implement(inst, out.bundle_matching, ImplementationPolicy::Random(seed));
  for (const auto& s : out.matching.assignment) {
    out.payoffs.push_back(s ? Exp2SchoolUtility(inst.school(*s).name) : 0.0);
  }
  out.metrics = Exp2GroupMetrics(inst, out.matching, scores, &out.envy_pairs);
  return out;
}

SimulationResult SimulateExp2(Exp2Treatment treatment, const StrategyProfile& profile,
                              std::int64_t rounds, std::uint64_t seed, bool keep_rounds) {
  if (rounds < 0) throw std::invalid_argument("rounds must be non-negative");
  RequireValidProfile(Exp2Instance(treatment, {6, 5, 4, 3, 2, 1}), profile);
  Accumulator payoff, match, envy, loss, realized, potential;
  RatioAccumulator conditional;
  SimulationResult result;
  result.rounds = rounds;
  for (std::int64_t r = 0; r < rounds; ++r) {
    Rng rng(DeriveSeed(seed, static_cast<std::uint64_t>(r)));
    const std::vector<int> scores = SampleScores(6, rng);
    std::vector<std::vector<std::string>> rols;
    for (int s : scores) rols.push_back(profile.Draw(s, rng));
    const Exp2Outcome out = Exp2RunGroup(treatment, scores, rols, rng.Next());
    const Exp2Metrics& m = out.metrics;
    payoff.Add(m.payoff);
    match.Add(m.match_rate);
    envy.Add(m.envy_share);
    loss.Add(m.payoff_loss);
    realized.Add(m.realized);
    potential.Add(m.potential);
    conditional.Add(m.realized, m.match_rate * 6);
    if (keep_rounds) {
      result.per_round.push_back({r + 1,
                                  {{"payoff", m.payoff},
                                   {"match_rate", m.match_rate},
                                   {"envy_share", m.envy_share},
                                   {"payoff_loss", m.payoff_loss}}});
    }
  }
  if (rounds > 0) {
    result.metrics = {{"payoff", payoff.Get()},
                      {"match_rate", match.Get()},
                      {"payoff_if_matched", conditional.Get()},
                      {"envy_share", envy.Get()},
                      {"payoff_loss", loss.Get()},
                      {"realized_payoff", realized.Get()},
                      {"potential_payoff", potential.Get()}};
  }
  return result;
}

}  // namespace bundlechoice
