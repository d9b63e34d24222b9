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


// Acceptance report: one PASS/FAIL line per criterion, followed by the
// individual checks. Exits 1 if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "bundlechoice/cli.h"
#include "bundlechoice/engines.h"
#include "bundlechoice/experiment.h"
#include "bundlechoice/implementation.h"
#include "bundlechoice/io.h"
#include "bundlechoice/stability.h"
#include "support.h"

using namespace bundlechoice;
using namespace bundlechoice::testing;

namespace {

class Criterion {
 public:
  void Check(bool ok, const std::string& what) { checks_.push_back({ok, what}); }
  void Budget(double seconds) { budget_ = seconds; }

  bool Report(int number, const std::string& title, double elapsed) const {
    bool ok = true;
    for (const auto& c : checks_) ok = ok && c.ok;
    const bool in_time = budget_ <= 0 || elapsed < budget_;
    std::printf("criterion %d: %s  %s (%.2f s%s)\n", number, ok && in_time ? "PASS" : "FAIL",
                title.c_str(), elapsed, in_time ? "" : ", over budget");
    for (const auto& c : checks_) std::printf("    %s  %s\n", c.ok ? "ok  " : "FAIL", c.what.c_str());
    return ok && in_time;
  }

 private:
  struct Item {
    bool ok;
    std::string what;
  };
  std::vector<Item> checks_;
  double budget_ = 0;
};

std::string Fmt(const char* format, double a, double b = 0, double c = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, format, a, b, c);
  return buf;
}

TieBreakOrder Order(const Instance& inst, const std::vector<std::string>& names) {
  std::vector<StudentId> ids;
  for (const std::string& n : names) ids.push_back(*inst.FindStudent(n));
  return TieBreakOrder(ids, inst.num_students());
}

double Round2(double x) { return std::round(x * 100) / 100; }

void Goldens(Criterion& c) {
  c.Budget(1.0);
  {
    const Instance inst = LoadFixture("example_4_1.json");
    const RolProfile rols = LoadFixtureRols(inst, "rols_4_1.json");
    const BundleMatching nu = RunBundleDa(inst, rols, TieBreakOrder::Canonical(8)).matching;
    c.Check(nu == NamedBundleMatching(inst, {{"i1", "s1"},
                                             {"i2", "b1234"},
                                             {"i3", "s3"},
                                             {"i5", "s5"},
                                             {"i6", "b567"},
                                             {"i7", "b56"},
                                             {"i8", "b1234"}}),
            "8-student market: bundle-matching");
    const StandardMatching mu = Implement(inst, nu, ImplementationPolicy::Deterministic());
    c.Check(mu == NamedMatching(inst, {{"i1", "s1"},
                                       {"i2", "s2"},
                                       {"i3", "s3"},
                                       {"i5", "s5"},
                                       {"i6", "s7"},
                                       {"i7", "s6"},
                                       {"i8", "s4"}}),
            "8-student market: final matching");
  }
  {
    const Instance inst = LoadFixture("appendix_d.json");
    const RolProfile rols = LoadFixtureRols(inst, "rols_d.json");
    const BundleMatching nu =
        RunBundleDa(inst, rols, Order(inst, {"i1", "i2", "i3", "i4", "i5", "i6", "i7", "i8"})).matching;
    c.Check(nu == NamedBundleMatching(inst, {{"i1", "s2"},
                                             {"i2", "b23"},
                                             {"i4", "s1"},
                                             {"i5", "b123"},
                                             {"i6", "s4"},
                                             {"i7", "s1"},
                                             {"i8", "b123"}}),
            "general market: bundle-matching");
    const StandardMatching expected = NamedMatching(inst, {{"i1", "s2"},
                                                           {"i2", "s2"},
                                                           {"i4", "s1"},
                                                           {"i5", "s3"},
                                                           {"i6", "s4"},
                                                           {"i7", "s1"},
                                                           {"i8", "s3"}});
    c.Check(Implement(inst, nu, ImplementationPolicy::Deterministic()) == expected,
            "general market: deterministic implementation");
    const auto all = EnumerateImplementations(inst, nu);
    c.Check(all.matchings.size() == 1,
            "general market: implementation unique (found " + std::to_string(all.matchings.size()) + ")");
  }
  {
    const Instance inst = LoadFixture("example_4.json");
    const RolProfile rols = LoadFixtureRols(inst, "rols_4.json");
    const BundleMatching nu = RunBundleDa(inst, rols, TieBreakOrder::Canonical(5)).matching;
    c.Check(CheckBundleStability(inst, rols, nu).stable(), "two-seat example: nu stable");
    const BundleMatching nu2 = NamedBundleMatching(
        inst, {{"i1", "s1"}, {"i2", "b12"}, {"i3", "s1"}, {"i4", "s4"}, {"i5", "s3"}});
    const StabilityVerdict v = CheckBundleStability(inst, rols, nu2);
    std::string why = v.stable() ? "" : " (" + std::to_string(v.violations.size()) + " violation(s))";
    c.Check(v.stable(), "two-seat example: nu' stable" + why);
    c.Check(FindStableParetoImprovement(inst, rols, nu).has_value(),
            "two-seat example: stable Pareto improvement found");
  }
  {
    const Instance inst = LoadFixture("example_c1.json");
    const auto order = Order(inst, {"i3", "i1", "i2"});
    c.Check(RunBundleDa(inst, LoadFixtureRols(inst, "rols_c1.json"), order).matching ==
                NamedBundleMatching(inst, {{"i1", "s1"}, {"i3", "b12"}}),
            "targeted bundle: baseline");
    c.Check(RunBundleDa(inst, LoadFixtureRols(inst, "rols_c1_deviation.json"), order).matching ==
                NamedBundleMatching(inst, {{"i2", "s2"}, {"i3", "b12"}}),
            "targeted bundle: deviation leaves i1 unmatched");
  }
  {
    const Exp2Outcome out = Exp2RunGroup(
        Exp2Treatment::kNoBundle, {95, 90, 85, 80, 75, 70},
        {{"D", "A"}, {"D", "A"}, {"A", "E"}, {"D", "E"}, {"A", "F"}, {"E", "F"}}, 1);
    c.Check(out.payoffs == std::vector<double>{80, 50, 30, 0, 20, 0},
            "six-school admission: payoffs 80,50,30,0,20,0");
  }
}

void TableOne(Criterion& c) {
  c.Budget(1.0);
  const double payoff[] = {64.17, 70.00, 64.17, 71.67};
  const double match[] = {58.33, 66.67, 58.33, 66.67};
  const double mismatch[] = {25, 0, 25, 0};
  for (std::size_t t = 0; t < 4; ++t) {
    const Exp1Treatment treatment = kExp1Treatments[t];
    const Exp1Metrics m = Exp1ExactExpectation(treatment, Exp1EquilibriumProfile(treatment));
    const std::string name = Exp1TreatmentName(treatment);
    c.Check(std::abs(Round2(m.payoff) - payoff[t]) <= 0.005,
            name + Fmt(": payoff %.4f (expected %.2f)", m.payoff, payoff[t]));
    c.Check(std::abs(Round2(100 * m.match_rate) - match[t]) <= 0.005,
            name + Fmt(": match %.4f%% (expected %.2f%%)", 100 * m.match_rate, match[t]));
    c.Check(std::abs(Round2(100 * m.mismatch_rate) - mismatch[t]) <= 0.005,
            name + Fmt(": mismatch %.4f%% (expected %.0f%%)", 100 * m.mismatch_rate, mismatch[t]));
  }
  const Exp1Treatment two = Exp1Treatment::kNoBundleTwo;
  const StrategyProfile p = Exp1EquilibriumProfile(two);
  const std::vector<std::pair<std::vector<std::string>, double>> deviations = {
      {{"B", "A"}, 68.33}, {{"A", "C"}, 65.00}, {{"B", "C"}, 60.00}, {{"C", "A"}, 20.00}, {{"C", "B"}, 20.00}};
  for (const auto& [rol, want] : deviations) {
    const double v = Exp1DeviationValue(two, p, kTypeA, rol);
    c.Check(Round2(v) == want, "two-slot type A deviation " + rol[0] + "," + rol[1] +
                                   Fmt(": %.4f (expected %.2f)", v, want));
  }
}

void BestResponses(Criterion& c) {
  for (Exp1Treatment t : kExp1Treatments) {
    const EquilibriumReport r = Exp1VerifyEquilibrium(t);
    std::string detail;
    for (int type : {kTypeA, kTypeB}) {
      const auto& best = r.table[type].front();
      std::string rol;
      for (const std::string& e : best.rol) rol += (rol.empty() ? "" : ",") + e;
      detail += Fmt(type == kTypeA ? " A: eq %.2f best %.2f" : " B: eq %.2f best %.2f",
                    r.equilibrium_value[type], best.value) +
                " (" + rol + ")";
    }
    c.Check(r.confirmed(), std::string(Exp1TreatmentName(t)) + " best response;" + detail);
  }
  const Exp1Treatment strict = Exp1Treatment::kStrictBundle;
  const StrategyProfile p = Exp1EquilibriumProfile(strict);
  const double ac = Exp1DeviationValue(strict, p, kTypeA, {"AC"});
  const double eq = Exp1ExactExpectation(strict, p).payoff;
  c.Check(ac < eq, Fmt("Strict-Bundle AC deviation %.2f below equilibrium %.2f", ac, eq));
  c.Check(ac >= 35 && ac <= 45, Fmt("Strict-Bundle AC deviation %.2f within [35, 45]", ac));
}

void Properties(Criterion& c) {
  c.Budget(60.0);
  const PropertySweep s = RunPropertySweep(1000, 1000);
  c.Check(s.markets >= 500, std::to_string(s.markets) + " markets (" + std::to_string(s.simple_markets) +
                                " simple)");
  c.Check(s.unstable_simple == 0 && s.unstable_general == 0,
          "engine outputs stable (unstable: simple " + std::to_string(s.unstable_simple) + ", general " +
              std::to_string(s.unstable_general) + ")");
  c.Check(s.dominated_outputs == 0,
          "outputs Pareto-undominated size-maximal (" + std::to_string(s.dominated_outputs) + " dominated)");
  c.Check(s.truth_telling_violations == 0,
          "truth-telling on simple systems (" + std::to_string(s.deviations_checked) + " deviations, " +
              std::to_string(s.truth_telling_violations) + " violations)");
  c.Check(s.monotonicity_violations == 0,
          "sup-bundle monotonicity (" + std::to_string(s.monotonicity_violations) + " violations)");
  c.Check(s.unstable_implementations == 0,
          "implementations of stable matchings stable (" + std::to_string(s.implementations_checked) +
              " checked)");
  c.Check(s.invariant_failures == 0,
          "admission sets nonempty and disjoint (" + std::to_string(s.invariant_failures) + " failures)");
  for (const std::string& f : s.failures) c.Check(false, f);
}

void MonteCarlo(Criterion& c) {
  const std::int64_t rounds = 1000000;
  for (Exp1Treatment t : kExp1Treatments) {
    const StrategyProfile p = Exp1EquilibriumProfile(t);
    const SimulationResult sim = SimulateExp1(t, p, rounds, 20261016);
    const MetricTable exact = Exp1MetricTable(Exp1ExactExpectation(t, p));
    for (std::size_t k = 0; k < exact.size(); ++k) {
      const Estimate& mc = sim.metrics[k].second;
      const double gap = std::abs(mc.mean - exact[k].second.mean);
      const bool ok = gap <= 3 * mc.std_error + 1e-12;
      c.Check(ok, std::string(Exp1TreatmentName(t)) + " " + exact[k].first +
                      Fmt(": |%.5f - %.5f| = %.2f se", mc.mean, exact[k].second.mean,
                          mc.std_error > 0 ? gap / mc.std_error : 0));
    }
  }

  const std::vector<double> dist = ReferenceScoreDistribution();
  double mean = 0, var = 0;
  for (int k = 0; k < 100; ++k) mean += (k + 1) * dist[k];
  for (int k = 0; k < 100; ++k) var += (k + 1 - mean) * (k + 1 - mean) * dist[k];
  Rng rng(7);
  double s = 0, ss = 0;
  const int n = 1000000;
  for (int k = 0; k < n; ++k) {
    const double x = SampleScores(1, rng).front();
    s += x;
    ss += x * x;
  }
  const double m = s / n;
  const double sd = std::sqrt(ss / n - m * m);
  c.Check(std::abs(m - 70) <= 0.1, Fmt("score mean %.4f within 70 +/- 0.1 (oracle %.4f)", m, mean));
  c.Check(std::abs(sd - 10) <= 0.2,
          Fmt("score std %.4f within 10 +/- 0.2 (oracle %.4f)", sd, std::sqrt(var)));
}

void Counterfactual(Criterion& c) {
  const Exp1Treatment t = Exp1Treatment::kStrictBundle;
  const double base = Exp1ExactExpectation(t, Exp1EquilibriumProfile(t)).match_rate;
  const double mixed = Exp1ExactExpectation(t, Exp1MixedProfile(t, {"AC"}, 0.245)).match_rate;
  c.Check(mixed > base, Fmt("24.5%% AC reports: match rate %.2f%% vs %.2f%% at equilibrium",
                            100 * mixed, 100 * base));
}

void Determinism(Criterion& c) {
  auto f = [](const char* name) { return FixturePath(name); };
  const std::vector<std::vector<std::string>> commands = {
      {"validate", f("example_4_1.json"), "--rols", f("rols_4_1.json")},
      {"run-da", f("exp2_nobundle.json"), f("rols_exp2_nobundle.json")},
      {"run-bundle-da", f("appendix_d.json"), f("rols_d.json"), "--tiebreak", "i8,i7,i6,i5,i4,i3,i2,i1",
       "--implement", "random", "--seed", "42"},
      {"implement", f("remark_3_1.json"), f("matching_remark_3_1_both.json"), "--enumerate"},
      {"check-stability", f("remark_3_1.json"), f("rols_remark_3_1.json"),
       f("matching_remark_3_1_both.json")},
      {"oracle", "pusm", f("example_4.json"), f("rols_4.json")},
      {"improve", f("example_4.json"), f("rols_4.json")},
      {"audit-rol", f("example_4_1.json"), f("rols_4_1.json")},
      {"simulate-experiment", "--exp", "1", "--rounds", "2000", "--seed", "9"},
      {"simulate-experiment", "--exp", "2", "--rounds", "500", "--seed", "9", "--per-round"},
      {"trace", f("example_4_1.json"), f("rols_4_1.json"), "--format", "json"},
  };
  for (const auto& args : commands) {
    std::string out[2];
    int code[2];
    for (int k = 0; k < 2; ++k) {
      std::ostringstream o, e;
      code[k] = RunCli(args, o, e);
      out[k] = o.str();
    }
    const std::string name = args[0] == "oracle" ? "oracle pusm" : args[0];
    c.Check(code[0] == code[1] && out[0] == out[1] && !out[0].empty(),
            name + ": " + std::to_string(out[0].size()) + " bytes, exit " + std::to_string(code[0]));
  }
}

}  // namespace

int main() {
  struct Entry {
    const char* title;
    std::function<void(Criterion&)> run;
  };
  const Entry entries[] = {
      {"worked examples reproduce exactly", Goldens},
      {"three-school table and deviation values", TableOne},
      {"equilibrium strategies are best responses", BestResponses},
      {"property suite on random markets", Properties},
      {"Monte Carlo agrees with exact expectations", MonteCarlo},
      {"counterfactual mixed profile direction", Counterfactual},
      {"CLI output is deterministic", Determinism},
  };
  int failed = 0;
  for (int k = 0; k < 7; ++k) {
    Criterion c;
    const auto start = std::chrono::steady_clock::now();
    bool ok;
    try {
      entries[k].run(c);
    } catch (const std::exception& e) {
      c.Check(false, std::string("exception: ") + e.what());
    }
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    ok = c.Report(k + 1, entries[k].title, elapsed);
    failed += !ok;
  }
  std::printf("%d of 7 criteria passed\n", 7 - failed);
  return failed == 0 ? 0 : 1;
}
