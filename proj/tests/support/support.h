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


// Shared helpers for the test suites and the acceptance runner: fixture
// loading, seeded random markets and brute-force reference implementations
// written directly from the definitions (no library algorithms reused).

#ifndef BUNDLECHOICE_TESTS_SUPPORT_SUPPORT_H_
#define BUNDLECHOICE_TESTS_SUPPORT_SUPPORT_H_

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "bundlechoice/engines.h"
#include "bundlechoice/model.h"

namespace bundlechoice::testing {

std::string FixturePath(const std::string& name);
Instance LoadFixture(const std::string& name);
RolProfile LoadFixtureRols(const Instance& instance, const std::string& name);

// Unlisted students are unmatched. Aborts on unknown names.
BundleMatching NamedBundleMatching(const Instance& instance,
                                   const std::map<std::string, std::string>& assignment);
StandardMatching NamedMatching(const Instance& instance,
                               const std::map<std::string, std::string>& assignment);
// "i1=s1 i2=- ..." in student order.
std::string Describe(const Instance& instance, const BundleMatching& nu);
std::string Describe(const Instance& instance, const StandardMatching& mu);

// Random markets: at most 6 students, 5 schools, two nesting levels, l <= 3.
// Simple markets give every school of a tree one shared priority order;
// general markets only agree on each bundle's targets.
struct RandomMarket {
  Instance instance;
  RolProfile rols;
  TieBreakOrder tiebreak;
};
RawInstance RandomRawInstance(std::mt19937_64& gen, bool simple);
RolProfile RandomRols(const Instance& instance, std::mt19937_64& gen);
RandomMarket RandomMarketFor(std::uint64_t seed, bool simple);

// Reference checks straight from the definitions.
bool ReferenceBundleStable(const Instance& instance, const RolProfile& rols,
                           const BundleMatching& nu);
bool ReferenceStandardStable(const Instance& instance, const RolProfile& rols,
                             const StandardMatching& mu);
// Every individually rational bundle-matching within quota.
std::vector<BundleMatching> AllRationalMatchings(const Instance& instance, const RolProfile& rols);
bool ReferenceSizeMaximal(const Instance& instance, const RolProfile& rols,
                          const BundleMatching& nu);
bool ReferencePusm(const Instance& instance, const RolProfile& rols, const BundleMatching& nu);
// Every standard matching implementing `nu`, sorted.
std::vector<StandardMatching> ReferenceImplementations(const Instance& instance,
                                                       const BundleMatching& nu);
// Textbook student-proposing DA; ROL entries must be single schools.
StandardMatching ReferenceDa(const Instance& instance, const RolProfile& rols);

// Seeded sweep over random markets (even offsets simple, odd general)
// checking, per market: engine output stable and Pareto-undominated
// size-maximal by the reference checks, every implementation of every stable
// bundle-matching stable, no gain from reordering a ROL and the sup-bundle
// replacement clauses (simple markets only), and no internal invariant
// failure in the general engine.
struct PropertySweep {
  int markets = 0;
  int simple_markets = 0;
  long long deviations_checked = 0;
  long long implementations_checked = 0;
  int unstable_simple = 0;           // Simple engine.
  int unstable_general = 0;          // General engine.
  // General-engine instabilities in runs that never consulted the tie-break.
  int unstable_without_tiebreak = 0;
  int dominated_outputs = 0;
  int unstable_implementations = 0;
  int truth_telling_violations = 0;
  int monotonicity_violations = 0;
  int invariant_failures = 0;
  std::vector<std::string> failures;  // First few, for diagnostics.
  bool ok() const { return failures.empty(); }
};
PropertySweep RunPropertySweep(std::uint64_t first_seed, int markets);

// Three-student, three-school game evaluated by serial admission in
// priority order with uniform seat draws inside bundles.
struct ReferenceExp1 {
  double payoff = 0, match_rate = 0, mismatch_rate = 0, payoff_if_matched = 0;
};
// treatment: 0 NoBundle-One, 1 Indiff-Bundle (AB), 2 Strict-Bundle (AC),
// 3 NoBundle-Two. lotteries[type] = {(probability, ROL names)}.
using Exp1Lottery = std::vector<std::pair<double, std::vector<std::string>>>;
ReferenceExp1 ReferenceExp1Metrics(int treatment, const std::array<Exp1Lottery, 2>& lotteries);
// Expected payoff of one deviating student of `type`.
double ReferenceExp1Deviation(int treatment, const std::array<Exp1Lottery, 2>& lotteries, int type,
                              const std::vector<std::string>& rol);

// Probability of each score 1..100 under round(N(70, 10)) conditioned on
// [1, 100], from the normal CDF.
std::vector<double> ReferenceScoreDistribution();

}  // namespace bundlechoice::testing

#endif  // BUNDLECHOICE_TESTS_SUPPORT_SUPPORT_H_
