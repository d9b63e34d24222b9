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

#ifndef BUNDLECHOICE_EXPERIMENT_H_
#define BUNDLECHOICE_EXPERIMENT_H_

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "bundlechoice/model.h"
#include "bundlechoice/rng.h"

namespace bundlechoice {

// ---------------------------------------------------------------------------
// Strategy profiles. A rule maps a range of private keys (payoff type for the
// three-school game, exam score for the six-school game) to a lottery over
// ROLs written with bundle names. The first matching rule applies.

struct RolChoice {
  double probability = 1.0;
  std::vector<std::string> rol;
};

struct StrategyRule {
  int lo = 0;
  int hi = 0;  // Inclusive.
  std::vector<RolChoice> choices;
};

struct StrategyProfile {
  std::vector<StrategyRule> rules;

  // Throws std::invalid_argument when no rule covers `key`.
  const std::vector<RolChoice>& ChoicesFor(int key) const;
  // Draws one ROL with a single uniform draw.
  const std::vector<std::string>& Draw(int key, Rng& rng) const;
};

// Throws std::invalid_argument if some choice names an unknown bundle, is too
// long, or a rule's probabilities do not sum to one.
void RequireValidProfile(const Instance& instance, const StrategyProfile& profile);

// ---------------------------------------------------------------------------
// Estimates.

struct Estimate {
  double mean = 0.0;
  double std_error = 0.0;
};

// Named metrics in a fixed order.
using MetricTable = std::vector<std::pair<std::string, Estimate>>;

// Online sample moments; also tracks a ratio of two per-sample quantities.
class Accumulator {
 public:
  void Add(double x);
  std::int64_t count() const { return n_; }
  Estimate Get() const;

 private:
  std::int64_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

class RatioAccumulator {
 public:
  void Add(double numerator, double denominator);
  // Ratio of sums with a delta-method standard error.
  Estimate Get() const;

 private:
  std::int64_t n_ = 0;
  double sx_ = 0, sy_ = 0, sxx_ = 0, syy_ = 0, sxy_ = 0;
};

// ---------------------------------------------------------------------------
// Three students, three one-seat schools A, B, C.

enum class Exp1Treatment { kNoBundleOne, kIndiffBundle, kStrictBundle, kNoBundleTwo };

inline constexpr std::array<Exp1Treatment, 4> kExp1Treatments = {
    Exp1Treatment::kNoBundleOne, Exp1Treatment::kIndiffBundle, Exp1Treatment::kStrictBundle,
    Exp1Treatment::kNoBundleTwo};

const char* Exp1TreatmentName(Exp1Treatment t);
std::optional<Exp1Treatment> ParseExp1Treatment(const std::string& name);

inline constexpr int kTypeA = 0;
inline constexpr int kTypeB = 1;

// Utility of `type` for school index 0..2 (A, B, C) or unmatched (-1).
double Exp1Utility(int type, int school);

// Market for one priority order (student indices, highest first). All schools
// share the order.
Instance Exp1Instance(Exp1Treatment treatment, const std::array<int, 3>& priority);

StrategyProfile Exp1EquilibriumProfile(Exp1Treatment treatment);

// Every student independently reports `deviant` with probability `share`,
// otherwise follows the equilibrium profile.
StrategyProfile Exp1MixedProfile(Exp1Treatment treatment, const std::vector<std::string>& deviant,
                                 double share);

struct Exp1Metrics {
  double payoff = 0.0;             // Per student.
  double match_rate = 0.0;
  double mismatch_rate = 0.0;      // Top-two priority students outside A and B.
  double payoff_if_matched = 0.0;
};

// Exact expectation over type draws, priority orders, profile lotteries and
// uniform within-bundle seat assignment.
Exp1Metrics Exp1ExactExpectation(Exp1Treatment treatment, const StrategyProfile& profile);

// Exact expected payoff of one student of `type` reporting `rol` while the
// others follow `profile`.
double Exp1DeviationValue(Exp1Treatment treatment, const StrategyProfile& profile, int type,
                          const std::vector<std::string>& rol);

struct BestResponseRow {
  std::vector<std::string> rol;
  double value = 0.0;
};

struct EquilibriumReport {
  Exp1Treatment treatment;
  // Per type: every feasible ROL with its value, best first.
  std::array<std::vector<BestResponseRow>, 2> table;
  std::array<std::vector<std::string>, 2> equilibrium;
  std::array<double, 2> equilibrium_value{};
  std::array<bool, 2> best_response{};

  bool confirmed() const { return best_response[0] && best_response[1]; }
};

EquilibriumReport Exp1VerifyEquilibrium(Exp1Treatment treatment);

// Every ordered list of distinct menu bundles of length 1..rol_length.
std::vector<std::vector<std::string>> FeasibleRols(const Instance& instance);

// ---------------------------------------------------------------------------
// Six students, six one-seat schools A..F with common utilities.

enum class Exp2Treatment { kNoBundle, kIndiffBundle, kStrictBundle };

inline constexpr std::array<Exp2Treatment, 3> kExp2Treatments = {
    Exp2Treatment::kNoBundle, Exp2Treatment::kIndiffBundle, Exp2Treatment::kStrictBundle};

const char* Exp2TreatmentName(Exp2Treatment t);
std::optional<Exp2Treatment> ParseExp2Treatment(const std::string& name);

// Utility of a school name, 0 for unmatched.
double Exp2Utility(const std::optional<std::string>& school);

// Scores in student order; priority is descending score.
Instance Exp2Instance(Exp2Treatment treatment, const std::vector<int>& scores);

// Each student lists the best ROL available under the common utilities:
// D then the best remaining option (A, or the ABC bundle when offered).
StrategyProfile Exp2TruthfulProfile(Exp2Treatment treatment);

// Pairwise-distinct integer scores: each draw is round(N(70, 10)) redrawn
// until inside [1, 100]; the whole group is redrawn on any collision.
std::vector<int> SampleScores(int n, Rng& rng);
std::vector<int> SampleScores(int n, std::uint64_t seed);

// Distribution of one rounded, truncated draw: probability of 1..100.
std::vector<double> ScoreDistribution();

struct Exp2Metrics {
  double payoff = 0.0;            // Per student.
  double match_rate = 0.0;
  double payoff_if_matched = 0.0;
  double envy_share = 0.0;        // Score-ordered pairs with the lower score better off.
  double payoff_loss = 0.0;       // 1 - realized / potential.
  double realized = 0.0;          // Group payoff.
  double potential = 0.0;         // Group payoff with unmatched filling vacancies.
};

struct Exp2Outcome {
  BundleMatching bundle_matching;
  StandardMatching matching;
  std::vector<double> payoffs;
  std::vector<std::pair<int, int>> envy_pairs;  // Student indices, higher score first.
  Exp2Metrics metrics;
};

Exp2Metrics Exp2GroupMetrics(const Instance& instance, const StandardMatching& mu,
                             const std::vector<int>& scores,
                             std::vector<std::pair<int, int>>* envy_pairs = nullptr);

// One group with fixed scores and ROLs; within-bundle seats drawn with `seed`.
Exp2Outcome Exp2RunGroup(Exp2Treatment treatment, const std::vector<int>& scores,
                         const std::vector<std::vector<std::string>>& rols, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Monte Carlo.

struct RoundRecord {
  std::int64_t round = 0;
  std::vector<std::pair<std::string, double>> values;
};

struct SimulationResult {
  std::int64_t rounds = 0;
  MetricTable metrics;                // Empty when rounds == 0.
  std::vector<RoundRecord> per_round; // Filled only on request.
};

// One group per round; round r uses DeriveSeed(seed, r).
SimulationResult SimulateExp1(Exp1Treatment treatment, const StrategyProfile& profile,
                              std::int64_t rounds, std::uint64_t seed, bool keep_rounds = false);
SimulationResult SimulateExp2(Exp2Treatment treatment, const StrategyProfile& profile,
                              std::int64_t rounds, std::uint64_t seed, bool keep_rounds = false);

// Exact metrics rendered as a metric table with zero standard errors.
MetricTable Exp1MetricTable(const Exp1Metrics& m);

}  // namespace bundlechoice

#endif  // BUNDLECHOICE_EXPERIMENT_H_
