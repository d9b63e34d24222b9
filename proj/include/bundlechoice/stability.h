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

#ifndef BUNDLECHOICE_STABILITY_H_
#define BUNDLECHOICE_STABILITY_H_

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "bundlechoice/engines.h"
#include "bundlechoice/model.h"

namespace bundlechoice {

enum class ViolationKind {
  kIndividualRationality,
  kWaste,
  kEnvyCase1,  // j holds b itself.
  kEnvyCase2,  // j holds a sub-bundle of b.
  kEnvyCase3,  // j holds a sup-bundle of b that could still seat j inside b.
  kEnvy,       // Standard matchings: single envy notion.
};

const char* ViolationKindName(ViolationKind kind);

struct Violation {
  ViolationKind kind;
  StudentId student;
  std::optional<StudentId> other;   // Envied student.
  std::optional<BundleId> bundle;   // Bundle-matching checks.
  std::optional<SchoolId> school;   // Standard-matching checks.
};

struct StabilityVerdict {
  std::vector<Violation> violations;
  bool stable() const { return violations.empty(); }
};

struct EnvyPair {
  StudentId student;
  StudentId other;
  ViolationKind kind;

  friend bool operator==(const EnvyPair&, const EnvyPair&) = default;
};

// Distinct (student, envied) pairs with the first witnessing case.
std::vector<EnvyPair> EnvyPairs(const StabilityVerdict& verdict);

// Reported bundles rank by ROL position; unmatched and unreported
// assignments rank below every reported bundle.
StabilityVerdict CheckBundleStability(const Instance& instance, const RolProfile& rols,
                                      const BundleMatching& nu);

// Stability under the weak preferences induced by the ROLs.
StabilityVerdict CheckStandardStability(const Instance& instance, const RolProfile& rols,
                                        const StandardMatching& mu);

// Thrown when an exhaustive search would exceed its configured bound.
class OracleRefusal : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::uint64_t kDefaultOracleBound = 10'000'000;

struct OracleResult {
  bool holds = false;
  std::optional<BundleMatching> witness;  // Canonically least counterexample.
  std::string reason;
};

// Product over students of (ROL length + 1).
std::uint64_t SearchSpace(const RolProfile& rols);

OracleResult OracleSizeMaximal(const Instance& instance, const RolProfile& rols,
                               const BundleMatching& nu,
                               std::uint64_t bound = kDefaultOracleBound);

OracleResult OracleParetoUndominatedSizeMaximal(const Instance& instance, const RolProfile& rols,
                                                const BundleMatching& nu,
                                                std::uint64_t bound = kDefaultOracleBound);

// A stable bundle-matching that makes nobody worse off and somebody better
// off, or nullopt.
std::optional<BundleMatching> FindStableParetoImprovement(
    const Instance& instance, const RolProfile& rols, const BundleMatching& nu,
    std::uint64_t bound = kDefaultOracleBound);

enum class EngineKind { kSimple, kGeneral, kAuto };

struct PropertyResult {
  bool pass = true;
  std::string detail;
  std::optional<Rol> deviation;  // ROL that produced the violation.
};

// No reordering of the student's ROL yields a bundle the original ranks
// higher. Requires a simple system.
PropertyResult PropertyTruthTelling(const Instance& instance, const RolProfile& rols,
                                    StudentId student);

// Replacing `b` by its sup-bundle `b_sup` in the student's ROL.
PropertyResult PropertySupBundleMonotone(const Instance& instance, const RolProfile& rols,
                                         StudentId student, BundleId b, BundleId b_sup,
                                         EngineKind engine = EngineKind::kSimple,
                                         const std::optional<TieBreakOrder>& tiebreak = {});

struct RolWarning {
  int slot = 0;          // 1-based ROL position of the flagged entry.
  BundleId bundle;       // Flagged entry.
  BundleId related;      // Sup-bundle ranked above it, or the full bundle.
  std::string message;
};

// Flags sup-bundles ranked above one of their sub-bundles and, when an
// indifference class is declared, reports of a strict sub-bundle of an
// existing bundle covering exactly that class.
std::vector<RolWarning> AuditRolDominance(const Instance& instance, const Rol& rol,
                                          const std::optional<std::vector<SchoolId>>& indifference = {});

}  // namespace bundlechoice

#endif  // BUNDLECHOICE_STABILITY_H_
