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

#ifndef BUNDLECHOICE_ENGINES_H_
#define BUNDLECHOICE_ENGINES_H_

#include <stdexcept>
#include <string>
#include <vector>

#include "bundlechoice/model.h"

namespace bundlechoice {

// Raised when an engine is called on input it does not support, e.g. a
// non-simple system passed to the simple engine.
class EngineError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Raised when an internal algorithm invariant fails. Indicates a bug.
class InvariantError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Strict order over all students used to settle overdemanded bundles.
class TieBreakOrder {
 public:
  // Throws std::invalid_argument unless `order` is a permutation of
  // 0..num_students-1.
  TieBreakOrder(std::vector<StudentId> order, int num_students);

  static TieBreakOrder Canonical(int num_students);

  const std::vector<StudentId>& order() const { return order_; }
  int Position(StudentId i) const { return position_[i.index()]; }
  bool Precedes(StudentId a, StudentId b) const { return Position(a) < Position(b); }

 private:
  std::vector<StudentId> order_;
  std::vector<int> position_;
};

enum class EventKind {
  kApply,       // student applies to bundle
  kStep,        // general engine: highest-priority set of a step
  kAdmit,       // tentative admission; `remaining` holds quotas afterwards
  kOverdemand,  // general engine: bundle resolved by the tie-break order
  kReject,      // student rejected by bundle
};

const char* EventKindName(EventKind kind);

struct TraceEvent {
  EventKind kind;
  int round = 0;
  int step = 0;
  StudentId student;
  BundleId bundle;
  std::vector<StudentId> students;  // kStep: H set. kOverdemand: admitted.
  std::vector<int> remaining;       // kAdmit, kOverdemand: quota snapshot.
};

struct EngineTrace {
  std::vector<TraceEvent> events;
  int rounds = 0;  // Rounds in which at least one application was made.

  int Count(EventKind kind) const;
};

struct EngineResult {
  BundleMatching matching;
  EngineTrace trace;
};

struct EngineOptions {
  bool record_trace = true;
  // Simple engine only: order in which sub-hierarchies are processed within a
  // round, as indices into simplicity().hierarchies. Empty = canonical.
  std::vector<int> hierarchy_order;
};

// Student-proposing deferred acceptance. Every ROL entry must be a trivial
// bundle; throws EngineError otherwise.
EngineResult RunStandardDa(const Instance& instance, const RolProfile& rols,
                           const EngineOptions& options = {});

// Bundle-DA for simple systems. Throws EngineError on a non-simple system.
EngineResult RunBundleDaSimple(const Instance& instance, const RolProfile& rols,
                               const EngineOptions& options = {});

// Bundle-DA for any valid system. Throws InvariantError if a step's
// highest-priority set is empty or has overlapping targets.
EngineResult RunBundleDaGeneral(const Instance& instance, const RolProfile& rols,
                                const TieBreakOrder& tiebreak,
                                const EngineOptions& options = {});

// Simple engine when the system is simple, general engine otherwise.
EngineResult RunBundleDa(const Instance& instance, const RolProfile& rols,
                         const TieBreakOrder& tiebreak, const EngineOptions& options = {});

// True iff the simple and general engines return the same matching.
bool EnginesAgreeOnSimple(const Instance& instance, const RolProfile& rols,
                          const TieBreakOrder& tiebreak);

// Re-derives the final matching from a trace, checking that applications
// follow the ROLs, admissions go to the applied-for bundle and every quota
// snapshot is within bounds. Throws InvariantError on inconsistency.
BundleMatching ReplayTrace(const Instance& instance, const RolProfile& rols,
                           const EngineTrace& trace);

// One line per event, e.g. "round=1 step=0 admit i3 s1 remaining=...".
std::string FormatTrace(const Instance& instance, const EngineTrace& trace);

}  // namespace bundlechoice

#endif  // BUNDLECHOICE_ENGINES_H_
