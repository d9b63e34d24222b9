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

#ifndef BUNDLECHOICE_MODEL_H_
#define BUNDLECHOICE_MODEL_H_

#include <compare>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace bundlechoice {

// Dense, file-ordered index into one of the instance tables. Ordering of ids
// is the canonical ordering used everywhere iteration order matters.
template <typename Tag>
class Id {
 public:
  constexpr Id() = default;
  constexpr explicit Id(int value) : value_(value) {}

  constexpr int value() const { return value_; }
  constexpr std::size_t index() const { return static_cast<std::size_t>(value_); }
  constexpr bool valid() const { return value_ >= 0; }

  friend constexpr auto operator<=>(const Id&, const Id&) = default;

 private:
  int value_ = -1;
};

using StudentId = Id<struct StudentTag>;
using SchoolId = Id<struct SchoolTag>;
using BundleId = Id<struct BundleTag>;

// ---------------------------------------------------------------------------
// Raw (unvalidated) input, as read from an instance document.

struct RawSchool {
  std::string id;
  int quota = 0;
  std::vector<std::string> priority;  // Highest priority first.

  friend bool operator==(const RawSchool&, const RawSchool&) = default;
};

struct RawBundle {
  std::string id;
  std::vector<std::string> schools;
  // std::nullopt means "all students".
  std::optional<std::vector<std::string>> targets;

  friend bool operator==(const RawBundle&, const RawBundle&) = default;
};

struct RawInstance {
  std::vector<std::string> students;
  std::vector<RawSchool> schools;
  std::vector<RawBundle> bundles;
  int rol_length = 0;

  friend bool operator==(const RawInstance&, const RawInstance&) = default;
};

// Student id -> ordered bundle ids (school ids name trivial bundles).
struct RawRol {
  std::string student;
  std::vector<std::string> entries;
};
using RawRols = std::vector<RawRol>;

// ---------------------------------------------------------------------------
// Validation reports.

enum class IssueKind {
  kSyntax,
  kSchema,
  kDuplicateId,
  kUnknownReference,
  kBadQuota,
  kBadPriority,
  kEmptyBundle,
  kTrivialBundleTargets,
  kDuplicateSchoolSet,
  kHierarchy,
  kMonotonicity,
  kPriorityUniformity,
  kRolLength,
  kRolTooLong,
  kRolDuplicateEntry,
  kRolUnavailableBundle,
  kRolDuplicateStudent,
};

const char* IssueKindName(IssueKind kind);

struct ValidationIssue {
  IssueKind kind;
  std::string message;
  // Location of the offending value inside the source document, as a JSON
  // pointer or "line:column" when known.
  std::string location;
  std::vector<std::string> bundles;
  std::vector<std::string> students;
  std::vector<std::string> schools;
};

struct ValidationReport {
  std::vector<ValidationIssue> issues;

  bool ok() const { return issues.empty(); }
  bool Has(IssueKind kind) const;
  std::string ToString() const;
};

// Thrown by entry points that require an already validated argument.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(ValidationReport report);
  const ValidationReport& report() const { return report_; }

 private:
  ValidationReport report_;
};

// ---------------------------------------------------------------------------
// Validated domain types.

struct School {
  SchoolId id;
  std::string name;
  int quota = 0;
  std::vector<StudentId> priority;  // Highest priority first.
};

struct Bundle {
  BundleId id;
  std::string name;
  std::vector<SchoolId> schools;    // Sorted by id.
  std::vector<StudentId> targets;   // Sorted by id.
  int quota = 0;                    // Sum of member school quotas.

  bool trivial() const { return schools.size() == 1; }
};

// A sub-hierarchy: one maximal bundle together with everything nested in it.
struct SubHierarchy {
  BundleId root;
  std::vector<BundleId> bundles;    // Canonical order, root included.
  std::vector<SchoolId> schools;
  // The order shared by every school of the sub-hierarchy. Empty when the
  // system is not simple.
  std::vector<StudentId> order;
};

struct Simplicity {
  bool simple = false;
  std::vector<SubHierarchy> hierarchies;  // Ordered by root id.
};

class Instance;

// Per-student rank-order list over bundles.
struct Rol {
  StudentId student;
  std::vector<BundleId> entries;

  // Position of `bundle` in the list, or -1.
  int RankOf(BundleId bundle) const;
  bool Contains(BundleId bundle) const { return RankOf(bundle) >= 0; }
};

// Indexed by student id; rols[i].student == StudentId(i).
using RolProfile = std::vector<Rol>;

// Immutable validated market: students, schools, bundle system and the ROL
// length cap. Trivial bundles occupy ids [0, num_schools()) in school order;
// nontrivial bundles follow in file order.
class Instance {
 public:
  int num_students() const { return static_cast<int>(student_names_.size()); }
  int num_schools() const { return static_cast<int>(schools_.size()); }
  int num_bundles() const { return static_cast<int>(bundles_.size()); }
  int rol_length() const { return rol_length_; }

  const std::string& student_name(StudentId i) const { return student_names_[i.index()]; }
  const School& school(SchoolId s) const { return schools_[s.index()]; }
  const Bundle& bundle(BundleId b) const { return bundles_[b.index()]; }
  const std::vector<School>& schools() const { return schools_; }
  const std::vector<Bundle>& bundles() const { return bundles_; }
  const std::vector<std::string>& student_names() const { return student_names_; }

  std::vector<StudentId> students() const;

  std::optional<StudentId> FindStudent(const std::string& name) const;
  std::optional<SchoolId> FindSchool(const std::string& name) const;
  // Bundle ids and school ids (naming trivial bundles) are both accepted.
  std::optional<BundleId> FindBundle(const std::string& name) const;

  BundleId TrivialBundle(SchoolId s) const { return BundleId(s.value()); }

  // Position of `student` in the priority order of `school` (0 = highest).
  int Rank(SchoolId school, StudentId student) const {
    return rank_[school.index()][student.index()];
  }
  bool HigherPriority(SchoolId school, StudentId a, StudentId b) const {
    return Rank(school, a) < Rank(school, b);
  }
  // True when every school of `bundle` ranks `a` above `b`.
  bool HigherPriorityOnAll(BundleId bundle, StudentId a, StudentId b) const;

  bool Contains(BundleId bundle, SchoolId school) const {
    return member_[bundle.index()][school.index()];
  }
  bool Available(StudentId student, BundleId bundle) const {
    return target_[bundle.index()][student.index()];
  }
  // S_inner strictly contained in S_outer.
  bool IsStrictSubBundle(BundleId inner, BundleId outer) const {
    return strict_sub_[inner.index()][outer.index()];
  }
  // S_inner contained in (or equal to) S_outer.
  bool IsSubBundleOrSelf(BundleId inner, BundleId outer) const {
    return inner == outer || IsStrictSubBundle(inner, outer);
  }
  bool Overlaps(BundleId a, BundleId b) const {
    return IsSubBundleOrSelf(a, b) || IsSubBundleOrSelf(b, a);
  }

  // Minimal proper sup-bundle, if any.
  std::optional<BundleId> Parent(BundleId b) const;
  // Proper sup-bundles, innermost first.
  const std::vector<BundleId>& Ancestors(BundleId b) const { return ancestors_[b.index()]; }
  // Proper sub-bundles in canonical order.
  const std::vector<BundleId>& Descendants(BundleId b) const { return descendants_[b.index()]; }
  // Index of the sub-hierarchy containing `b` in simplicity().hierarchies.
  int HierarchyOf(BundleId b) const { return hierarchy_of_[b.index()]; }
  // Bundles available to `student` (the menu).
  std::vector<BundleId> Menu(StudentId student) const;

  const Simplicity& simplicity() const { return simplicity_; }
  bool simple() const { return simplicity_.simple; }

  // The raw description this instance was validated from, with trivial
  // bundles left implicit. Serializing it round-trips.
  const RawInstance& raw() const { return raw_; }

 private:
  friend std::variant<Instance, ValidationReport> ValidateInstance(const RawInstance& raw);
  Instance() = default;

  RawInstance raw_;
  std::vector<std::string> student_names_;
  std::vector<School> schools_;
  std::vector<Bundle> bundles_;
  int rol_length_ = 0;

  std::vector<std::vector<int>> rank_;
  std::vector<std::vector<bool>> member_;
  std::vector<std::vector<bool>> target_;
  std::vector<std::vector<bool>> strict_sub_;
  std::vector<std::vector<BundleId>> ancestors_;
  std::vector<std::vector<BundleId>> descendants_;
  std::vector<int> hierarchy_of_;
  Simplicity simplicity_;
};

// Checks every structural condition and returns the validated instance or a
// report listing every violation found. Never mutates `raw`.
std::variant<Instance, ValidationReport> ValidateInstance(const RawInstance& raw);

// Throwing convenience wrapper around ValidateInstance.
Instance BuildInstance(const RawInstance& raw);

// Simplicity flag plus the sub-hierarchy partition.
Simplicity DetectSimplicity(const Instance& instance);

std::variant<RolProfile, ValidationReport> ValidateRols(const Instance& instance,
                                                        const RawRols& raw);
RolProfile BuildRols(const Instance& instance, const RawRols& raw);

// Issues with a single already-resolved ROL (length, duplicates, menu).
std::vector<ValidationIssue> CheckRol(const Instance& instance, const Rol& rol);
// Throws ValidationError unless every ROL is valid and the profile covers
// every student exactly once in id order.
void RequireValidRols(const Instance& instance, const RolProfile& rols);

// Empty ROLs for every student.
RolProfile EmptyRols(const Instance& instance);

// ---------------------------------------------------------------------------
// Matchings.

struct BundleMatching {
  std::vector<std::optional<BundleId>> assignment;  // Indexed by student.

  BundleMatching() = default;
  explicit BundleMatching(int num_students) : assignment(num_students) {}

  const std::optional<BundleId>& operator[](StudentId i) const { return assignment[i.index()]; }
  std::optional<BundleId>& operator[](StudentId i) { return assignment[i.index()]; }
  int num_matched() const;

  friend bool operator==(const BundleMatching&, const BundleMatching&) = default;
};

// Q per bundle: students assigned to the bundle or any of its sub-bundles.
std::vector<int> Occupancy(const Instance& instance, const BundleMatching& nu);

// Problems that make `nu` not a bundle-matching (unavailable bundle, Q > q).
std::vector<std::string> CheckBundleMatching(const Instance& instance, const BundleMatching& nu);

struct StandardMatching {
  std::vector<std::optional<SchoolId>> assignment;  // Indexed by student.

  StandardMatching() = default;
  explicit StandardMatching(int num_students) : assignment(num_students) {}

  const std::optional<SchoolId>& operator[](StudentId i) const { return assignment[i.index()]; }
  std::optional<SchoolId>& operator[](StudentId i) { return assignment[i.index()]; }

  friend bool operator==(const StandardMatching&, const StandardMatching&) = default;
  friend auto operator<=>(const StandardMatching& a, const StandardMatching& b) {
    return a.assignment <=> b.assignment;
  }
};

std::vector<std::string> CheckStandardMatching(const Instance& instance, const StandardMatching& mu);

// mu(i) lies in S_nu(i) for matched students and unmatched students stay
// unmatched.
bool Implements(const Instance& instance, const BundleMatching& nu, const StandardMatching& mu);

// ---------------------------------------------------------------------------
// Induced weak preference over schools.

class InducedPreference {
 public:
  InducedPreference() = default;
  InducedPreference(std::vector<std::vector<SchoolId>> classes, int num_schools);

  // Indifference classes, best first.
  const std::vector<std::vector<SchoolId>>& classes() const { return classes_; }
  // Class index of `s` or -1 when unacceptable.
  int ClassOf(SchoolId s) const { return class_of_[s.index()]; }
  bool Acceptable(SchoolId s) const { return ClassOf(s) >= 0; }
  // Strict preference; unmatched (nullopt) is below every acceptable school
  // and tied with unacceptable ones.
  bool StrictlyPrefers(std::optional<SchoolId> a, std::optional<SchoolId> b) const;

 private:
  int Level(std::optional<SchoolId> s) const;

  std::vector<std::vector<SchoolId>> classes_;
  std::vector<int> class_of_;
};

InducedPreference InducePreference(const Instance& instance, const Rol& rol);

}  // namespace bundlechoice

#endif  // BUNDLECHOICE_MODEL_H_
