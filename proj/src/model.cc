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

#include "bundlechoice/model.h"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>
#include <utility>

namespace bundlechoice {
namespace {

ValidationIssue MakeIssue(IssueKind kind, std::string message, std::string location) {
  ValidationIssue issue;
  issue.kind = kind;
  issue.message = std::move(message);
  issue.location = std::move(location);
  return issue;
}

std::string Pointer(const std::string& table, std::size_t index) {
  return "/" + table + "/" + std::to_string(index);
}

bool IsSubset(const std::vector<bool>& a, const std::vector<bool>& b) {
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (a[k] && !b[k]) return false;
  }
  return true;
}

}  // namespace

const char* IssueKindName(IssueKind kind) {
  switch (kind) {
    case IssueKind::kSyntax: return "syntax";
    case IssueKind::kSchema: return "schema";
    case IssueKind::kDuplicateId: return "duplicate-id";
    case IssueKind::kUnknownReference: return "unknown-reference";
    case IssueKind::kBadQuota: return "bad-quota";
    case IssueKind::kBadPriority: return "bad-priority";
    case IssueKind::kEmptyBundle: return "empty-bundle";
    case IssueKind::kTrivialBundleTargets: return "trivial-bundle-targets";
    case IssueKind::kDuplicateSchoolSet: return "duplicate-school-set";
    case IssueKind::kHierarchy: return "hierarchy";
    case IssueKind::kMonotonicity: return "monotonicity";
    case IssueKind::kPriorityUniformity: return "priority-uniformity";
    case IssueKind::kRolLength: return "rol-length";
    case IssueKind::kRolTooLong: return "rol-too-long";
    case IssueKind::kRolDuplicateEntry: return "rol-duplicate-entry";
    case IssueKind::kRolUnavailableBundle: return "rol-unavailable-bundle";
    case IssueKind::kRolDuplicateStudent: return "rol-duplicate-student";
  }
  return "unknown";
}

bool ValidationReport::Has(IssueKind kind) const {
  return std::any_of(issues.begin(), issues.end(),
                     [kind](const ValidationIssue& issue) { return issue.kind == kind; });
}

std::string ValidationReport::ToString() const {
  std::ostringstream out;
  for (const ValidationIssue& issue : issues) {
    out << IssueKindName(issue.kind);
    if (!issue.location.empty()) out << " at " << issue.location;
    out << ": " << issue.message << "\n";
  }
  return out.str();
}

ValidationError::ValidationError(ValidationReport report)
    : std::runtime_error("validation failed:\n" + report.ToString()),
      report_(std::move(report)) {}

int Rol::RankOf(BundleId bundle) const {
  auto it = std::find(entries.begin(), entries.end(), bundle);
  return it == entries.end() ? -1 : static_cast<int>(it - entries.begin());
}

std::vector<StudentId> Instance::students() const {
  std::vector<StudentId> out;
  out.reserve(student_names_.size());
  for (int i = 0; i < num_students(); ++i) out.emplace_back(i);
  return out;
}

std::optional<StudentId> Instance::FindStudent(const std::string& name) const {
  for (int i = 0; i < num_students(); ++i) {
    if (student_names_[i] == name) return StudentId(i);
  }
  return std::nullopt;
}

std::optional<SchoolId> Instance::FindSchool(const std::string& name) const {
  for (int s = 0; s < num_schools(); ++s) {
    if (schools_[s].name == name) return SchoolId(s);
  }
  return std::nullopt;
}

std::optional<BundleId> Instance::FindBundle(const std::string& name) const {
  for (const Bundle& b : bundles_) {
    if (b.name == name) return b.id;
  }
  return std::nullopt;
}

bool Instance::HigherPriorityOnAll(BundleId bundle, StudentId a, StudentId b) const {
  for (SchoolId s : bundles_[bundle.index()].schools) {
    if (!HigherPriority(s, a, b)) return false;
  }
  return true;
}

std::optional<BundleId> Instance::Parent(BundleId b) const {
  const auto& up = ancestors_[b.index()];
  if (up.empty()) return std::nullopt;
  return up.front();
}

std::vector<BundleId> Instance::Menu(StudentId student) const {
  std::vector<BundleId> out;
  for (const Bundle& b : bundles_) {
    if (Available(student, b.id)) out.push_back(b.id);
  }
  return out;
}

std::variant<Instance, ValidationReport> ValidateInstance(const RawInstance& raw) {
  ValidationReport report;
  auto add = [&report](ValidationIssue issue) { report.issues.push_back(std::move(issue)); };

  // Students.
  std::map<std::string, int> student_index;
  for (std::size_t i = 0; i < raw.students.size(); ++i) {
    const std::string& name = raw.students[i];
    if (name.empty()) {
      add(MakeIssue(IssueKind::kSchema, "empty student id", Pointer("students", i)));
    } else if (!student_index.emplace(name, static_cast<int>(i)).second) {
      auto issue = MakeIssue(IssueKind::kDuplicateId, "duplicate student id '" + name + "'",
                             Pointer("students", i));
      issue.students = {name};
      add(std::move(issue));
    }
  }
  if (raw.rol_length < 1) {
    add(MakeIssue(IssueKind::kRolLength,
                  "rol_length must be at least 1, got " + std::to_string(raw.rol_length),
                  "/rol_length"));
  }

  // Schools.
  const int num_students = static_cast<int>(raw.students.size());
  std::map<std::string, int> school_index;
  for (std::size_t s = 0; s < raw.schools.size(); ++s) {
    const RawSchool& school = raw.schools[s];
    const std::string where = Pointer("schools", s);
    if (school.id.empty()) {
      add(MakeIssue(IssueKind::kSchema, "empty school id", where + "/id"));
    } else if (!school_index.emplace(school.id, static_cast<int>(s)).second) {
      auto issue = MakeIssue(IssueKind::kDuplicateId, "duplicate school id '" + school.id + "'",
                             where + "/id");
      issue.schools = {school.id};
      add(std::move(issue));
    } else if (student_index.count(school.id)) {
      auto issue = MakeIssue(IssueKind::kDuplicateId,
                             "school id '" + school.id + "' is also a student id", where + "/id");
      issue.schools = {school.id};
      add(std::move(issue));
    }
    if (school.quota < 1) {
      auto issue = MakeIssue(IssueKind::kBadQuota,
                             "school '" + school.id + "' has quota " + std::to_string(school.quota),
                             where + "/quota");
      issue.schools = {school.id};
      add(std::move(issue));
    }
    std::vector<int> seen(num_students, 0);
    bool bad = false;
    for (std::size_t k = 0; k < school.priority.size(); ++k) {
      auto it = student_index.find(school.priority[k]);
      if (it == student_index.end()) {
        auto issue = MakeIssue(IssueKind::kUnknownReference,
                               "unknown student '" + school.priority[k] + "' in priority of '" +
                                   school.id + "'",
                               where + "/priority/" + std::to_string(k));
        issue.schools = {school.id};
        add(std::move(issue));
        bad = true;
      } else {
        ++seen[it->second];
      }
    }
    if (!bad && (school.priority.size() != static_cast<std::size_t>(num_students) ||
                 std::any_of(seen.begin(), seen.end(), [](int c) { return c != 1; }))) {
      auto issue = MakeIssue(IssueKind::kBadPriority,
                             "priority of '" + school.id + "' is not a strict order of all students",
                             where + "/priority");
      issue.schools = {school.id};
      add(std::move(issue));
    }
  }
  if (!report.ok()) return report;

  const int num_schools = static_cast<int>(raw.schools.size());

  // Bundles: trivial bundles first, then explicit nontrivial ones.
  struct Draft {
    std::string name;
    std::vector<bool> member;
    std::vector<bool> target;
    std::string where;
  };
  std::vector<Draft> drafts;
  for (int s = 0; s < num_schools; ++s) {
    Draft d{raw.schools[s].id, std::vector<bool>(num_schools, false),
            std::vector<bool>(num_students, true), Pointer("schools", s)};
    d.member[s] = true;
    drafts.push_back(std::move(d));
  }
  std::set<std::string> bundle_names;
  for (std::size_t k = 0; k < raw.bundles.size(); ++k) {
    const RawBundle& rb = raw.bundles[k];
    const std::string where = Pointer("bundles", k);
    std::vector<bool> member(num_schools, false);
    std::vector<bool> target(num_students, !rb.targets.has_value());
    bool bad = false;
    if (rb.id.empty()) {
      add(MakeIssue(IssueKind::kSchema, "empty bundle id", where + "/id"));
      bad = true;
    } else if (!bundle_names.insert(rb.id).second || student_index.count(rb.id)) {
      auto issue = MakeIssue(IssueKind::kDuplicateId, "duplicate bundle id '" + rb.id + "'",
                             where + "/id");
      issue.bundles = {rb.id};
      add(std::move(issue));
      bad = true;
    }
    if (rb.schools.empty()) {
      auto issue = MakeIssue(IssueKind::kEmptyBundle, "bundle '" + rb.id + "' has no schools",
                             where + "/schools");
      issue.bundles = {rb.id};
      add(std::move(issue));
      bad = true;
    }
    for (std::size_t j = 0; j < rb.schools.size(); ++j) {
      auto it = school_index.find(rb.schools[j]);
      if (it == school_index.end()) {
        auto issue = MakeIssue(IssueKind::kUnknownReference,
                               "unknown school '" + rb.schools[j] + "' in bundle '" + rb.id + "'",
                               where + "/schools/" + std::to_string(j));
        issue.bundles = {rb.id};
        add(std::move(issue));
        bad = true;
      } else if (member[it->second]) {
        auto issue = MakeIssue(IssueKind::kSchema,
                               "school '" + rb.schools[j] + "' listed twice in bundle '" + rb.id + "'",
                               where + "/schools/" + std::to_string(j));
        issue.bundles = {rb.id};
        add(std::move(issue));
        bad = true;
      } else {
        member[it->second] = true;
      }
    }
    if (rb.targets) {
      for (std::size_t j = 0; j < rb.targets->size(); ++j) {
        auto it = student_index.find((*rb.targets)[j]);
        if (it == student_index.end()) {
          auto issue = MakeIssue(IssueKind::kUnknownReference,
                                 "unknown student '" + (*rb.targets)[j] + "' in targets of '" +
                                     rb.id + "'",
                                 where + "/targets/" + std::to_string(j));
          issue.bundles = {rb.id};
          add(std::move(issue));
          bad = true;
        } else {
          target[it->second] = true;
        }
      }
    }
    if (bad) continue;

    if (rb.schools.size() == 1) {
      // An explicit trivial bundle must alias the synthesized one.
      const int s = school_index.at(rb.schools[0]);
      const bool all = std::all_of(target.begin(), target.end(), [](bool t) { return t; });
      if (!all) {
        auto issue = MakeIssue(IssueKind::kTrivialBundleTargets,
                               "single-school bundle '" + rb.id + "' must target every student",
                               where + "/targets");
        issue.bundles = {rb.id};
        add(std::move(issue));
      } else if (rb.id != raw.schools[s].id) {
        auto issue = MakeIssue(IssueKind::kDuplicateSchoolSet,
                               "bundle '" + rb.id + "' duplicates the school set of '" +
                                   raw.schools[s].id + "'",
                               where + "/schools");
        issue.bundles = {rb.id, raw.schools[s].id};
        add(std::move(issue));
      }
      continue;
    }
    if (school_index.count(rb.id)) {
      auto issue = MakeIssue(IssueKind::kDuplicateId,
                             "bundle id '" + rb.id + "' is already a school id", where + "/id");
      issue.bundles = {rb.id};
      add(std::move(issue));
      continue;
    }
    drafts.push_back(Draft{rb.id, std::move(member), std::move(target), where});
  }
  if (!report.ok()) return report;

  const int num_bundles = static_cast<int>(drafts.size());
  for (int a = num_schools; a < num_bundles; ++a) {
    for (int b = 0; b < a; ++b) {
      if (drafts[a].member == drafts[b].member) {
        auto issue = MakeIssue(IssueKind::kDuplicateSchoolSet,
                               "bundles '" + drafts[b].name + "' and '" + drafts[a].name +
                                   "' have the same schools",
                               drafts[a].where + "/schools");
        issue.bundles = {drafts[b].name, drafts[a].name};
        add(std::move(issue));
      }
    }
  }
  if (!report.ok()) return report;

  // Hierarchy and monotonicity over every pair.
  std::vector<std::vector<bool>> strict_sub(num_bundles, std::vector<bool>(num_bundles, false));
  for (int a = 0; a < num_bundles; ++a) {
    for (int b = a + 1; b < num_bundles; ++b) {
      const bool a_in_b = IsSubset(drafts[a].member, drafts[b].member);
      const bool b_in_a = IsSubset(drafts[b].member, drafts[a].member);
      bool overlap = false;
      for (int s = 0; s < num_schools; ++s) {
        if (drafts[a].member[s] && drafts[b].member[s]) overlap = true;
      }
      if (overlap && !a_in_b && !b_in_a) {
        auto issue = MakeIssue(IssueKind::kHierarchy,
                               "bundles '" + drafts[a].name + "' and '" + drafts[b].name +
                                   "' overlap without nesting",
                               drafts[b].where + "/schools");
        issue.bundles = {drafts[a].name, drafts[b].name};
        add(std::move(issue));
        continue;
      }
      strict_sub[a][b] = a_in_b;
      strict_sub[b][a] = b_in_a;
    }
  }
  for (int inner = 0; inner < num_bundles; ++inner) {
    for (int outer = 0; outer < num_bundles; ++outer) {
      if (!strict_sub[inner][outer]) continue;
      if (!IsSubset(drafts[outer].target, drafts[inner].target)) {
        auto issue = MakeIssue(IssueKind::kMonotonicity,
                               "bundle '" + drafts[inner].name + "' is inside '" +
                                   drafts[outer].name + "' but does not target all its targets",
                               drafts[inner].where + "/targets");
        issue.bundles = {drafts[inner].name, drafts[outer].name};
        for (int i = 0; i < num_students; ++i) {
          if (drafts[outer].target[i] && !drafts[inner].target[i]) {
            issue.students.push_back(raw.students[i]);
          }
        }
        add(std::move(issue));
      }
    }
  }

  // Priority uniformity over targets.
  std::vector<std::vector<int>> rank(num_schools, std::vector<int>(num_students));
  for (int s = 0; s < num_schools; ++s) {
    for (int k = 0; k < num_students; ++k) {
      rank[s][student_index.at(raw.schools[s].priority[k])] = k;
    }
  }
  for (int b = num_schools; b < num_bundles; ++b) {
    std::optional<std::vector<int>> first;
    for (int s = 0; s < num_schools; ++s) {
      if (!drafts[b].member[s]) continue;
      std::vector<int> order;
      for (int k = 0; k < num_students; ++k) {
        const int i = student_index.at(raw.schools[s].priority[k]);
        if (drafts[b].target[i]) order.push_back(i);
      }
      if (!first) {
        first = std::move(order);
      } else if (order != *first) {
        auto issue = MakeIssue(IssueKind::kPriorityUniformity,
                               "schools of bundle '" + drafts[b].name +
                                   "' order its targets differently",
                               drafts[b].where);
        issue.bundles = {drafts[b].name};
        issue.schools = {raw.schools[s].id};
        add(std::move(issue));
        break;
      }
    }
  }
  if (!report.ok()) return report;

  Instance inst;
  inst.raw_ = raw;
  inst.student_names_ = raw.students;
  inst.rol_length_ = raw.rol_length;
  inst.rank_ = std::move(rank);
  for (int s = 0; s < num_schools; ++s) {
    School school;
    school.id = SchoolId(s);
    school.name = raw.schools[s].id;
    school.quota = raw.schools[s].quota;
    for (const std::string& name : raw.schools[s].priority) {
      school.priority.emplace_back(student_index.at(name));
    }
    inst.schools_.push_back(std::move(school));
  }
  for (int b = 0; b < num_bundles; ++b) {
    Bundle bundle;
    bundle.id = BundleId(b);
    bundle.name = drafts[b].name;
    for (int s = 0; s < num_schools; ++s) {
      if (drafts[b].member[s]) {
        bundle.schools.emplace_back(s);
        bundle.quota += raw.schools[s].quota;
      }
    }
    for (int i = 0; i < num_students; ++i) {
      if (drafts[b].target[i]) bundle.targets.emplace_back(i);
    }
    inst.member_.push_back(drafts[b].member);
    inst.target_.push_back(drafts[b].target);
    inst.bundles_.push_back(std::move(bundle));
  }
  inst.strict_sub_ = strict_sub;
  inst.ancestors_.resize(num_bundles);
  inst.descendants_.resize(num_bundles);
  for (int b = 0; b < num_bundles; ++b) {
    for (int c = 0; c < num_bundles; ++c) {
      if (strict_sub[b][c]) inst.ancestors_[b].emplace_back(c);
      if (strict_sub[c][b]) inst.descendants_[b].emplace_back(c);
    }
    // Innermost first: a smaller sup-bundle has fewer schools.
    std::sort(inst.ancestors_[b].begin(), inst.ancestors_[b].end(), [&](BundleId x, BundleId y) {
      const auto nx = inst.bundles_[x.index()].schools.size();
      const auto ny = inst.bundles_[y.index()].schools.size();
      return nx != ny ? nx < ny : x < y;
    });
  }
  inst.simplicity_ = DetectSimplicity(inst);
  inst.hierarchy_of_.assign(num_bundles, -1);
  for (std::size_t h = 0; h < inst.simplicity_.hierarchies.size(); ++h) {
    for (BundleId b : inst.simplicity_.hierarchies[h].bundles) {
      inst.hierarchy_of_[b.index()] = static_cast<int>(h);
    }
  }
  return inst;
}

Instance BuildInstance(const RawInstance& raw) {
  auto result = ValidateInstance(raw);
  if (auto* report = std::get_if<ValidationReport>(&result)) {
    throw ValidationError(std::move(*report));
  }
  return std::get<Instance>(std::move(result));
}

Simplicity DetectSimplicity(const Instance& instance) {
  Simplicity out;
  out.simple = true;
  for (const Bundle& root : instance.bundles()) {
    if (!instance.Ancestors(root.id).empty()) continue;
    SubHierarchy h;
    h.root = root.id;
    h.bundles.push_back(root.id);
    for (BundleId d : instance.Descendants(root.id)) h.bundles.push_back(d);
    std::sort(h.bundles.begin(), h.bundles.end());
    h.schools = root.schools;
    const auto& order = instance.school(h.schools.front()).priority;
    bool uniform = true;
    for (SchoolId s : h.schools) {
      if (instance.school(s).priority != order) uniform = false;
    }
    if (uniform) {
      h.order = order;
    } else {
      out.simple = false;
    }
    out.hierarchies.push_back(std::move(h));
  }
  if (!out.simple) {
    for (SubHierarchy& h : out.hierarchies) h.order.clear();
  }
  return out;
}

std::vector<ValidationIssue> CheckRol(const Instance& instance, const Rol& rol) {
  std::vector<ValidationIssue> issues;
  const std::string who =
      rol.student.valid() && rol.student.value() < instance.num_students()
          ? instance.student_name(rol.student)
          : std::to_string(rol.student.value());
  if (static_cast<int>(rol.entries.size()) > instance.rol_length()) {
    auto issue = MakeIssue(IssueKind::kRolTooLong,
                           "ROL of '" + who + "' has " + std::to_string(rol.entries.size()) +
                               " entries, limit is " + std::to_string(instance.rol_length()),
                           "/" + who);
    issue.students = {who};
    issues.push_back(std::move(issue));
  }
  for (std::size_t k = 0; k < rol.entries.size(); ++k) {
    const BundleId b = rol.entries[k];
    const std::string where = "/" + who + "/" + std::to_string(k);
    if (!b.valid() || b.value() >= instance.num_bundles()) {
      auto issue = MakeIssue(IssueKind::kUnknownReference, "unknown bundle in ROL of '" + who + "'",
                             where);
      issue.students = {who};
      issues.push_back(std::move(issue));
      continue;
    }
    const std::string& name = instance.bundle(b).name;
    if (std::find(rol.entries.begin(), rol.entries.begin() + k, b) != rol.entries.begin() + k) {
      auto issue = MakeIssue(IssueKind::kRolDuplicateEntry,
                             "bundle '" + name + "' listed twice by '" + who + "'", where);
      issue.students = {who};
      issue.bundles = {name};
      issues.push_back(std::move(issue));
    }
    if (!instance.Available(rol.student, b)) {
      auto issue = MakeIssue(IssueKind::kRolUnavailableBundle,
                             "bundle '" + name + "' is not available to '" + who + "'", where);
      issue.students = {who};
      issue.bundles = {name};
      issues.push_back(std::move(issue));
    }
  }
  return issues;
}

std::variant<RolProfile, ValidationReport> ValidateRols(const Instance& instance,
                                                        const RawRols& raw) {
  ValidationReport report;
  RolProfile profile = EmptyRols(instance);
  std::vector<bool> seen(instance.num_students(), false);
  for (std::size_t k = 0; k < raw.size(); ++k) {
    const RawRol& entry = raw[k];
    auto student = instance.FindStudent(entry.student);
    if (!student) {
      auto issue = MakeIssue(IssueKind::kUnknownReference, "unknown student '" + entry.student + "'",
                             "/" + entry.student);
      issue.students = {entry.student};
      report.issues.push_back(std::move(issue));
      continue;
    }
    if (seen[student->index()]) {
      auto issue = MakeIssue(IssueKind::kRolDuplicateStudent,
                             "student '" + entry.student + "' has two ROLs", "/" + entry.student);
      issue.students = {entry.student};
      report.issues.push_back(std::move(issue));
      continue;
    }
    seen[student->index()] = true;
    Rol rol{*student, {}};
    bool bad = false;
    for (std::size_t j = 0; j < entry.entries.size(); ++j) {
      auto b = instance.FindBundle(entry.entries[j]);
      if (!b) {
        auto issue = MakeIssue(IssueKind::kUnknownReference,
                               "unknown bundle '" + entry.entries[j] + "' in ROL of '" +
                                   entry.student + "'",
                               "/" + entry.student + "/" + std::to_string(j));
        issue.students = {entry.student};
        issue.bundles = {entry.entries[j]};
        report.issues.push_back(std::move(issue));
        bad = true;
        continue;
      }
      rol.entries.push_back(*b);
    }
    if (bad) continue;
    for (ValidationIssue& issue : CheckRol(instance, rol)) {
      report.issues.push_back(std::move(issue));
    }
    profile[student->index()] = std::move(rol);
  }
  if (!report.ok()) return report;
  return profile;
}

RolProfile BuildRols(const Instance& instance, const RawRols& raw) {
  auto result = ValidateRols(instance, raw);
  if (auto* report = std::get_if<ValidationReport>(&result)) {
    throw ValidationError(std::move(*report));
  }
  return std::get<RolProfile>(std::move(result));
}

void RequireValidRols(const Instance& instance, const RolProfile& rols) {
  ValidationReport report;
  if (static_cast<int>(rols.size()) != instance.num_students()) {
    report.issues.push_back(MakeIssue(IssueKind::kSchema,
                                      "ROL profile has " + std::to_string(rols.size()) +
                                          " entries for " +
                                          std::to_string(instance.num_students()) + " students",
                                      ""));
    throw ValidationError(std::move(report));
  }
  for (std::size_t i = 0; i < rols.size(); ++i) {
    if (rols[i].student != StudentId(static_cast<int>(i))) {
      report.issues.push_back(
          MakeIssue(IssueKind::kSchema, "ROL profile is not indexed by student", ""));
      continue;
    }
    for (ValidationIssue& issue : CheckRol(instance, rols[i])) {
      report.issues.push_back(std::move(issue));
    }
  }
  if (!report.ok()) throw ValidationError(std::move(report));
}

RolProfile EmptyRols(const Instance& instance) {
  RolProfile out;
  for (int i = 0; i < instance.num_students(); ++i) out.push_back(Rol{StudentId(i), {}});
  return out;
}

int BundleMatching::num_matched() const {
  return static_cast<int>(
      std::count_if(assignment.begin(), assignment.end(), [](const auto& b) { return b.has_value(); }));
}

std::vector<int> Occupancy(const Instance& instance, const BundleMatching& nu) {
  std::vector<int> q(instance.num_bundles(), 0);
  for (const auto& b : nu.assignment) {
    if (!b) continue;
    ++q[b->index()];
    for (BundleId up : instance.Ancestors(*b)) ++q[up.index()];
  }
  return q;
}

std::vector<std::string> CheckBundleMatching(const Instance& instance, const BundleMatching& nu) {
  std::vector<std::string> problems;
  if (static_cast<int>(nu.assignment.size()) != instance.num_students()) {
    problems.push_back("matching covers " + std::to_string(nu.assignment.size()) + " students, expected " +
                       std::to_string(instance.num_students()));
    return problems;
  }
  for (int i = 0; i < instance.num_students(); ++i) {
    const auto& b = nu.assignment[i];
    if (!b) continue;
    if (!b->valid() || b->value() >= instance.num_bundles()) {
      problems.push_back("student '" + instance.student_name(StudentId(i)) + "' has an unknown bundle");
      return problems;
    }
    if (!instance.Available(StudentId(i), *b)) {
      problems.push_back("bundle '" + instance.bundle(*b).name + "' is not available to '" +
                         instance.student_name(StudentId(i)) + "'");
    }
  }
  const std::vector<int> q = Occupancy(instance, nu);
  for (const Bundle& b : instance.bundles()) {
    if (q[b.id.index()] > b.quota) {
      problems.push_back("bundle '" + b.name + "' holds " + std::to_string(q[b.id.index()]) +
                         " students, quota is " + std::to_string(b.quota));
    }
  }
  return problems;
}

std::vector<std::string> CheckStandardMatching(const Instance& instance, const StandardMatching& mu) {
  std::vector<std::string> problems;
  if (static_cast<int>(mu.assignment.size()) != instance.num_students()) {
    problems.push_back("matching covers " + std::to_string(mu.assignment.size()) + " students, expected " +
                       std::to_string(instance.num_students()));
    return problems;
  }
  std::vector<int> load(instance.num_schools(), 0);
  for (const auto& s : mu.assignment) {
    if (!s) continue;
    if (!s->valid() || s->value() >= instance.num_schools()) {
      problems.push_back("unknown school in matching");
      return problems;
    }
    ++load[s->index()];
  }
  for (const School& s : instance.schools()) {
    if (load[s.id.index()] > s.quota) {
      problems.push_back("school '" + s.name + "' holds " + std::to_string(load[s.id.index()]) +
                         " students, quota is " + std::to_string(s.quota));
    }
  }
  return problems;
}

bool Implements(const Instance& instance, const BundleMatching& nu, const StandardMatching& mu) {
  if (nu.assignment.size() != mu.assignment.size()) return false;
  if (!CheckStandardMatching(instance, mu).empty()) return false;
  for (std::size_t i = 0; i < nu.assignment.size(); ++i) {
    const auto& b = nu.assignment[i];
    const auto& s = mu.assignment[i];
    if (b.has_value() != s.has_value()) return false;
    if (b && !instance.Contains(*b, *s)) return false;
  }
  return true;
}

InducedPreference::InducedPreference(std::vector<std::vector<SchoolId>> classes, int num_schools)
    : classes_(std::move(classes)), class_of_(num_schools, -1) {
  for (std::size_t c = 0; c < classes_.size(); ++c) {
    for (SchoolId s : classes_[c]) class_of_[s.index()] = static_cast<int>(c);
  }
}

int InducedPreference::Level(std::optional<SchoolId> s) const {
  if (!s || class_of_[s->index()] < 0) return static_cast<int>(classes_.size());
  return class_of_[s->index()];
}

bool InducedPreference::StrictlyPrefers(std::optional<SchoolId> a, std::optional<SchoolId> b) const {
  return Level(a) < Level(b);
}

InducedPreference InducePreference(const Instance& instance, const Rol& rol) {
  std::vector<bool> seen(instance.num_schools(), false);
  std::vector<std::vector<SchoolId>> classes;
  for (BundleId b : rol.entries) {
    std::vector<SchoolId> fresh;
    for (SchoolId s : instance.bundle(b).schools) {
      if (!seen[s.index()]) {
        seen[s.index()] = true;
        fresh.push_back(s);
      }
    }
    if (!fresh.empty()) classes.push_back(std::move(fresh));
  }
  return InducedPreference(std::move(classes), instance.num_schools());
}

}  // namespace bundlechoice
