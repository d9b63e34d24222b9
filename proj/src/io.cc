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

#include "bundlechoice/io.h"

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

namespace bundlechoice {
namespace {

ValidationIssue Issue(IssueKind kind, std::string message, std::string location) {
  ValidationIssue issue;
  issue.kind = kind;
  issue.message = std::move(message);
  issue.location = std::move(location);
  return issue;
}

ValidationReport Single(IssueKind kind, std::string message, std::string location) {
  ValidationReport report;
  report.issues.push_back(Issue(kind, std::move(message), std::move(location)));
  return report;
}

std::string LineColumn(std::string_view text, std::size_t byte) {
  // nlohmann reports the 1-based index of the offending character.
  const std::size_t end = std::min(byte > 0 ? byte - 1 : 0, text.size());
  int line = 1, column = 1;
  for (std::size_t k = 0; k < end; ++k) {
    if (text[k] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return std::to_string(line) + ":" + std::to_string(column);
}

std::string Escape(const std::string& token) {
  std::string out;
  for (char c : token) {
    if (c == '~') {
      out += "~0";
    } else if (c == '/') {
      out += "~1";
    } else {
      out += c;
    }
  }
  return out;
}

std::string Child(const std::string& pointer, const std::string& key) {
  return pointer + "/" + Escape(key);
}
std::string Child(const std::string& pointer, std::size_t index) {
  return pointer + "/" + std::to_string(index);
}

// Collects schema problems while reading typed fields.
class Reader {
 public:
  ValidationReport& report() { return report_; }

  void Fail(const std::string& where, const std::string& message) {
    report_.issues.push_back(Issue(IssueKind::kSchema, message, where));
  }

  const Json* Field(const Json& obj, const std::string& where, const std::string& key,
                    bool required) {
    auto it = obj.find(key);
    if (it == obj.end()) {
      if (required) Fail(where, "missing field '" + key + "'");
      return nullptr;
    }
    return &*it;
  }

  bool Object(const Json& v, const std::string& where) {
    if (v.is_object()) return true;
    Fail(where, "expected an object");
    return false;
  }

  bool Array(const Json& v, const std::string& where) {
    if (v.is_array()) return true;
    Fail(where, "expected an array");
    return false;
  }

  std::optional<std::string> String(const Json& v, const std::string& where) {
    if (v.is_string()) return v.get<std::string>();
    Fail(where, "expected a string");
    return std::nullopt;
  }

  std::optional<long long> Integer(const Json& v, const std::string& where) {
    if (v.is_number_integer()) return v.get<long long>();
    Fail(where, "expected an integer");
    return std::nullopt;
  }

  std::optional<double> Number(const Json& v, const std::string& where) {
    if (v.is_number()) return v.get<double>();
    Fail(where, "expected a number");
    return std::nullopt;
  }

  std::optional<std::vector<std::string>> Strings(const Json& v, const std::string& where) {
    if (!Array(v, where)) return std::nullopt;
    std::vector<std::string> out;
    bool ok = true;
    for (std::size_t k = 0; k < v.size(); ++k) {
      auto s = String(v[k], Child(where, k));
      if (s) {
        out.push_back(*s);
      } else {
        ok = false;
      }
    }
    if (!ok) return std::nullopt;
    return out;
  }

 private:
  ValidationReport report_;
};

template <typename T>
T Unwrap(std::variant<T, ValidationReport> result, const std::string& path) {
  if (auto* report = std::get_if<ValidationReport>(&result)) {
    for (ValidationIssue& issue : report->issues) {
      issue.location = path + (issue.location.empty() ? "" : ":" + issue.location);
    }
    throw ValidationError(std::move(*report));
  }
  return std::move(std::get<T>(result));
}

// Shared shape of ROL and preference documents: object of string arrays.
std::variant<std::vector<std::pair<std::string, std::vector<std::string>>>, ValidationReport>
ParseStringListMap(std::string_view text) {
  auto parsed = ParseJson(text);
  if (auto* report = std::get_if<ValidationReport>(&parsed)) return *report;
  const Json& doc = std::get<Json>(parsed);
  Reader r;
  std::vector<std::pair<std::string, std::vector<std::string>>> out;
  if (r.Object(doc, "")) {
    for (auto it = doc.begin(); it != doc.end(); ++it) {
      auto list = r.Strings(it.value(), Child("", it.key()));
      if (list) out.emplace_back(it.key(), std::move(*list));
    }
  }
  if (!r.report().ok()) return r.report();
  return out;
}

}  // namespace

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::variant<Json, ValidationReport> ParseJson(std::string_view text) {
  std::vector<std::set<std::string>> keys;
  std::optional<std::string> duplicate;
  auto callback = [&](int, Json::parse_event_t event, Json& value) {
    switch (event) {
      case Json::parse_event_t::object_start:
        keys.emplace_back();
        break;
      case Json::parse_event_t::object_end:
        keys.pop_back();
        break;
      case Json::parse_event_t::key:
        if (!keys.back().insert(value.get<std::string>()).second && !duplicate) {
          duplicate = value.get<std::string>();
        }
        break;
      default:
        break;
    }
    return true;
  };
  Json doc;
  try {
    doc = Json::parse(text.begin(), text.end(), callback);
  } catch (const Json::parse_error& e) {
    return Single(IssueKind::kSyntax, e.what(), LineColumn(text, e.byte));
  }
  if (duplicate) {
    return Single(IssueKind::kSyntax, "duplicate object key '" + *duplicate + "'", "");
  }
  return doc;
}

std::variant<RawInstance, ValidationReport> ParseRawInstance(const Json& doc) {
  Reader r;
  RawInstance raw;
  if (!r.Object(doc, "")) return r.report();
  static const std::set<std::string> kKnown = {"students", "schools", "bundles", "rol_length", "name", "description"};
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    if (!kKnown.count(it.key())) r.Fail(Child("", it.key()), "unknown field '" + it.key() + "'");
  }
  if (const Json* v = r.Field(doc, "", "students", true)) {
    if (auto s = r.Strings(*v, "/students")) raw.students = std::move(*s);
  }
  if (const Json* v = r.Field(doc, "", "rol_length", true)) {
    if (auto n = r.Integer(*v, "/rol_length")) raw.rol_length = static_cast<int>(*n);
  }
  if (const Json* v = r.Field(doc, "", "schools", true); v && r.Array(*v, "/schools")) {
    for (std::size_t k = 0; k < v->size(); ++k) {
      const Json& s = (*v)[k];
      const std::string where = Child("/schools", k);
      if (!r.Object(s, where)) continue;
      RawSchool school;
      if (const Json* f = r.Field(s, where, "id", true)) {
        if (auto id = r.String(*f, where + "/id")) school.id = *id;
      }
      if (const Json* f = r.Field(s, where, "quota", true)) {
        if (auto q = r.Integer(*f, where + "/quota")) school.quota = static_cast<int>(*q);
      }
      if (const Json* f = r.Field(s, where, "priority", true)) {
        if (auto p = r.Strings(*f, where + "/priority")) school.priority = std::move(*p);
      }
      raw.schools.push_back(std::move(school));
    }
  }
  if (const Json* v = r.Field(doc, "", "bundles", false); v && r.Array(*v, "/bundles")) {
    for (std::size_t k = 0; k < v->size(); ++k) {
      const Json& b = (*v)[k];
      const std::string where = Child("/bundles", k);
      if (!r.Object(b, where)) continue;
      RawBundle bundle;
      if (const Json* f = r.Field(b, where, "id", true)) {
        if (auto id = r.String(*f, where + "/id")) bundle.id = *id;
      }
      if (const Json* f = r.Field(b, where, "schools", true)) {
        if (auto s = r.Strings(*f, where + "/schools")) bundle.schools = std::move(*s);
      }
      if (const Json* f = r.Field(b, where, "targets", false)) {
        if (f->is_string() && f->get<std::string>() == "all") {
          bundle.targets = std::nullopt;
        } else if (f->is_array()) {
          if (auto t = r.Strings(*f, where + "/targets")) bundle.targets = std::move(*t);
        } else {
          r.Fail(where + "/targets", "expected a student list or \"all\"");
        }
      }
      raw.bundles.push_back(std::move(bundle));
    }
  }
  if (!r.report().ok()) return r.report();
  return raw;
}

std::variant<Instance, ValidationReport> ParseInstance(std::string_view text) {
  auto parsed = ParseJson(text);
  if (auto* report = std::get_if<ValidationReport>(&parsed)) return *report;
  auto raw = ParseRawInstance(std::get<Json>(parsed));
  if (auto* report = std::get_if<ValidationReport>(&raw)) return *report;
  return ValidateInstance(std::get<RawInstance>(raw));
}

Instance LoadInstance(const std::string& path) {
  return Unwrap(ParseInstance(ReadFile(path)), path);
}

Json InstanceToJson(const Instance& instance) {
  const RawInstance& raw = instance.raw();
  Json schools = Json::array();
  for (const RawSchool& s : raw.schools) {
    schools.push_back({{"id", s.id}, {"quota", s.quota}, {"priority", s.priority}});
  }
  Json bundles = Json::array();
  for (const RawBundle& b : raw.bundles) {
    Json entry = {{"id", b.id}, {"schools", b.schools}};
    if (b.targets) {
      entry["targets"] = *b.targets;
    } else {
      entry["targets"] = "all";
    }
    bundles.push_back(std::move(entry));
  }
  return {{"students", raw.students},
          {"rol_length", raw.rol_length},
          {"schools", std::move(schools)},
          {"bundles", std::move(bundles)}};
}

std::string SerializeInstance(const Instance& instance) {
  return CanonicalDump(InstanceToJson(instance));
}

std::variant<RolProfile, ValidationReport> ParseRols(const Instance& instance,
                                                     std::string_view text) {
  auto lists = ParseStringListMap(text);
  if (auto* report = std::get_if<ValidationReport>(&lists)) return *report;
  RawRols raw;
  for (auto& [student, entries] : std::get<0>(lists)) raw.push_back({student, std::move(entries)});
  return ValidateRols(instance, raw);
}

RolProfile LoadRols(const Instance& instance, const std::string& path) {
  return Unwrap(ParseRols(instance, ReadFile(path)), path);
}

Json RolsToJson(const Instance& instance, const RolProfile& rols) {
  Json doc = Json::object();
  for (const Rol& rol : rols) {
    Json entries = Json::array();
    for (BundleId b : rol.entries) entries.push_back(instance.bundle(b).name);
    doc[instance.student_name(rol.student)] = std::move(entries);
  }
  return doc;
}

std::variant<SecondStagePreferences, ValidationReport> ParsePreferences(
    const Instance& instance, std::string_view text) {
  auto lists = ParseStringListMap(text);
  if (auto* report = std::get_if<ValidationReport>(&lists)) return *report;
  ValidationReport report;
  SecondStagePreferences prefs(instance.num_students());
  for (auto& [student, schools] : std::get<0>(lists)) {
    auto i = instance.FindStudent(student);
    if (!i) {
      report.issues.push_back(
          Issue(IssueKind::kUnknownReference, "unknown student '" + student + "'", "/" + student));
      continue;
    }
    std::vector<SchoolId> order;
    for (std::size_t k = 0; k < schools.size(); ++k) {
      auto s = instance.FindSchool(schools[k]);
      if (!s) {
        report.issues.push_back(Issue(IssueKind::kUnknownReference,
                                      "unknown school '" + schools[k] + "'",
                                      Child("/" + Escape(student), k)));
        continue;
      }
      order.push_back(*s);
    }
    prefs[i->index()] = std::move(order);
  }
  if (!report.ok()) return report;
  return prefs;
}

SecondStagePreferences LoadPreferences(const Instance& instance, const std::string& path) {
  return Unwrap(ParsePreferences(instance, ReadFile(path)), path);
}

std::variant<MatchingDocument, ValidationReport> ParseMatchingDocument(const Instance& instance,
                                                                      std::string_view text) {
  auto parsed = ParseJson(text);
  if (auto* report = std::get_if<ValidationReport>(&parsed)) return *report;
  const Json& doc = std::get<Json>(parsed);
  Reader r;
  MatchingDocument out;
  out.bundle_matching = BundleMatching(instance.num_students());
  if (!r.Object(doc, "")) return r.report();

  // Reads one assignment array; `lookup` resolves the value field.
  auto read = [&](const std::string& key, const char* field, auto lookup, auto assign) {
    const Json* v = r.Field(doc, "", key, false);
    if (!v) return false;
    const std::string where = "/" + key;
    if (!r.Array(*v, where)) return true;
    std::vector<bool> seen(instance.num_students(), false);
    for (std::size_t k = 0; k < v->size(); ++k) {
      const Json& e = (*v)[k];
      const std::string at = Child(where, k);
      if (!r.Object(e, at)) continue;
      const Json* fs = r.Field(e, at, "student", true);
      const Json* fv = r.Field(e, at, field, true);
      if (!fs || !fv) continue;
      auto name = r.String(*fs, at + "/student");
      if (!name) continue;
      auto i = instance.FindStudent(*name);
      if (!i) {
        r.report().issues.push_back(Issue(IssueKind::kUnknownReference,
                                          "unknown student '" + *name + "'", at + "/student"));
        continue;
      }
      if (seen[i->index()]) {
        r.Fail(at + "/student", "student '" + *name + "' assigned twice");
        continue;
      }
      seen[i->index()] = true;
      if (fv->is_null()) continue;
      auto target = r.String(*fv, at + "/" + field);
      if (!target) continue;
      auto id = lookup(*target);
      if (!id) {
        r.report().issues.push_back(Issue(IssueKind::kUnknownReference,
                                          std::string("unknown ") + field + " '" + *target + "'",
                                          at + "/" + field));
        continue;
      }
      assign(*i, *id);
    }
    return true;
  };

  const bool has_bundles = read(
      "bundle_matching", "bundle", [&](const std::string& n) { return instance.FindBundle(n); },
      [&](StudentId i, BundleId b) { out.bundle_matching[i] = b; });
  StandardMatching mu(instance.num_students());
  const bool has_schools = read(
      "matching", "school", [&](const std::string& n) { return instance.FindSchool(n); },
      [&](StudentId i, SchoolId s) { mu[i] = s; });
  if (!has_bundles) r.Fail("", "missing field 'bundle_matching'");
  if (!r.report().ok()) return r.report();

  for (const std::string& problem : CheckBundleMatching(instance, out.bundle_matching)) {
    r.report().issues.push_back(Issue(IssueKind::kSchema, problem, "/bundle_matching"));
  }
  if (has_schools) {
    for (const std::string& problem : CheckStandardMatching(instance, mu)) {
      r.report().issues.push_back(Issue(IssueKind::kSchema, problem, "/matching"));
    }
    out.matching = std::move(mu);
  }
  if (!r.report().ok()) return r.report();
  return out;
}

MatchingDocument LoadMatchingDocument(const Instance& instance, const std::string& path) {
  return Unwrap(ParseMatchingDocument(instance, ReadFile(path)), path);
}

Json BundleMatchingToJson(const Instance& instance, const BundleMatching& nu) {
  Json out = Json::array();
  for (StudentId i : instance.students()) {
    Json value = nu[i] ? Json(instance.bundle(*nu[i]).name) : Json(nullptr);
    out.push_back({{"student", instance.student_name(i)}, {"bundle", std::move(value)}});
  }
  return out;
}

Json StandardMatchingToJson(const Instance& instance, const StandardMatching& mu) {
  Json out = Json::array();
  for (StudentId i : instance.students()) {
    Json value = mu[i] ? Json(instance.school(*mu[i]).name) : Json(nullptr);
    out.push_back({{"student", instance.student_name(i)}, {"school", std::move(value)}});
  }
  return out;
}

Json VerdictToJson(const Instance& instance, const StabilityVerdict& verdict) {
  Json violations = Json::array();
  for (const Violation& v : verdict.violations) {
    Json entry = {{"kind", ViolationKindName(v.kind)},
                  {"student", instance.student_name(v.student)}};
    if (v.other) entry["other"] = instance.student_name(*v.other);
    if (v.bundle) entry["bundle"] = instance.bundle(*v.bundle).name;
    if (v.school) entry["school"] = instance.school(*v.school).name;
    violations.push_back(std::move(entry));
  }
  return {{"stable", verdict.stable()}, {"violations", std::move(violations)}};
}

Json ReportToJson(const ValidationReport& report) {
  Json issues = Json::array();
  for (const ValidationIssue& issue : report.issues) {
    Json entry = {{"kind", IssueKindName(issue.kind)},
                  {"message", issue.message},
                  {"location", issue.location}};
    if (!issue.bundles.empty()) entry["bundles"] = issue.bundles;
    if (!issue.students.empty()) entry["students"] = issue.students;
    if (!issue.schools.empty()) entry["schools"] = issue.schools;
    issues.push_back(std::move(entry));
  }
  return issues;
}

Json TraceToJson(const Instance& instance, const EngineTrace& trace) {
  Json events = Json::array();
  for (const TraceEvent& e : trace.events) {
    Json entry = {{"event", EventKindName(e.kind)}, {"round", e.round}, {"step", e.step}};
    if (e.student.valid()) entry["student"] = instance.student_name(e.student);
    if (e.bundle.valid()) entry["bundle"] = instance.bundle(e.bundle).name;
    if (!e.students.empty()) {
      Json names = Json::array();
      for (StudentId i : e.students) names.push_back(instance.student_name(i));
      entry["students"] = std::move(names);
    }
    if (!e.remaining.empty()) entry["remaining"] = e.remaining;
    events.push_back(std::move(entry));
  }
  return {{"rounds", trace.rounds}, {"events", std::move(events)}};
}

std::variant<StrategyProfile, ValidationReport> ParseStrategyProfile(std::string_view text) {
  auto parsed = ParseJson(text);
  if (auto* report = std::get_if<ValidationReport>(&parsed)) return *report;
  const Json& doc = std::get<Json>(parsed);
  Reader r;
  StrategyProfile profile;
  if (!r.Object(doc, "")) return r.report();
  const Json* rules = r.Field(doc, "", "rules", true);
  if (rules && r.Array(*rules, "/rules")) {
    for (std::size_t k = 0; k < rules->size(); ++k) {
      const Json& rule = (*rules)[k];
      const std::string where = Child("/rules", k);
      if (!r.Object(rule, where)) continue;
      StrategyRule out;
      const Json* type = r.Field(rule, where, "type", false);
      const Json* scores = r.Field(rule, where, "scores", false);
      if ((type == nullptr) == (scores == nullptr)) {
        r.Fail(where, "exactly one of 'type' and 'scores' is required");
      } else if (type) {
        auto name = r.String(*type, where + "/type");
        if (name && (*name == "A" || *name == "B")) {
          out.lo = out.hi = *name == "A" ? kTypeA : kTypeB;
        } else if (name) {
          r.Fail(where + "/type", "unknown type '" + *name + "'");
        }
      } else if (r.Array(*scores, where + "/scores")) {
        if (scores->size() != 2) {
          r.Fail(where + "/scores", "expected [lo, hi]");
        } else {
          auto lo = r.Integer((*scores)[0], where + "/scores/0");
          auto hi = r.Integer((*scores)[1], where + "/scores/1");
          if (lo && hi) {
            out.lo = static_cast<int>(*lo);
            out.hi = static_cast<int>(*hi);
          }
        }
      }
      const Json* choices = r.Field(rule, where, "choices", true);
      if (choices && r.Array(*choices, where + "/choices")) {
        for (std::size_t c = 0; c < choices->size(); ++c) {
          const Json& choice = (*choices)[c];
          const std::string at = Child(where + "/choices", c);
          if (!r.Object(choice, at)) continue;
          RolChoice rc;
          if (const Json* p = r.Field(choice, at, "probability", false)) {
            if (auto v = r.Number(*p, at + "/probability")) rc.probability = *v;
          }
          if (const Json* rol = r.Field(choice, at, "rol", true)) {
            if (auto v = r.Strings(*rol, at + "/rol")) rc.rol = std::move(*v);
          }
          out.choices.push_back(std::move(rc));
        }
      }
      profile.rules.push_back(std::move(out));
    }
  }
  if (!r.report().ok()) return r.report();
  return profile;
}

StrategyProfile LoadStrategyProfile(const std::string& path) {
  return Unwrap(ParseStrategyProfile(ReadFile(path)), path);
}

std::uint64_t Fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string HexDigest(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

std::string CanonicalDump(const Json& doc) { return doc.dump(2) + "\n"; }

namespace {

std::string FormatDouble(double v) {
  std::ostringstream out;
  out << std::setprecision(17) << v;
  return out.str();
}

// Quotes a CSV field when needed.
std::string Field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::string MetricsCsv(const std::vector<std::pair<std::string, MetricTable>>& tables) {
  std::string out = "treatment,metric,value,std_error\n";
  for (const auto& [treatment, table] : tables) {
    for (const auto& [metric, estimate] : table) {
      out += Field(treatment) + "," + Field(metric) + "," + FormatDouble(estimate.mean) + "," +
             FormatDouble(estimate.std_error) + "\n";
    }
  }
  return out;
}

std::string RoundsCsv(const std::vector<std::pair<std::string, std::vector<RoundRecord>>>& runs) {
  std::string out = "treatment,round,metric,value\n";
  for (const auto& [treatment, records] : runs) {
    for (const RoundRecord& record : records) {
      for (const auto& [metric, value] : record.values) {
        out += Field(treatment) + "," + std::to_string(record.round) + "," + Field(metric) + "," +
               FormatDouble(value) + "\n";
      }
    }
  }
  return out;
}

std::string TraceCsv(const Instance& instance, const EngineTrace& trace) {
  std::string out = "round,step,event,student,bundle,students,remaining\n";
  for (const TraceEvent& e : trace.events) {
    std::string students, remaining;
    for (std::size_t k = 0; k < e.students.size(); ++k) {
      if (k) students += ' ';
      students += instance.student_name(e.students[k]);
    }
    for (std::size_t k = 0; k < e.remaining.size(); ++k) {
      if (k) remaining += ' ';
      remaining += std::to_string(e.remaining[k]);
    }
    out += std::to_string(e.round) + "," + std::to_string(e.step) + "," +
           EventKindName(e.kind) + "," +
           Field(e.student.valid() ? instance.student_name(e.student) : "") + "," +
           Field(e.bundle.valid() ? instance.bundle(e.bundle).name : "") + "," +
           Field(students) + "," + remaining + "\n";
  }
  return out;
}

}  // namespace bundlechoice
