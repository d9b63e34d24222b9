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

#include "bundlechoice/cli.h"

#include <algorithm>
#include <optional>
#include <sstream>
#include <stdexcept>

#include "CLI11.hpp"
#include "bundlechoice/engines.h"
#include "bundlechoice/experiment.h"
#include "bundlechoice/implementation.h"
#include "bundlechoice/io.h"
#include "bundlechoice/model.h"
#include "bundlechoice/stability.h"

namespace bundlechoice {
namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string instance;
  std::string rols;
  std::string matching;
  std::string prefs;
  std::string engine = "auto";
  std::string tiebreak;
  std::string implement;
  std::string policy = "det";
  std::uint64_t seed = 0;
  bool assert_stable = false;
  std::uint64_t oracle_bound = kDefaultOracleBound;
  bool enumerate = false;
  std::string format = "csv";
  std::string student;
  std::string indifference;
  int exp = 0;
  std::string treatment = "all";
  std::string profile;
  std::int64_t rounds = 0;
  bool per_round = false;
  bool exact = false;
};

std::vector<std::string> SplitList(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::optional<TieBreakOrder> ParseTieBreak(const Instance& instance, const std::string& text) {
  if (text.empty()) return std::nullopt;
  std::vector<StudentId> order;
  for (const std::string& name : SplitList(text)) {
    auto i = instance.FindStudent(name);
    if (!i) throw UsageError("--tiebreak: unknown student '" + name + "'");
    order.push_back(*i);
  }
  try {
    return TieBreakOrder(std::move(order), instance.num_students());
  } catch (const std::invalid_argument& e) {
    throw UsageError(std::string("--tiebreak: ") + e.what());
  }
}

ImplementationPolicy::Mode ParseMode(const std::string& flag, const std::string& value) {
  if (value == "det" || value == "deterministic") return ImplementationPolicy::Mode::kDeterministic;
  if (value == "random") return ImplementationPolicy::Mode::kRandom;
  if (value == "prefs" || value == "preferences") return ImplementationPolicy::Mode::kPreferences;
  throw UsageError(flag + ": expected det, random or prefs, got '" + value + "'");
}

const char* ModeName(ImplementationPolicy::Mode mode) {
  switch (mode) {
    case ImplementationPolicy::Mode::kDeterministic:
      return "deterministic";
    case ImplementationPolicy::Mode::kRandom:
      return "random";
    case ImplementationPolicy::Mode::kPreferences:
      return "preferences";
  }
  return "?";
}

struct EngineRun {
  EngineResult result;
  std::string engine;
  std::optional<TieBreakOrder> tiebreak;
};

EngineRun RunEngine(const Instance& instance, const RolProfile& rols, const Options& o) {
  EngineRun run;
  run.tiebreak = ParseTieBreak(instance, o.tiebreak);
  const bool general =
      o.engine == "general" || (o.engine == "auto" && !instance.simple());
  if (o.engine == "simple") {
    if (!instance.simple()) {
      throw UsageError("--engine simple requires a simple bundle system");
    }
    run.result = RunBundleDaSimple(instance, rols);
    run.engine = "simple";
  } else if (general) {
    if (!run.tiebreak) {
      if (!instance.simple()) {
        throw UsageError("--tiebreak is required for a non-simple bundle system");
      }
      run.tiebreak = TieBreakOrder::Canonical(instance.num_students());
    }
    run.result = RunBundleDaGeneral(instance, rols, *run.tiebreak);
    run.engine = "general";
  } else {
    run.result = RunBundleDaSimple(instance, rols);
    run.engine = "simple";
  }
  return run;
}

std::string TieBreakText(const Instance& instance, const std::optional<TieBreakOrder>& t) {
  if (!t) return "";
  std::string out;
  for (StudentId i : t->order()) out += instance.student_name(i) + ",";
  return out;
}

// Content hash over every input that determines the result.
std::string Digest(const Instance& instance, const RolProfile* rols,
                   const std::vector<std::pair<std::string, std::string>>& extra) {
  std::string bytes = CanonicalDump(InstanceToJson(instance));
  if (rols) bytes += CanonicalDump(RolsToJson(instance, *rols));
  for (const auto& [key, value] : extra) bytes += key + "=" + value + "\n";
  return HexDigest(Fnv1a64(bytes));
}

Json PrefsToJson(const Instance& instance, const SecondStagePreferences& prefs) {
  Json doc = Json::object();
  for (StudentId i : instance.students()) {
    if (!prefs[i.index()]) continue;
    Json list = Json::array();
    for (SchoolId s : *prefs[i.index()]) list.push_back(instance.school(s).name);
    doc[instance.student_name(i)] = std::move(list);
  }
  return doc;
}

struct Implemented {
  StandardMatching matching;
  std::string policy;
  std::vector<std::pair<std::string, std::string>> digest_fields;
};

Implemented ImplementWith(const Instance& instance, const BundleMatching& nu, const Options& o,
                          const std::string& flag, const std::string& value) {
  const ImplementationPolicy::Mode mode = ParseMode(flag, value);
  Implemented out;
  out.policy = ModeName(mode);
  out.digest_fields.emplace_back("policy", out.policy);
  switch (mode) {
    case ImplementationPolicy::Mode::kDeterministic:
      out.matching = Implement(instance, nu, ImplementationPolicy::Deterministic());
      break;
    case ImplementationPolicy::Mode::kRandom:
      out.digest_fields.emplace_back("seed", std::to_string(o.seed));
      out.matching = Implement(instance, nu, ImplementationPolicy::Random(o.seed));
      break;
    case ImplementationPolicy::Mode::kPreferences: {
      if (o.prefs.empty()) throw UsageError(flag + " prefs requires --prefs <file>");
      SecondStagePreferences prefs = LoadPreferences(instance, o.prefs);
      out.digest_fields.emplace_back("prefs", PrefsToJson(instance, prefs).dump());
      out.matching = ImplementWithPreferences(instance, nu, prefs);
      break;
    }
  }
  return out;
}

void Emit(std::ostream& out, const Json& doc) { out << CanonicalDump(doc); }

int CmdValidate(const Options& o, std::ostream& out) {
  auto parsed = ParseInstance(ReadFile(o.instance));
  if (auto* report = std::get_if<ValidationReport>(&parsed)) {
    Emit(out, {{"valid", false}, {"issues", ReportToJson(*report)}});
    return kExitFailure;
  }
  const Instance& instance = std::get<Instance>(parsed);
  Json doc = {{"valid", true},
              {"students", instance.num_students()},
              {"schools", instance.num_schools()},
              {"bundles", instance.num_bundles() - instance.num_schools()},
              {"rol_length", instance.rol_length()},
              {"simple", instance.simple()}};
  Json hierarchies = Json::array();
  for (const SubHierarchy& h : instance.simplicity().hierarchies) {
    Json bundles = Json::array();
    for (BundleId b : h.bundles) bundles.push_back(instance.bundle(b).name);
    Json schools = Json::array();
    for (SchoolId s : h.schools) schools.push_back(instance.school(s).name);
    hierarchies.push_back(
        {{"root", instance.bundle(h.root).name}, {"bundles", bundles}, {"schools", schools}});
  }
  doc["hierarchies"] = std::move(hierarchies);
  if (!o.rols.empty()) {
    auto rols = ParseRols(instance, ReadFile(o.rols));
    if (auto* report = std::get_if<ValidationReport>(&rols)) {
      doc["valid"] = false;
      doc["issues"] = ReportToJson(*report);
      Emit(out, doc);
      return kExitFailure;
    }
  }
  Emit(out, doc);
  return kExitOk;
}

int CmdRunDa(const Options& o, std::ostream& out) {
  const Instance instance = LoadInstance(o.instance);
  const RolProfile rols = LoadRols(instance, o.rols);
  const EngineResult result = RunStandardDa(instance, rols);
  StandardMatching mu(instance.num_students());
  for (StudentId i : instance.students()) {
    if (result.matching[i]) mu[i] = instance.bundle(*result.matching[i]).schools.front();
  }
  const StabilityVerdict verdict = CheckStandardStability(instance, rols, mu);
  Json doc = {{"digest", Digest(instance, &rols, {{"engine", "standard"}})},
              {"engine", "standard"},
              {"bundle_matching", BundleMatchingToJson(instance, result.matching)},
              {"matching", StandardMatchingToJson(instance, mu)},
              {"matching_stability", VerdictToJson(instance, verdict)},
              {"metrics", {{"matched", result.matching.num_matched()},
                           {"rounds", result.trace.rounds}}}};
  Emit(out, doc);
  return o.assert_stable && !verdict.stable() ? kExitFailure : kExitOk;
}

int CmdRunBundleDa(const Options& o, std::ostream& out) {
  const Instance instance = LoadInstance(o.instance);
  const RolProfile rols = LoadRols(instance, o.rols);
  const EngineRun run = RunEngine(instance, rols, o);
  const BundleMatching& nu = run.result.matching;
  const StabilityVerdict verdict = CheckBundleStability(instance, rols, nu);
  std::vector<std::pair<std::string, std::string>> fields = {
      {"engine", run.engine}, {"tiebreak", TieBreakText(instance, run.tiebreak)}};
  Json doc = {{"engine", run.engine},
              {"bundle_matching", BundleMatchingToJson(instance, nu)},
              {"stability", VerdictToJson(instance, verdict)},
              {"metrics", {{"matched", nu.num_matched()}, {"rounds", run.result.trace.rounds}}}};
  bool stable = verdict.stable();
  if (!o.implement.empty()) {
    const Implemented impl = ImplementWith(instance, nu, o, "--implement", o.implement);
    fields.insert(fields.end(), impl.digest_fields.begin(), impl.digest_fields.end());
    const StabilityVerdict standard = CheckStandardStability(instance, rols, impl.matching);
    doc["policy"] = impl.policy;
    doc["matching"] = StandardMatchingToJson(instance, impl.matching);
    doc["matching_stability"] = VerdictToJson(instance, standard);
    stable = stable && standard.stable();
  }
  doc["digest"] = Digest(instance, &rols, fields);
  Emit(out, doc);
  return o.assert_stable && !stable ? kExitFailure : kExitOk;
}

int CmdImplement(const Options& o, std::ostream& out) {
  const Instance instance = LoadInstance(o.instance);
  const MatchingDocument input = LoadMatchingDocument(instance, o.matching);
  const BundleMatching& nu = input.bundle_matching;
  Json doc = {{"bundle_matching", BundleMatchingToJson(instance, nu)}};
  std::vector<std::pair<std::string, std::string>> fields = {
      {"bundle_matching", BundleMatchingToJson(instance, nu).dump()}};
  if (o.enumerate) {
    const ImplementationSet set = EnumerateImplementations(instance, nu);
    Json all = Json::array();
    for (const StandardMatching& mu : set.matchings) {
      all.push_back(StandardMatchingToJson(instance, mu));
    }
    doc["implementations"] = std::move(all);
    doc["truncated"] = set.truncated;
    fields.emplace_back("policy", "enumerate");
  } else {
    const Implemented impl = ImplementWith(instance, nu, o, "--policy", o.policy);
    fields.insert(fields.end(), impl.digest_fields.begin(), impl.digest_fields.end());
    doc["policy"] = impl.policy;
    doc["matching"] = StandardMatchingToJson(instance, impl.matching);
  }
  doc["digest"] = Digest(instance, nullptr, fields);
  Emit(out, doc);
  return kExitOk;
}

// The bundle-matching under audit: from --matching, or the engine outcome.
BundleMatching Subject(const Instance& instance, const RolProfile& rols, const Options& o,
                       std::vector<std::pair<std::string, std::string>>& fields) {
  if (!o.matching.empty()) {
    BundleMatching nu = LoadMatchingDocument(instance, o.matching).bundle_matching;
    fields.emplace_back("bundle_matching", BundleMatchingToJson(instance, nu).dump());
    return nu;
  }
  EngineRun run = RunEngine(instance, rols, o);
  fields.emplace_back("engine", run.engine);
  fields.emplace_back("tiebreak", TieBreakText(instance, run.tiebreak));
  return run.result.matching;
}

int CmdCheckStability(const Options& o, std::ostream& out) {
  const Instance instance = LoadInstance(o.instance);
  const RolProfile rols = LoadRols(instance, o.rols);
  const MatchingDocument input = LoadMatchingDocument(instance, o.matching);
  const StabilityVerdict verdict = CheckBundleStability(instance, rols, input.bundle_matching);
  Json doc = {{"bundle_matching", BundleMatchingToJson(instance, input.bundle_matching)},
              {"stability", VerdictToJson(instance, verdict)}};
  bool stable = verdict.stable();
  std::vector<std::pair<std::string, std::string>> fields = {
      {"bundle_matching", doc["bundle_matching"].dump()}};
  if (input.matching) {
    const StabilityVerdict standard = CheckStandardStability(instance, rols, *input.matching);
    doc["matching"] = StandardMatchingToJson(instance, *input.matching);
    doc["matching_stability"] = VerdictToJson(instance, standard);
    doc["implements"] = Implements(instance, input.bundle_matching, *input.matching);
    fields.emplace_back("matching", doc["matching"].dump());
    stable = stable && standard.stable();
  }
  doc["digest"] = Digest(instance, &rols, fields);
  Emit(out, doc);
  return o.assert_stable && !stable ? kExitFailure : kExitOk;
}

int CmdOracle(const Options& o, bool pusm, std::ostream& out) {
  const Instance instance = LoadInstance(o.instance);
  const RolProfile rols = LoadRols(instance, o.rols);
  std::vector<std::pair<std::string, std::string>> fields;
  const BundleMatching nu = Subject(instance, rols, o, fields);
  const OracleResult result =
      pusm ? OracleParetoUndominatedSizeMaximal(instance, rols, nu, o.oracle_bound)
           : OracleSizeMaximal(instance, rols, nu, o.oracle_bound);
  fields.emplace_back("oracle", pusm ? "pusm" : "size-max");
  Json doc = {{"oracle", pusm ? "pusm" : "size-max"},
              {"bundle_matching", BundleMatchingToJson(instance, nu)},
              {"holds", result.holds},
              {"reason", result.reason},
              {"witness", result.witness ? BundleMatchingToJson(instance, *result.witness)
                                         : Json(nullptr)},
              {"digest", Digest(instance, &rols, fields)}};
  Emit(out, doc);
  return kExitOk;
}

int CmdImprove(const Options& o, std::ostream& out) {
  const Instance instance = LoadInstance(o.instance);
  const RolProfile rols = LoadRols(instance, o.rols);
  std::vector<std::pair<std::string, std::string>> fields;
  const BundleMatching nu = Subject(instance, rols, o, fields);
  const auto better = FindStableParetoImprovement(instance, rols, nu, o.oracle_bound);
  fields.emplace_back("improve", "");
  Json doc = {{"bundle_matching", BundleMatchingToJson(instance, nu)},
              {"stability", VerdictToJson(instance, CheckBundleStability(instance, rols, nu))},
              {"improvement", better ? BundleMatchingToJson(instance, *better) : Json(nullptr)},
              {"digest", Digest(instance, &rols, fields)}};
  Emit(out, doc);
  return kExitOk;
}

int CmdAuditRol(const Options& o, std::ostream& out) {
  const Instance instance = LoadInstance(o.instance);
  const RolProfile rols = LoadRols(instance, o.rols);
  std::optional<std::vector<SchoolId>> indifference;
  if (!o.indifference.empty()) {
    indifference.emplace();
    for (const std::string& name : SplitList(o.indifference)) {
      auto s = instance.FindSchool(name);
      if (!s) throw UsageError("--indifference: unknown school '" + name + "'");
      indifference->push_back(*s);
    }
  }
  std::optional<StudentId> only;
  if (!o.student.empty()) {
    only = instance.FindStudent(o.student);
    if (!only) throw UsageError("--student: unknown student '" + o.student + "'");
  }
  Json students = Json::array();
  int total = 0;
  for (const Rol& rol : rols) {
    if (only && rol.student != *only) continue;
    Json warnings = Json::array();
    for (const RolWarning& w : AuditRolDominance(instance, rol, indifference)) {
      warnings.push_back({{"slot", w.slot},
                          {"bundle", instance.bundle(w.bundle).name},
                          {"related", instance.bundle(w.related).name},
                          {"message", w.message}});
      ++total;
    }
    students.push_back(
        {{"student", instance.student_name(rol.student)}, {"warnings", std::move(warnings)}});
  }
  Emit(out, {{"students", std::move(students)}, {"warnings", total}});
  return kExitOk;
}

int CmdTrace(const Options& o, std::ostream& out) {
  const Instance instance = LoadInstance(o.instance);
  const RolProfile rols = LoadRols(instance, o.rols);
  const EngineRun run = RunEngine(instance, rols, o);
  if (o.format == "csv") {
    out << TraceCsv(instance, run.result.trace);
  } else if (o.format == "text") {
    out << FormatTrace(instance, run.result.trace);
  } else {
    Json doc = TraceToJson(instance, run.result.trace);
    doc["engine"] = run.engine;
    doc["bundle_matching"] = BundleMatchingToJson(instance, run.result.matching);
    Emit(out, doc);
  }
  return kExitOk;
}

int CmdSimulate(const Options& o, std::ostream& out) {
  std::vector<std::pair<std::string, MetricTable>> tables;
  std::vector<std::pair<std::string, std::vector<RoundRecord>>> runs;
  const std::string profile_name =
      o.profile.empty() ? (o.exp == 1 ? "equilibrium" : "truthful") : o.profile;
  std::optional<StrategyProfile> file_profile;
  if (profile_name != "equilibrium" && profile_name != "truthful") {
    file_profile = LoadStrategyProfile(profile_name);
  }
  if (o.exact && o.exp != 1) throw UsageError("--exact is only available for --exp 1");
  if (o.exp == 1) {
    if (profile_name == "truthful") throw UsageError("--exp 1 has no 'truthful' profile");
    std::vector<Exp1Treatment> treatments;
    if (o.treatment == "all") {
      treatments.assign(kExp1Treatments.begin(), kExp1Treatments.end());
    } else if (auto t = ParseExp1Treatment(o.treatment)) {
      treatments.push_back(*t);
    } else {
      throw UsageError("--treatment: unknown treatment '" + o.treatment + "'");
    }
    for (Exp1Treatment t : treatments) {
      const StrategyProfile profile = file_profile ? *file_profile : Exp1EquilibriumProfile(t);
      if (o.exact) {
        tables.emplace_back(Exp1TreatmentName(t),
                            Exp1MetricTable(Exp1ExactExpectation(t, profile)));
        continue;
      }
      SimulationResult r = SimulateExp1(t, profile, o.rounds, o.seed, o.per_round);
      tables.emplace_back(Exp1TreatmentName(t), std::move(r.metrics));
      runs.emplace_back(Exp1TreatmentName(t), std::move(r.per_round));
    }
  } else {
    if (profile_name == "equilibrium") {
      throw UsageError("--exp 2 has no equilibrium profile; use 'truthful' or a profile file");
    }
    std::vector<Exp2Treatment> treatments;
    if (o.treatment == "all") {
      treatments.assign(kExp2Treatments.begin(), kExp2Treatments.end());
    } else if (auto t = ParseExp2Treatment(o.treatment)) {
      treatments.push_back(*t);
    } else {
      throw UsageError("--treatment: unknown treatment '" + o.treatment + "'");
    }
    for (Exp2Treatment t : treatments) {
      const StrategyProfile profile = file_profile ? *file_profile : Exp2TruthfulProfile(t);
      SimulationResult r = SimulateExp2(t, profile, o.rounds, o.seed, o.per_round);
      tables.emplace_back(Exp2TreatmentName(t), std::move(r.metrics));
      runs.emplace_back(Exp2TreatmentName(t), std::move(r.per_round));
    }
  }
  out << (o.per_round ? RoundsCsv(runs) : MetricsCsv(tables));
  return kExitOk;
}

void AddEngineFlags(CLI::App* cmd, Options& o) {
  cmd->add_option("--engine", o.engine, "Bundle-DA variant")
      ->check(CLI::IsMember({"simple", "general", "auto"}))
      ->capture_default_str();
  cmd->add_option("--tiebreak", o.tiebreak,
                  "Comma-separated student ids; required for non-simple systems");
}

}  // namespace

int RunCli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Bundled school choice: validation, bundle-DA, stability audits, experiments"};
  app.name("bundlechoice");
  app.require_subcommand(1);

  auto* validate = app.add_subcommand("validate", "Validate an instance (and optionally ROLs)");
  validate->add_option("instance", o.instance)->required();
  validate->add_option("--rols", o.rols, "ROL document to check against the instance");

  auto* run_da = app.add_subcommand("run-da", "Standard deferred acceptance over schools");
  run_da->add_option("instance", o.instance)->required();
  run_da->add_option("rols", o.rols)->required();
  run_da->add_flag("--assert-stable", o.assert_stable, "Exit 1 if the result is unstable");

  auto* run_bda = app.add_subcommand("run-bundle-da", "Bundle deferred acceptance");
  run_bda->add_option("instance", o.instance)->required();
  run_bda->add_option("rols", o.rols)->required();
  AddEngineFlags(run_bda, o);
  run_bda->add_option("--implement", o.implement, "Implementation policy: det, random or prefs");
  run_bda->add_option("--prefs", o.prefs, "Second-stage preference document");
  run_bda->add_option("--seed", o.seed, "Seed for the random policy");
  run_bda->add_flag("--assert-stable", o.assert_stable, "Exit 1 if the result is unstable");

  auto* implement = app.add_subcommand("implement", "Implement a bundle-matching");
  implement->add_option("instance", o.instance)->required();
  implement->add_option("matching", o.matching)->required();
  implement->add_option("--policy,--implement", o.policy, "det, random or prefs")
      ->capture_default_str();
  implement->add_option("--prefs", o.prefs, "Second-stage preference document");
  implement->add_option("--seed", o.seed, "Seed for the random policy");
  implement->add_flag("--enumerate", o.enumerate, "List every possible implementation");

  auto* check = app.add_subcommand("check-stability", "Audit a matching document");
  check->add_option("instance", o.instance)->required();
  check->add_option("rols", o.rols)->required();
  check->add_option("matching", o.matching)->required();
  check->add_flag("--assert-stable", o.assert_stable, "Exit 1 if any violation is found");

  auto* oracle = app.add_subcommand("oracle", "Brute-force size-maximality oracles");
  oracle->require_subcommand(1);
  std::vector<CLI::App*> oracle_cmds;
  for (const char* name : {"size-max", "pusm"}) {
    auto* cmd = oracle->add_subcommand(name, std::string(name) == "pusm"
                                                 ? "Pareto-undominated size-maximality"
                                                 : "Size-maximality among stable matchings");
    cmd->add_option("instance", o.instance)->required();
    cmd->add_option("rols", o.rols)->required();
    cmd->add_option("matching", o.matching, "Defaults to the bundle-DA outcome");
    AddEngineFlags(cmd, o);
    cmd->add_option("--oracle-bound", o.oracle_bound, "Largest search space explored")
        ->capture_default_str();
    oracle_cmds.push_back(cmd);
  }

  auto* improve = app.add_subcommand("improve", "Search for a stable Pareto improvement");
  improve->add_option("instance", o.instance)->required();
  improve->add_option("rols", o.rols)->required();
  improve->add_option("matching", o.matching, "Defaults to the bundle-DA outcome");
  AddEngineFlags(improve, o);
  improve->add_option("--oracle-bound", o.oracle_bound, "Largest search space explored")
      ->capture_default_str();

  auto* audit = app.add_subcommand("audit-rol", "Flag dominated ROL entries");
  audit->add_option("instance", o.instance)->required();
  audit->add_option("rols", o.rols)->required();
  audit->add_option("--student", o.student, "Audit only this student");
  audit->add_option("--indifference", o.indifference,
                    "Comma-separated schools the student is indifferent between");

  auto* simulate = app.add_subcommand("simulate-experiment", "Monte Carlo experiment metrics");
  simulate->add_option("--exp", o.exp, "Experiment 1 or 2")
      ->required()
      ->check(CLI::IsMember({1, 2}));
  simulate->add_option("--treatment", o.treatment, "Treatment name or 'all'")
      ->capture_default_str();
  simulate->add_option("--profile", o.profile,
                       "'equilibrium' (exp 1), 'truthful' (exp 2) or a profile file");
  simulate->add_option("--rounds", o.rounds, "Group-rounds per treatment")
      ->check(CLI::NonNegativeNumber);
  simulate->add_option("--seed", o.seed, "Base seed");
  simulate->add_flag("--per-round", o.per_round, "Emit one row per round and metric");
  simulate->add_flag("--exact", o.exact, "Exact expectations instead of sampling (exp 1)");

  auto* trace = app.add_subcommand("trace", "Export the bundle-DA event log");
  trace->add_option("instance", o.instance)->required();
  trace->add_option("rols", o.rols)->required();
  AddEngineFlags(trace, o);
  trace->add_option("--format", o.format, "csv, json or text")
      ->check(CLI::IsMember({"csv", "json", "text"}))
      ->capture_default_str();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*validate) return CmdValidate(o, out);
    if (*run_da) return CmdRunDa(o, out);
    if (*run_bda) return CmdRunBundleDa(o, out);
    if (*implement) return CmdImplement(o, out);
    if (*check) return CmdCheckStability(o, out);
    if (*oracle) return CmdOracle(o, oracle_cmds[1]->parsed(), out);
    if (*improve) return CmdImprove(o, out);
    if (*audit) return CmdAuditRol(o, out);
    if (*simulate) return CmdSimulate(o, out);
    if (*trace) return CmdTrace(o, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ValidationError& e) {
    err << e.what();
    return kExitFailure;
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  } catch (const OracleRefusal& e) {
    err << "oracle refused: " << e.what() << "\n";
    return kExitFailure;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace bundlechoice
