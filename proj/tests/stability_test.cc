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


#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "bundlechoice/engines.h"
#include "bundlechoice/implementation.h"
#include "bundlechoice/io.h"
#include "bundlechoice/stability.h"
#include "support.h"

using namespace bundlechoice;
using namespace bundlechoice::testing;

namespace {

bool HasKind(const StabilityVerdict& v, ViolationKind kind) {
  for (const Violation& x : v.violations) {
    if (x.kind == kind) return true;
  }
  return false;
}

}  // namespace

TEST_CASE("section 4.1 outcome and its implementations are stable") {
  const Instance inst = LoadFixture("example_4_1.json");
  const RolProfile rols = LoadFixtureRols(inst, "rols_4_1.json");
  const BundleMatching nu = RunBundleDaSimple(inst, rols).matching;
  CHECK(CheckBundleStability(inst, rols, nu).stable());
  CHECK(ReferenceBundleStable(inst, rols, nu));
  for (const StandardMatching& mu : EnumerateImplementations(inst, nu).matchings) {
    CHECK(CheckStandardStability(inst, rols, mu).stable());
    CHECK(ReferenceStandardStable(inst, rols, mu));
  }
  CHECK(OracleSizeMaximal(inst, rols, nu).holds);
  CHECK(OracleParetoUndominatedSizeMaximal(inst, rols, nu).holds);
  CHECK_FALSE(FindStableParetoImprovement(inst, rols, nu).has_value());
}

TEST_CASE("each violation kind is detected") {
  const Instance inst = LoadFixture("example_4_1.json");
  const RolProfile rols = LoadFixtureRols(inst, "rols_4_1.json");
  const BundleMatching nu = RunBundleDaSimple(inst, rols).matching;
  const StudentId i4 = *inst.FindStudent("i4");

  SUBCASE("unreported bundle") {
    BundleMatching bad = nu;
    bad[i4] = *inst.FindBundle("s6");
    CHECK(HasKind(CheckBundleStability(inst, rols, bad), ViolationKind::kIndividualRationality));
    CHECK_FALSE(ReferenceBundleStable(inst, rols, bad));
  }
  SUBCASE("waste") {
    BundleMatching bad = nu;
    bad[*inst.FindStudent("i5")] = std::nullopt;
    // i4 reports s5 second and s5 is now empty.
    CHECK(HasKind(CheckBundleStability(inst, rols, bad), ViolationKind::kWaste));
    CHECK_FALSE(ReferenceBundleStable(inst, rols, bad));
  }
  SUBCASE("envy towards the holder of the same bundle") {
    BundleMatching bad = nu;
    bad[*inst.FindStudent("i1")] = std::nullopt;
    bad[i4] = *inst.FindBundle("s1");
    const StabilityVerdict v = CheckBundleStability(inst, rols, bad);
    CHECK_FALSE(v.stable());
    CHECK_FALSE(ReferenceBundleStable(inst, rols, bad));
  }
}

TEST_CASE("case 2 and case 3 envy") {
  RawInstance raw;
  raw.students = {"a", "b"};
  raw.rol_length = 1;
  raw.schools = {{"s1", 1, {"a", "b"}}, {"s2", 1, {"a", "b"}}};
  raw.bundles = {{"b12", {"s1", "s2"}, std::nullopt}};
  const Instance inst = BuildInstance(raw);
  SUBCASE("sub-bundle holder") {
    const RolProfile rols = BuildRols(inst, {{"a", {"b12"}}, {"b", {"s1"}}});
    // s2 free but b12 full: a holds nothing, b holds s1 and b12 has quota 2.
    BundleMatching nu(2);
    nu[StudentId(1)] = *inst.FindBundle("s1");
    const StabilityVerdict v = CheckBundleStability(inst, rols, nu);
    CHECK(HasKind(v, ViolationKind::kWaste));
    CHECK_FALSE(ReferenceBundleStable(inst, rols, nu));
  }
  SUBCASE("sup-bundle holder with room") {
    raw.schools[1].quota = 1;
    raw.schools[0].quota = 1;
    const RolProfile rols = BuildRols(inst, {{"a", {"s1"}}, {"b", {"b12"}}});
    BundleMatching nu(2);
    nu[StudentId(1)] = *inst.FindBundle("b12");
    nu[StudentId(0)] = std::nullopt;
    const StabilityVerdict v = CheckBundleStability(inst, rols, nu);
    CHECK_FALSE(v.stable());
    CHECK(HasKind(v, ViolationKind::kWaste));
    CHECK_FALSE(ReferenceBundleStable(inst, rols, nu));
  }
}

TEST_CASE("sub-bundle envy needs priority on every school of the held bundle") {
  RawInstance raw;
  raw.students = {"a", "b", "c"};
  raw.rol_length = 1;
  raw.schools = {{"s1", 1, {"a", "b", "c"}}, {"s2", 1, {"a", "b", "c"}}, {"s3", 1, {"c", "b", "a"}}};
  raw.bundles = {{"b12", {"s1", "s2"}, std::nullopt}};
  const Instance inst = BuildInstance(raw);
  const RolProfile rols = BuildRols(inst, {{"a", {"b12"}}, {"b", {"s1"}}, {"c", {"s2"}}});
  BundleMatching nu(3);
  nu[StudentId(1)] = *inst.FindBundle("s1");
  nu[StudentId(2)] = *inst.FindBundle("s2");
  const StabilityVerdict v = CheckBundleStability(inst, rols, nu);
  CHECK(HasKind(v, ViolationKind::kEnvyCase2));
  CHECK_FALSE(ReferenceBundleStable(inst, rols, nu));
  const auto pairs = EnvyPairs(v);
  CHECK(pairs.size() == 2);
}

TEST_CASE("sup-bundle envy is blocked by a full intermediate bundle") {
  RawInstance raw;
  raw.students = {"a", "b", "c"};
  raw.rol_length = 1;
  const std::vector<std::string> p = {"a", "b", "c"};
  raw.schools = {{"s1", 1, p}, {"s2", 1, p}, {"s3", 1, p}};
  raw.bundles = {{"b123", {"s1", "s2", "s3"}, std::nullopt}, {"b12", {"s1", "s2"}, std::nullopt}};
  const Instance inst = BuildInstance(raw);
  // c holds the big bundle and b12 has room, so c could end up in s1.
  const RolProfile rols = BuildRols(inst, {{"a", {"s1"}}, {"b", {"b12"}}, {"c", {"b123"}}});
  BundleMatching nu(3);
  nu[StudentId(1)] = *inst.FindBundle("b12");
  nu[StudentId(2)] = *inst.FindBundle("b123");
  const StabilityVerdict v = CheckBundleStability(inst, rols, nu);
  CHECK(HasKind(v, ViolationKind::kEnvyCase3));
  CHECK_FALSE(ReferenceBundleStable(inst, rols, nu));

  // Filling b12 with a second holder blocks the case-3 claim against c.
  RawInstance raw2 = raw;
  raw2.students = {"a", "b", "c", "d"};
  for (auto& s : raw2.schools) s.priority = {"a", "b", "c", "d"};
  raw2.schools[2].quota = 2;
  const Instance inst2 = BuildInstance(raw2);
  const RolProfile rols2 =
      BuildRols(inst2, {{"a", {"s1"}}, {"b", {"b12"}}, {"c", {"b123"}}, {"d", {"b12"}}});
  BundleMatching nu2(4);
  nu2[StudentId(1)] = *inst2.FindBundle("b12");
  nu2[StudentId(3)] = *inst2.FindBundle("b12");
  nu2[StudentId(2)] = *inst2.FindBundle("b123");
  const StabilityVerdict v2 = CheckBundleStability(inst2, rols2, nu2);
  for (const Violation& x : v2.violations) {
    CHECK_FALSE((x.kind == ViolationKind::kEnvyCase3 && x.other == StudentId(2)));
  }
  CHECK(v2.stable() == ReferenceBundleStable(inst2, rols2, nu2));
}

TEST_CASE("two-school remark: stable but not size-maximal") {
  const Instance inst = LoadFixture("remark_3_1.json");
  const RolProfile rols = LoadFixtureRols(inst, "rols_remark_3_1.json");
  const MatchingDocument stable = LoadMatchingDocument(inst, FixturePath("matching_remark_3_1_stable.json"));
  const MatchingDocument both = LoadMatchingDocument(inst, FixturePath("matching_remark_3_1_both.json"));
  CHECK(CheckBundleStability(inst, rols, stable.bundle_matching).stable());
  CHECK(ReferenceBundleStable(inst, rols, stable.bundle_matching));
  const OracleResult size = OracleSizeMaximal(inst, rols, stable.bundle_matching);
  CHECK_FALSE(size.holds);
  REQUIRE(size.witness.has_value());
  CHECK(*size.witness == both.bundle_matching);
  CHECK_FALSE(ReferenceSizeMaximal(inst, rols, stable.bundle_matching));
  CHECK(OracleParetoUndominatedSizeMaximal(inst, rols, stable.bundle_matching).holds);
  CHECK(ReferencePusm(inst, rols, stable.bundle_matching));

  const StabilityVerdict v = CheckBundleStability(inst, rols, both.bundle_matching);
  CHECK(HasKind(v, ViolationKind::kEnvyCase1));
  CHECK_FALSE(ReferenceBundleStable(inst, rols, both.bundle_matching));
  CHECK(OracleSizeMaximal(inst, rols, both.bundle_matching).holds);
}

TEST_CASE("two-seat example: the outcome and the swapped matching") {
  const Instance inst = LoadFixture("example_4.json");
  const RolProfile rols = LoadFixtureRols(inst, "rols_4.json");
  const BundleMatching nu = RunBundleDaSimple(inst, rols).matching;
  CHECK(CheckBundleStability(inst, rols, nu).stable());
  CHECK(OracleParetoUndominatedSizeMaximal(inst, rols, nu).holds);
  CHECK(OracleSizeMaximal(inst, rols, nu).holds);

  // i3 and i5 swap: i3 lands in s1, which it only reported through b12.
  const BundleMatching literal = NamedBundleMatching(
      inst, {{"i1", "s1"}, {"i2", "b12"}, {"i3", "s1"}, {"i4", "s4"}, {"i5", "s3"}});
  const StabilityVerdict lv = CheckBundleStability(inst, rols, literal);
  CHECK(HasKind(lv, ViolationKind::kIndividualRationality));
  CHECK_FALSE(ReferenceBundleStable(inst, rols, literal));

  // Read as a b12 admission, i4 (who reports s2) outranks i3 at s2.
  const BundleMatching as_bundle = NamedBundleMatching(
      inst, {{"i1", "s1"}, {"i2", "b12"}, {"i3", "b12"}, {"i4", "s4"}, {"i5", "s3"}});
  const StabilityVerdict bv = CheckBundleStability(inst, rols, as_bundle);
  CHECK(HasKind(bv, ViolationKind::kEnvyCase3));
  CHECK_FALSE(ReferenceBundleStable(inst, rols, as_bundle));
  CHECK_FALSE(FindStableParetoImprovement(inst, rols, nu).has_value());

  // The implemented swap is a stable standard matching.
  const StandardMatching mu = NamedMatching(
      inst, {{"i1", "s1"}, {"i2", "s2"}, {"i3", "s1"}, {"i4", "s4"}, {"i5", "s3"}});
  CHECK(CheckStandardStability(inst, rols, mu).stable());
  CHECK(ReferenceStandardStable(inst, rols, mu));
}

TEST_CASE("improvement search finds a stable Pareto improvement when one exists") {
  // Both students prefer the other's school; swapping is stable because the
  // priorities favour each student at the school it wants.
  RawInstance raw;
  raw.students = {"a", "b"};
  raw.rol_length = 2;
  raw.schools = {{"s1", 1, {"b", "a"}}, {"s2", 1, {"a", "b"}}};
  const Instance inst = BuildInstance(raw);
  const RolProfile rols = BuildRols(inst, {{"a", {"s2", "s1"}}, {"b", {"s1", "s2"}}});
  const BundleMatching nu = NamedBundleMatching(inst, {{"a", "s1"}, {"b", "s2"}});
  const auto better = FindStableParetoImprovement(inst, rols, nu);
  REQUIRE(better.has_value());
  CHECK(*better == NamedBundleMatching(inst, {{"a", "s2"}, {"b", "s1"}}));
}

TEST_CASE("oracle refuses oversized searches") {
  const Instance inst = LoadFixture("example_4_1.json");
  const RolProfile rols = LoadFixtureRols(inst, "rols_4_1.json");
  const BundleMatching nu = RunBundleDaSimple(inst, rols).matching;
  CHECK(SearchSpace(rols) == 6561);
  CHECK_THROWS_AS(OracleSizeMaximal(inst, rols, nu, 100), OracleRefusal);
  CHECK_NOTHROW(OracleSizeMaximal(inst, rols, nu, 6561));
}

TEST_CASE("library checks agree with the reference definitions on random matchings") {
  int stable_seen = 0;
  for (std::uint64_t seed = 1; seed <= 200; ++seed) {
    const RandomMarket m = RandomMarketFor(seed, seed % 2 == 0);
    const auto all = AllRationalMatchings(m.instance, m.rols);
    for (const BundleMatching& nu : all) {
      const bool lib = CheckBundleStability(m.instance, m.rols, nu).stable();
      REQUIRE_MESSAGE(lib == ReferenceBundleStable(m.instance, m.rols, nu),
                      "seed " << seed << " " << Describe(m.instance, nu));
      if (lib) ++stable_seen;
      if (SearchSpace(m.rols) <= 2000) {
        REQUIRE(OracleSizeMaximal(m.instance, m.rols, nu).holds ==
                ReferenceSizeMaximal(m.instance, m.rols, nu));
        REQUIRE(OracleParetoUndominatedSizeMaximal(m.instance, m.rols, nu).holds ==
                ReferencePusm(m.instance, m.rols, nu));
      }
    }
    for (const BundleMatching& nu : all) {
      for (const StandardMatching& mu : ReferenceImplementations(m.instance, nu)) {
        REQUIRE(CheckStandardStability(m.instance, m.rols, mu).stable() ==
                ReferenceStandardStable(m.instance, m.rols, mu));
      }
    }
  }
  CHECK(stable_seen > 200);
}

TEST_CASE("ROL audit") {
  const Instance inst = LoadFixture("example_4_1.json");
  const StudentId i2 = *inst.FindStudent("i2");
  Rol rol{i2, {*inst.FindBundle("b1234"), *inst.FindBundle("b12")}};
  const auto warnings = AuditRolDominance(inst, rol);
  REQUIRE(warnings.size() == 1);
  CHECK(warnings.front().slot == 2);
  CHECK(warnings.front().bundle == *inst.FindBundle("b12"));
  CHECK(warnings.front().related == *inst.FindBundle("b1234"));

  Rol good{i2, {*inst.FindBundle("b12"), *inst.FindBundle("b1234")}};
  CHECK(AuditRolDominance(inst, good).empty());

  // Indifferent over s1..s4 but reporting only b12.
  Rol narrow{i2, {*inst.FindBundle("b12")}};
  std::vector<SchoolId> indiff;
  for (const char* s : {"s1", "s2", "s3", "s4"}) indiff.push_back(*inst.FindSchool(s));
  CHECK_FALSE(AuditRolDominance(inst, narrow, indiff).empty());
}
