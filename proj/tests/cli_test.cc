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

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "bundlechoice/cli.h"
#include "bundlechoice/io.h"
#include "support.h"

using namespace bundlechoice;
using namespace bundlechoice::testing;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run Cli(std::vector<std::string> args) {
  for (std::string& a : args) {
    if (a.size() > 5 && a.ends_with(".json") && a.find('/') == std::string::npos) a = FixturePath(a);
  }
  std::ostringstream out, err;
  const int code = RunCli(args, out, err);
  return {code, out.str(), err.str()};
}

Json Doc(const Run& r) {
  REQUIRE(r.code == kExitOk);
  return Json::parse(r.out);
}

std::string At(const Json& list, const std::string& student, const char* field) {
  for (const Json& e : list) {
    if (e["student"] == student) return e[field].is_null() ? "-" : e[field].get<std::string>();
  }
  return "?";
}

}  // namespace

TEST_CASE("run-bundle-da with deterministic implementation") {
  const Json d = Doc(Cli({"run-bundle-da", "example_4_1.json", "rols_4_1.json", "--implement", "det"}));
  CHECK(d["engine"] == "simple");
  CHECK(At(d["bundle_matching"], "i2", "bundle") == "b1234");
  CHECK(At(d["bundle_matching"], "i4", "bundle") == "-");
  CHECK(At(d["bundle_matching"], "i7", "bundle") == "b56");
  CHECK(At(d["matching"], "i2", "school") == "s2");
  CHECK(At(d["matching"], "i8", "school") == "s4");
  CHECK(At(d["matching"], "i6", "school") == "s7");
  CHECK(At(d["matching"], "i7", "school") == "s6");
}

TEST_CASE("run-da and check-stability") {
  const Json da = Doc(Cli({"run-da", "exp2_nobundle.json", "rols_exp2_nobundle.json"}));
  CHECK(At(da["matching"], "p1", "school") == "D");
  CHECK(At(da["matching"], "p4", "school") == "-");

  const Run unstable = Cli({"check-stability", "remark_3_1.json", "rols_remark_3_1.json",
                            "matching_remark_3_1_both.json"});
  const Json v = Doc(unstable);
  CHECK(v["stability"]["stable"] == false);
  CHECK(v["stability"]["violations"][0]["kind"] == "envy-case-1");
  CHECK(Cli({"check-stability", "remark_3_1.json", "rols_remark_3_1.json",
             "matching_remark_3_1_both.json", "--assert-stable"})
            .code == kExitFailure);
  CHECK(Cli({"check-stability", "remark_3_1.json", "rols_remark_3_1.json",
             "matching_remark_3_1_stable.json", "--assert-stable"})
            .code == kExitOk);
}

TEST_CASE("oracles") {
  const Json pusm = Doc(Cli({"oracle", "pusm", "example_4.json", "rols_4.json"}));
  CHECK(pusm["holds"] == true);
  const Json size = Doc(Cli({"oracle", "size-max", "remark_3_1.json", "rols_remark_3_1.json",
                             "matching_remark_3_1_stable.json"}));
  CHECK(size["holds"] == false);
  CHECK_FALSE(size["witness"].is_null());
  const Run refused = Cli({"oracle", "pusm", "appendix_d.json", "rols_d.json", "--tiebreak",
                           "i1,i2,i3,i4,i5,i6,i7,i8", "--oracle-bound", "1"});
  CHECK(refused.code == kExitFailure);
  CHECK(refused.err.find("oracle refused") != std::string::npos);
}

TEST_CASE("validation failures exit 1 with located issues") {
  const Run r = Cli({"validate", "bad_overlap.json"});
  CHECK(r.code == kExitFailure);
  const Json d = Json::parse(r.out);
  CHECK(d["valid"] == false);
  CHECK(d["issues"][0]["kind"] == "hierarchy");
  CHECK(d["issues"][0]["location"] == "/bundles/1/schools");
  CHECK(Doc(Cli({"validate", "example_4_1.json", "--rols", "rols_4_1.json"}))["valid"] == true);
  CHECK(Cli({"validate", "/nonexistent.json"}).code == kExitFailure);
}

TEST_CASE("usage errors exit 2") {
  CHECK(Cli({}).code == kExitUsage);
  CHECK(Cli({"bogus"}).code == kExitUsage);
  CHECK(Cli({"run-da", "example_4_1.json"}).code == kExitUsage);
  CHECK(Cli({"simulate-experiment", "--exp", "3"}).code == kExitUsage);
  CHECK(Cli({"simulate-experiment", "--exp", "2", "--exact"}).code == kExitUsage);
  CHECK(Cli({"run-bundle-da", "example_4_1.json", "rols_4_1.json", "--implement", "prefs"}).code ==
        kExitUsage);
  CHECK(Cli({"run-bundle-da", "appendix_d.json", "rols_d.json", "--engine", "simple"}).code == kExitUsage);
  CHECK(Cli({"run-bundle-da", "appendix_d.json", "rols_d.json"}).code == kExitUsage);
  CHECK(Cli({"--help"}).code == kExitOk);
}

TEST_CASE("repeated runs are byte-identical") {
  const std::vector<std::vector<std::string>> commands = {
      {"run-bundle-da", "appendix_d.json", "rols_d.json", "--tiebreak", "i8,i7,i6,i5,i4,i3,i2,i1",
       "--implement", "random", "--seed", "7"},
      {"simulate-experiment", "--exp", "1", "--rounds", "300", "--seed", "4"},
      {"simulate-experiment", "--exp", "2", "--rounds", "100", "--seed", "4", "--per-round"},
      {"trace", "example_4_1.json", "rols_4_1.json", "--format", "json"},
  };
  for (const auto& c : commands) {
    const Run a = Cli(c);
    const Run b = Cli(c);
    CHECK(a.code == kExitOk);
    CHECK(a.out == b.out);
    CHECK_FALSE(a.out.empty());
  }
}

TEST_CASE("simulate-experiment output") {
  CHECK(Cli({"simulate-experiment", "--exp", "1", "--rounds", "0"}).out ==
        "treatment,metric,value,std_error\n");
  const Run exact = Cli({"simulate-experiment", "--exp", "1", "--exact", "--treatment", "all"});
  CHECK(exact.out.find("Indiff-Bundle,payoff,70,0") != std::string::npos);
}

TEST_CASE("trace csv has four rounds") {
  const Run r = Cli({"trace", "example_4_1.json", "rols_4_1.json"});
  REQUIRE(r.code == kExitOk);
  std::istringstream lines(r.out);
  std::string line;
  std::getline(lines, line);
  int max_round = 0;
  while (std::getline(lines, line)) max_round = std::max(max_round, std::stoi(line));
  CHECK(max_round == 4);
}

TEST_CASE("installed binary") {
  const char* bin = std::getenv("BC_CLI");
  if (bin == nullptr) return;
  const std::string tmp = "bc_cli_test_out.json";
  const std::string cmd = std::string(bin) + " oracle pusm " + FixturePath("example_4.json") + " " +
                          FixturePath("rols_4.json") + " > " + tmp;
  REQUIRE(std::system(cmd.c_str()) == 0);
  std::ifstream in(tmp);
  std::stringstream s;
  s << in.rdbuf();
  std::remove(tmp.c_str());
  CHECK(s.str() == Cli({"oracle", "pusm", "example_4.json", "rols_4.json"}).out);
}
