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

#ifndef BUNDLECHOICE_IO_H_
#define BUNDLECHOICE_IO_H_

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "bundlechoice/engines.h"
#include "bundlechoice/experiment.h"
#include "bundlechoice/implementation.h"
#include "bundlechoice/model.h"
#include "bundlechoice/stability.h"
#include "json.hpp"

namespace bundlechoice {

using Json = nlohmann::json;

// Raised when a file cannot be read.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string ReadFile(const std::string& path);

// Parses JSON text. Syntax errors are reported as a kSyntax issue located at
// "line:column". Duplicate object keys are rejected.
std::variant<Json, ValidationReport> ParseJson(std::string_view text);

// Instance documents:
//   {"students": [...], "rol_length": 2,
//    "schools": [{"id": "s1", "quota": 1, "priority": ["i1", ...]}, ...],
//    "bundles": [{"id": "b1", "schools": ["s1", "s2"], "targets": "all"}]}
// "bundles" may be omitted; "targets" is a student list or "all".
std::variant<RawInstance, ValidationReport> ParseRawInstance(const Json& doc);
std::variant<Instance, ValidationReport> ParseInstance(std::string_view text);
// Throws IoError or ValidationError.
Instance LoadInstance(const std::string& path);

Json InstanceToJson(const Instance& instance);
std::string SerializeInstance(const Instance& instance);

// ROL documents: {"i1": ["b1", "s3"], "i2": [], ...}. Students may be omitted.
std::variant<RolProfile, ValidationReport> ParseRols(const Instance& instance,
                                                     std::string_view text);
RolProfile LoadRols(const Instance& instance, const std::string& path);

Json RolsToJson(const Instance& instance, const RolProfile& rols);

// Second-stage preferences: {"i2": ["s2", "s4"], ...} with school ids.
std::variant<SecondStagePreferences, ValidationReport> ParsePreferences(
    const Instance& instance, std::string_view text);
SecondStagePreferences LoadPreferences(const Instance& instance, const std::string& path);

// Matching documents hold "bundle_matching" and optionally "matching", each
// an array of {"student": id, "bundle"|"school": id or null}. Students left
// out are unmatched.
struct MatchingDocument {
  BundleMatching bundle_matching;
  std::optional<StandardMatching> matching;
};
std::variant<MatchingDocument, ValidationReport> ParseMatchingDocument(const Instance& instance,
                                                                      std::string_view text);
MatchingDocument LoadMatchingDocument(const Instance& instance, const std::string& path);

Json BundleMatchingToJson(const Instance& instance, const BundleMatching& nu);
Json StandardMatchingToJson(const Instance& instance, const StandardMatching& mu);
Json VerdictToJson(const Instance& instance, const StabilityVerdict& verdict);
Json ReportToJson(const ValidationReport& report);
Json TraceToJson(const Instance& instance, const EngineTrace& trace);

// Strategy profiles:
//   {"rules": [{"type": "A", "choices": [{"probability": 1, "rol": ["AB"]}]},
//              {"scores": [1, 80], "choices": [...]}]}
// "type" is "A" or "B"; "scores" is an inclusive range.
std::variant<StrategyProfile, ValidationReport> ParseStrategyProfile(std::string_view text);
StrategyProfile LoadStrategyProfile(const std::string& path);

// 64-bit FNV-1a.
std::uint64_t Fnv1a64(std::string_view bytes);
std::string HexDigest(std::uint64_t value);

// Pretty-printed with sorted keys and a trailing newline.
std::string CanonicalDump(const Json& doc);

// "treatment,metric,value,std_error" rows in table order.
std::string MetricsCsv(const std::vector<std::pair<std::string, MetricTable>>& tables);
// "treatment,round,metric,value" rows.
std::string RoundsCsv(const std::vector<std::pair<std::string, std::vector<RoundRecord>>>& runs);
// "round,step,event,student,bundle,students,remaining" rows, one per event.
std::string TraceCsv(const Instance& instance, const EngineTrace& trace);

}  // namespace bundlechoice

#endif  // BUNDLECHOICE_IO_H_
