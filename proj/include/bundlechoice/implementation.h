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

#ifndef BUNDLECHOICE_IMPLEMENTATION_H_
#define BUNDLECHOICE_IMPLEMENTATION_H_

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "bundlechoice/model.h"

namespace bundlechoice {

// Per student: strict ranking of the schools of the assigned bundle, or
// nullopt for students who need none.
using SecondStagePreferences = std::vector<std::optional<std::vector<SchoolId>>>;

struct ImplementationPolicy {
  enum class Mode { kDeterministic, kRandom, kPreferences };

  Mode mode = Mode::kDeterministic;
  std::uint64_t seed = 0;
  SecondStagePreferences preferences;

  static ImplementationPolicy Deterministic() { return {}; }
  static ImplementationPolicy Random(std::uint64_t seed) {
    return {Mode::kRandom, seed, {}};
  }
  static ImplementationPolicy Preferences(SecondStagePreferences prefs) {
    return {Mode::kPreferences, 0, std::move(prefs)};
  }
};

// Assigns seats bundle by bundle in increasing bundle size. Throws
// std::invalid_argument if `nu` is not a bundle-matching of `instance`.
StandardMatching Implement(const Instance& instance, const BundleMatching& nu,
                           const ImplementationPolicy& policy);

// Within-bundle student-proposing DA over the bundle's remaining seats.
// Throws std::invalid_argument if a bundle-assigned student has no ranking
// or a ranking that is not a permutation of the bundle's schools.
StandardMatching ImplementWithPreferences(const Instance& instance, const BundleMatching& nu,
                                          const SecondStagePreferences& prefs);

struct ImplementationSet {
  std::vector<StandardMatching> matchings;  // Sorted, distinct.
  bool truncated = false;
};

// Every matching the procedure can produce, up to `cap` distinct ones.
ImplementationSet EnumerateImplementations(const Instance& instance, const BundleMatching& nu,
                                           std::size_t cap = 100000);

// Exact outcome distribution of the random policy: every seat permutation
// within every bundle step is equally likely. Sorted by matching.
std::vector<std::pair<StandardMatching, double>> ImplementationDistribution(
    const Instance& instance, const BundleMatching& nu);

}  // namespace bundlechoice

#endif  // BUNDLECHOICE_IMPLEMENTATION_H_
