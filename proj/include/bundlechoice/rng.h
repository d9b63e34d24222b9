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

#ifndef BUNDLECHOICE_RNG_H_
#define BUNDLECHOICE_RNG_H_

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace bundlechoice {

// Seeded generator with a fixed, platform-independent derivation of every
// draw. The standard distributions are avoided on purpose: their output is
// implementation-defined, and results must match across toolchains.
//
// Contract:
//   engine      std::mt19937_64 seeded with the 64-bit seed
//   Below(n)    rejection sampling on the top of the 64-bit range
//   Uniform()   top 53 bits scaled to [0, 1)
//   Normal()    Box-Muller, both variates used in turn
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t Next() { return engine_(); }

  // Uniform integer in [0, n). n must be positive.
  std::uint64_t Below(std::uint64_t n);

  double Uniform();

  double Normal(double mean, double stddev);

  template <typename T>
  void Shuffle(std::vector<T>& v) {
    for (std::size_t k = v.size(); k > 1; --k) {
      std::swap(v[k - 1], v[Below(k)]);
    }
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

std::uint64_t SplitMix64(std::uint64_t x);

// Independent per-stream seed, e.g. one per simulated round.
std::uint64_t DeriveSeed(std::uint64_t seed, std::uint64_t stream);

}  // namespace bundlechoice

#endif  // BUNDLECHOICE_RNG_H_
