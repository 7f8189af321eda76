// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef TTSBF_RNG_HPP
#define TTSBF_RNG_HPP

#include <cstdint>
#include <initializer_list>
#include <random>

namespace ttsbf {

/// Seed domains keep training, evaluation and model-construction streams
/// disjoint even when they share a master seed.
enum class SeedDomain : std::uint64_t {
  kModel = 0x4d4f44454cULL,
  kInit = 0x494e4954ULL,
  kTraining = 0x545241494eULL,
  kEvaluation = 0x4556414cULL,
  kBaseline = 0x42415345ULL,
  kInnovation = 0x494e4e4fULL,
  kGradcheck = 0x47524144ULL,
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Counter-based seed derivation: (master, domain, counters...) -> 64-bit seed.
/// The result depends only on its arguments, never on call order.
inline std::uint64_t derive_seed(std::uint64_t master, SeedDomain domain,
                                 std::initializer_list<std::uint64_t> counters = {}) {
  std::uint64_t h = splitmix64(master ^ splitmix64(static_cast<std::uint64_t>(domain)));
  for (std::uint64_t c : counters) h = splitmix64(h ^ splitmix64(c + 0x632be59bd9b4e019ULL));
  return h;
}

using Rng = std::mt19937_64;

}  // namespace ttsbf

#endif  // TTSBF_RNG_HPP
