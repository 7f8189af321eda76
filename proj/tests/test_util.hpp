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


#ifndef TTSBF_TESTS_TEST_UTIL_HPP
#define TTSBF_TESTS_TEST_UTIL_HPP

#include "ttsbf/channel.hpp"
#include "ttsbf/rng.hpp"

#include <cmath>
#include <random>
#include <vector>

namespace ttsbf::test {

inline cplx cn(Rng& rng, double var = 1.0) {
  std::normal_distribution<double> g(0.0, std::sqrt(0.5 * var));
  const double re = g(rng);
  return {re, g(rng)};
}

inline CVec random_cvec(Rng& rng, Eigen::Index n, double var = 1.0) {
  CVec v(n);
  for (auto& z : v) z = cn(rng, var);
  return v;
}

inline std::vector<CVec> random_channels(Rng& rng, int K, int M, double var = 1.0) {
  std::vector<CVec> h;
  for (int k = 0; k < K; ++k) h.push_back(random_cvec(rng, M, var));
  return h;
}

inline PhaseVector random_phases(Rng& rng, int N) {
  std::uniform_real_distribution<double> u(0.0, kTwoPi);
  PhaseVector t(N);
  for (auto& x : t) x = u(rng);
  return t;
}

inline RVec random_uniform(Rng& rng, int n, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  RVec v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

/// Rayleigh sample with unit noise.
inline channel::ChannelSample random_sample(Rng& rng, int M, int N, int K) {
  channel::ChannelSample s;
  s.G = CMat(N, M);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < M; ++j) s.G(i, j) = cn(rng);
  for (int k = 0; k < K; ++k) {
    s.h_r.push_back(random_cvec(rng, N));
    s.h_d.push_back(random_cvec(rng, M));
  }
  s.noise_vars = RVec::Ones(K);
  return s;
}

/// Small scenario with pathloss geometry; M=4, Ny=Nz=2, K=2.
inline channel::ScenarioConfig small_scenario(double beta = 0.8) {
  channel::ScenarioConfig sc;
  sc.dims = {4, 2, 2, 2};
  sc.beta_ai = beta;
  sc.beta_iu = beta;
  sc.beta_au = 0.0;
  return sc;
}

}  // namespace ttsbf::test

#endif  // TTSBF_TESTS_TEST_UTIL_HPP
