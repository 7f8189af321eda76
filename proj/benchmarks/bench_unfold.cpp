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


#include "ttsbf/gradcheck.hpp"
#include "ttsbf/unfold.hpp"

#include <benchmark/benchmark.h>

namespace {

using namespace ttsbf;

void BM_RecordAndVjp(benchmark::State& state) {
  const int J = static_cast<int>(state.range(0));
  const channel::ChannelSample s = unfold::gradcheck_instance(4, 16, 2, 11);
  const PhaseVector theta = PhaseVector::LinSpaced(16, 0.0, 6.0);
  const RVec lambda = RVec::Constant(2, 0.5);
  const RVec targets = RVec::Constant(2, 3.0);
  for (auto _ : state) {
    const auto [sol, tape] = unfold::record_and_solve(s, theta, lambda, targets, J);
    benchmark::DoNotOptimize(unfold::vjp_power(tape).d_theta.data());
    for (int k = 0; k < 2; ++k) benchmark::DoNotOptimize(unfold::vjp_rate(tape, k).direct_theta.data());
  }
}
BENCHMARK(BM_RecordAndVjp)->Arg(5)->Arg(10);

void BM_VjpOnly(benchmark::State& state) {
  const channel::ChannelSample s = unfold::gradcheck_instance(4, 16, 2, 12);
  const PhaseVector theta = PhaseVector::LinSpaced(16, 0.0, 6.0);
  const auto [sol, tape] = unfold::record_and_solve(s, theta, RVec::Constant(2, 0.5), RVec::Constant(2, 3.0), 5);
  for (auto _ : state) benchmark::DoNotOptimize(unfold::vjp_power(tape).d_lambda.data());
}
BENCHMARK(BM_VjpOnly);

}  // namespace
