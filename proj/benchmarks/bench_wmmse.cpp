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


#include "ttsbf/channel.hpp"
#include "ttsbf/config.hpp"
#include "ttsbf/rng.hpp"
#include "ttsbf/wmmse.hpp"

#include <benchmark/benchmark.h>

namespace {

using namespace ttsbf;

void BM_ShortTermSolve(benchmark::State& state) {
  const int J = static_cast<int>(state.range(0));
  const harness::ExperimentConfig cfg = harness::preset("desk-scale");
  const channel::ScsiModel scsi = channel::make_scsi_model(cfg.scenario, 1);
  const channel::ChannelSample s = channel::sample_channel(scsi, 2);
  Rng rng(3);
  std::uniform_real_distribution<double> ph(0.0, kTwoPi);
  PhaseVector theta(scsi.dims().N());
  for (auto& t : theta) t = ph(rng);
  const wmmse::ShortTermProblem prob{channel::effective_channel(s, theta), RVec::Constant(2, 0.02),
                                     cfg.rate_targets, s.noise_vars};
  for (auto _ : state) benchmark::DoNotOptimize(wmmse::solve_short_term(prob, {J, false}).power);
}
BENCHMARK(BM_ShortTermSolve)->Arg(5)->Arg(20)->Arg(100);

void BM_EffectiveChannel(benchmark::State& state) {
  channel::ScenarioConfig sc = harness::preset("desk-scale").scenario;
  sc.dims.Nz = static_cast<int>(state.range(0)) / sc.dims.Ny;
  const channel::ScsiModel scsi = channel::make_scsi_model(sc, 1);
  const channel::ChannelSample s = channel::sample_channel(scsi, 2);
  const PhaseVector theta = PhaseVector::Constant(scsi.dims().N(), 0.3);
  for (auto _ : state) benchmark::DoNotOptimize(channel::effective_channel(s, theta));
}
BENCHMARK(BM_EffectiveChannel)->Arg(16)->Arg(64);

}  // namespace
