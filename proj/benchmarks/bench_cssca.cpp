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


#include "ttsbf/config.hpp"
#include "ttsbf/cssca.hpp"

#include <benchmark/benchmark.h>

namespace {

using namespace ttsbf;

// One long-term iteration at desk scale: batch estimates, surrogates,
// subproblem, smoothing.
void BM_LongTermIteration(benchmark::State& state) {
  harness::ExperimentConfig cfg = harness::preset("desk-scale");
  const channel::ScsiModel scsi = channel::make_scsi_model(cfg.scenario, 1);
  const cssca::CsscaConfig lt = cfg.long_term(1, 1);
  const int N = scsi.dims().N(), K = scsi.dims().K;
  std::vector<channel::ChannelSample> batch;
  for (int j = 0; j < lt.batch; ++j) batch.push_back(channel::sample_channel(scsi, 100 + j));
  const RVec taus = RVec::Constant(K + 1, lt.tau);
  for (auto _ : state) {
    state.PauseTiming();
    cssca::LongTermState st = cssca::LongTermState::initial(PhaseVector::Constant(N, 1.0), RVec::Constant(K, 0.05));
    state.ResumeTiming();
    const auto [rho, gamma] = cssca::step_sizes(0, lt.rho, lt.gamma);
    cssca::update_surrogates(st, batch, lt.rate_targets, lt.short_iters, rho);
    const cssca::SurrogateSet surr = cssca::build_surrogates(st, taus);
    const qcqp::BoxDomain box = cssca::subproblem_box(st, lt.lambda_cap, false, false);
    auto target = cssca::solve_feasible_subproblem(surr, box);
    if (!target) target = cssca::solve_fallback_subproblem(surr, box);
    cssca::smooth_update(st, *target, gamma);
    benchmark::DoNotOptimize(st.theta.data());
  }
}
BENCHMARK(BM_LongTermIteration);

void BM_FullLongTermLoop(benchmark::State& state) {
  harness::ExperimentConfig cfg = harness::preset("desk-scale");
  cfg.iterations = static_cast<int>(state.range(0));
  const channel::ScsiModel scsi = channel::make_scsi_model(cfg.scenario, 1);
  for (auto _ : state) benchmark::DoNotOptimize(cssca::optimize_long_term(scsi, cfg.long_term(1, 1)).lambda.data());
}
BENCHMARK(BM_FullLongTermLoop)->Arg(50)->Unit(benchmark::kMillisecond);

}  // namespace
