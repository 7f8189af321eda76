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

#ifndef TTSBF_BASELINES_HPP
#define TTSBF_BASELINES_HPP

#include "ttsbf/channel.hpp"
#include "ttsbf/cssca.hpp"
#include "ttsbf/metrics.hpp"

#include <optional>
#include <utility>
#include <vector>

// Comparison schemes. All of them meet per-slot SINR targets
// gamma_k = 2^R_k - 1 with minimum transmit power; they differ in how the
// IRS phases are chosen.
namespace ttsbf::baselines {

inline constexpr const char* kLabelRandomPhase = "random-phase";
inline constexpr const char* kLabelWsrMax = "TTS-WSRMax";
inline constexpr const char* kLabelAo = "AO-simplified";

/// gamma_k = 2^R_k - 1.
RVec sinr_targets(const RVec& rate_targets);

struct MinPowerOptions {
  int max_iterations = 10000;
  double tolerance = 1e-13;       // relative change of the uplink powers
  double uplink_cap = 1e14;       // in units of the noise power
};

struct MinPowerSolution {
  BeamformerSet w;
  double power = 0.0;
  RVec uplink;  // virtual uplink powers with unit noise; sums to the power
  int iterations = 0;
};

/// min sum ||w_k||^2 s.t. SINR_k >= gamma_k, through the uplink-downlink
/// duality fixed point. nullopt when the targets are not reachable.
std::optional<MinPowerSolution> min_power_beamforming(const std::vector<CVec>& h_eff, const RVec& sigma2,
                                                      const RVec& targets,
                                                      const MinPowerOptions& opts = {});

struct BaselineConfig {
  RVec rate_targets;
  SlotEvaluation eval;
  int max_retries = 10;     // random-phase redraws per slot
  double p_ref_dbm = 30.0;  // reference budget for sum-rate phase training
  int ao_rounds = 3;
  int ao_grid = 64;
  /// Training knobs for the sum-rate phases (batch, iterations, tau,
  /// schedules, seed, threads). Rate targets and lambda are unused.
  cssca::CsscaConfig wsr;
  /// The I-CSI scheme sees CSI this many times staler than the TTS schemes.
  double icsi_delay_factor = 1.0;
  /// Restrict every scheme's phases to 2^bits uniform levels.
  std::optional<int> phase_bits;
};

MetricsRecord baseline_random_phase(const channel::ScsiModel& scsi, const BaselineConfig& config);

struct WsrTrainResult {
  PhaseVector theta;
  std::vector<double> sum_rate_trace;  // accumulator value per iteration
};

/// Long-term phases maximizing E[sum_k r_k] under equal-power matched
/// filtering at p_ref.
WsrTrainResult train_wsr_phases(const channel::ScsiModel& scsi, const BaselineConfig& config);

/// Sum rate and its theta-gradient for equal-power matched filtering.
std::pair<double, RVec> wsr_sample_gradient(const std::vector<CMat>& cascades, const std::vector<CVec>& h_d,
                                            const RVec& sigma2, const PhaseVector& theta, double p_ref_w);

std::pair<PhaseVector, MetricsRecord> baseline_tts_wsrmax(const channel::ScsiModel& scsi,
                                                          const BaselineConfig& config);

struct AoSlotResult {
  bool feasible = false;
  PhaseVector theta;
  BeamformerSet w;
  double power = 0.0;
  std::vector<double> round_powers;  // after each accepted round
};

/// Alternates min-power beamforming with a per-element phase sweep that
/// maximizes min_k SINR_k / gamma_k at fixed w. Power never increases.
AoSlotResult ao_slot(const channel::ChannelSample& sample, const RVec& targets, const PhaseVector& theta0,
                     int rounds, int grid, double p_ref_w, bool discrete = false);

MetricsRecord baseline_icsi_ao(const channel::ScsiModel& scsi, const BaselineConfig& config);

}  // namespace ttsbf::baselines

#endif  // TTSBF_BASELINES_HPP
