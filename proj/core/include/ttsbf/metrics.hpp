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

#ifndef TTSBF_METRICS_HPP
#define TTSBF_METRICS_HPP

#include "ttsbf/channel.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace ttsbf {

struct MetricsRecord {
  std::string scheme;
  double power_w = 0.0;    // mean over feasible slots
  double power_dbm = 0.0;  // 10 log10(power in mW)
  RVec avg_rates;          // per user, bits/s/Hz
  double worst_rate = 0.0;
  int slots = 0;
  int infeasible_slots = 0;
  /// Standard error of the mean slot power [W].
  double power_stderr_w = 0.0;
  std::vector<double> slot_powers;  // only when requested
  double wall_ms = 0.0;
};

/// Outdated-CSI model for evaluation: designs use the old sample, rates are
/// measured on the aged one.
struct DelaySpec {
  double delay_ms = 0.0;
  double speed_kmh = 1.0;
};

/// What a scheme decides for one slot from the CSI it sees.
struct SlotDesign {
  bool feasible = true;
  PhaseVector theta;
  BeamformerSet w;
};

using SlotPolicy = std::function<SlotDesign(const channel::ChannelSample& seen, std::size_t slot)>;

struct SlotEvaluation {
  int slots = 500;
  std::uint64_t seed = 1;
  DelaySpec delay;
  int threads = 1;
  bool keep_slot_powers = false;
};

/// Draws slot s from derive_seed(seed, kEvaluation, {s}), applies the delay
/// with an innovation from kInnovation, runs the policy on the seen CSI and
/// scores it on the actual channel. Infeasible slots are counted and left out
/// of the averages.
MetricsRecord evaluate_slots(const channel::ScsiModel& scsi, const SlotEvaluation& eval,
                             const SlotPolicy& policy, const std::string& scheme);

}  // namespace ttsbf

#endif  // TTSBF_METRICS_HPP
