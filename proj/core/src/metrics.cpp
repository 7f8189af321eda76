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

#include "ttsbf/metrics.hpp"

#include "ttsbf/parallel.hpp"
#include "ttsbf/rng.hpp"
#include "ttsbf/wmmse.hpp"

#include <chrono>
#include <cmath>
#include <limits>

namespace ttsbf {

MetricsRecord evaluate_slots(const channel::ScsiModel& scsi, const SlotEvaluation& eval,
                             const SlotPolicy& policy, const std::string& scheme) {
  require(eval.slots >= 1, "evaluate_slots: at least one slot");
  require(eval.delay.delay_ms >= 0.0, "evaluate_slots: delay must be >= 0");
  const auto t0 = std::chrono::steady_clock::now();
  const int K = scsi.dims().K;

  struct Slot {
    bool feasible = false;
    double power = 0.0;
    RVec rates;
  };
  std::vector<Slot> out(eval.slots);
  parallel_for(out.size(), eval.threads, [&](std::size_t s) {
    const channel::ChannelSample seen =
        channel::sample_channel(scsi, derive_seed(eval.seed, SeedDomain::kEvaluation, {s}));
    channel::ChannelSample actual = seen;
    if (eval.delay.delay_ms > 0.0) {
      const channel::ChannelSample innov =
          channel::sample_channel(scsi, derive_seed(eval.seed, SeedDomain::kInnovation, {s}));
      actual = channel::apply_csi_delay(seen, innov, eval.delay.delay_ms, eval.delay.speed_kmh,
                                        scsi.pathloss().fc);
    }
    const SlotDesign d = policy(seen, s);
    if (!d.feasible) return;
    out[s].feasible = true;
    out[s].power = wmmse::total_power(d.w);
    out[s].rates = wmmse::sinr_and_rate(d.theta, d.w, actual).rate;
  });

  MetricsRecord m;
  m.scheme = scheme;
  m.slots = eval.slots;
  m.avg_rates = RVec::Zero(K);
  double p_sum = 0.0, p_sq = 0.0;
  int n = 0;
  for (const auto& s : out) {
    if (!s.feasible) {
      ++m.infeasible_slots;
      continue;
    }
    ++n;
    p_sum += s.power;
    p_sq += s.power * s.power;
    m.avg_rates += s.rates;
    if (eval.keep_slot_powers) m.slot_powers.push_back(s.power);
  }
  if (n > 0) {
    m.power_w = p_sum / n;
    m.avg_rates /= n;
    const double var = n > 1 ? std::max(0.0, (p_sq - n * m.power_w * m.power_w) / (n - 1)) : 0.0;
    m.power_stderr_w = std::sqrt(var / n);
  } else {
    m.power_w = std::numeric_limits<double>::quiet_NaN();
    m.avg_rates.setConstant(std::numeric_limits<double>::quiet_NaN());
  }
  m.power_dbm = watts_to_dbm(m.power_w);
  m.worst_rate = m.avg_rates.minCoeff();
  m.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return m;
}

}  // namespace ttsbf
