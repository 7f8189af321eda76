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

#ifndef TTSBF_EXPERIMENT_HPP
#define TTSBF_EXPERIMENT_HPP

#include "ttsbf/baselines.hpp"
#include "ttsbf/config.hpp"
#include "ttsbf/cssca.hpp"
#include "ttsbf/metrics.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace ttsbf::harness {

struct OverheadReport {
  std::int64_t per_slot_tts = 0;       // MK
  std::int64_t per_slot_icsi = 0;      // NM + NK + MK
  std::int64_t per_interval_tts = 0;   // N
  std::int64_t per_interval_icsi = 0;  // T_s N

  bool operator==(const OverheadReport&) const = default;
};

/// Channel-estimation and phase-signalling counts. K = 0 is allowed.
OverheadReport overhead_report(const channel::SystemDims& dims, std::int64_t slots_per_interval);

/// Fixed (theta, lambda); each held-out slot runs J WMMSE sweeps.
MetricsRecord evaluate_policy(const PhaseVector& theta, const RVec& lambda, const channel::ScsiModel& scsi,
                              const SlotEvaluation& eval, const RVec& rate_targets, int J,
                              const std::string& scheme = kLabelPdd);

struct RunOptions {
  int threads = 1;
  bool timing = false;  // otherwise wall_ms is written as 0
};

SlotEvaluation slot_evaluation(const ExperimentConfig& cfg, std::uint64_t seed, int threads);
baselines::BaselineConfig baseline_config(const ExperimentConfig& cfg, std::uint64_t seed, int threads);

struct PddRun {
  cssca::LongTermResult long_term;
  PhaseVector theta;  // after projection when quantized
  RVec lambda;        // re-optimized when quantized
  MetricsRecord record;
};

/// Long-term optimization, optional phase projection with multiplier
/// re-optimization, then held-out evaluation.
PddRun run_pdd(const ExperimentConfig& cfg, std::uint64_t seed, const RunOptions& opt = {});

/// One scheme on one seed; the label selects the runner.
MetricsRecord run_scheme(const ExperimentConfig& cfg, const std::string& scheme, std::uint64_t seed,
                         const RunOptions& opt = {});

/// Copy of cfg with one sweep coordinate applied.
ExperimentConfig apply_axis(const ExperimentConfig& cfg, SweepAxis axis, double value);

/// "beta=0.8", "N=16", "Q=3", "Q=inf", "delay=5"; "none" without an axis.
std::string axis_label(SweepAxis axis, double value);

struct SweepRow {
  std::string scheme;
  std::string axis;
  std::uint64_t seed = 0;
  MetricsRecord record;
};

struct SweepResult {
  std::vector<SweepRow> rows;  // axis value, then seed, then scheme order
  std::string config_hash;
  int K = 0;
};

/// Cells run concurrently; rows come back in deterministic order.
SweepResult run_sweep(const ExperimentConfig& cfg, const RunOptions& opt = {});

/// Shortest round-trip text for a double; "nan"/"inf" for non-finite.
std::string format_number(double v);

void write_csv_header(std::ostream& os, int K);
void write_csv_row(std::ostream& os, const SweepRow& row, const std::string& config_hash, bool timing);
void write_sweep_csv(std::ostream& os, const SweepResult& result, bool timing);

struct RateTableRow {
  std::string scheme;
  double power_equal_dbm = 0.0;    // median over seeds
  double power_unequal_dbm = 0.0;  // median over seeds
  double diff_db = 0.0;            // 10 log10(P_unequal / P_equal)
};

std::vector<RateTableRow> rate_target_table(const ExperimentConfig& cfg, const RunOptions& opt = {});
void write_rate_table_csv(std::ostream& os, const std::vector<RateTableRow>& rows);

double median(std::vector<double> v);

}  // namespace ttsbf::harness

#endif  // TTSBF_EXPERIMENT_HPP
