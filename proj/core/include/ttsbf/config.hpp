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

#ifndef TTSBF_CONFIG_HPP
#define TTSBF_CONFIG_HPP

#include "ttsbf/channel.hpp"
#include "ttsbf/cssca.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace ttsbf::harness {

inline constexpr const char* kLabelPdd = "PDD-TJAPB";

enum class SweepAxis { kNone, kBeta, kN, kQ, kDelay };

const char* axis_name(SweepAxis axis);
SweepAxis parse_axis(const std::string& name);

struct ExperimentConfig {
  std::string preset = "desk-scale";
  channel::ScenarioConfig scenario;
  RVec rate_targets;

  // Long-term loop
  int batch = 4;
  int short_iters = 5;
  int iterations = 200;
  double tau = 0.01;
  double lambda_cap = 1e6;
  cssca::StepSchedule rho = cssca::default_rho();
  cssca::StepSchedule gamma = cssca::default_gamma();

  // Evaluation
  int eval_slots = 500;
  int slots_per_interval = 2000;  // T_s
  double speed_kmh = 1.0;
  double delay_ms = 0.0;
  std::optional<int> quantize_bits;  // empty: continuous phases

  // Baselines
  double p_ref_dbm = 30.0;
  int ao_rounds = 3;
  int ao_grid = 64;
  int max_retries = 10;

  std::vector<std::string> schemes;
  std::uint64_t seed = 1;
  std::vector<std::uint64_t> seeds;  // sweep seeds; defaults to {seed}

  SweepAxis sweep_axis = SweepAxis::kNone;
  std::vector<double> sweep_values;

  RVec rate_table_equal;
  RVec rate_table_unequal;

  void validate() const;
  cssca::CsscaConfig long_term(std::uint64_t run_seed, int threads) const;
};

/// Known presets: "paper-default", "desk-scale".
ExperimentConfig preset(const std::string& name);
std::vector<std::string> preset_names();

/// JSON text -> config. A "preset" key selects the base; every other key
/// overrides it.
ExperimentConfig config_from_json(const std::string& text);
ExperimentConfig load_config(const std::string& path);
std::string config_to_json(const ExperimentConfig& cfg);

/// FNV-1a over the canonical JSON form, as 16 hex digits.
std::string config_hash(const ExperimentConfig& cfg);

}  // namespace ttsbf::harness

#endif  // TTSBF_CONFIG_HPP
