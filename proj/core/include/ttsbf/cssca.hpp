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

#ifndef TTSBF_CSSCA_HPP
#define TTSBF_CSSCA_HPP

#include "ttsbf/channel.hpp"
#include "ttsbf/qcqp.hpp"
#include "ttsbf/unfold.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

// Long-term loop over (theta, lambda). Each iteration averages the
// mini-batch power, rate gaps R_k - r_k and their gradients into recursive
// accumulators, minimizes strongly convex surrogates built from them, and
// moves a step gamma_t toward the surrogate solution.
namespace ttsbf::cssca {

/// min(1, scale / (offset + t)^exponent).
struct StepSchedule {
  double scale = 2.0;
  double offset = 2.0;
  double exponent = 1.0;

  double at(int t) const;
};

inline StepSchedule default_rho() { return {2.0, 2.0, 0.9}; }
inline StepSchedule default_gamma() { return {2.0, 2.0, 1.0}; }

std::pair<double, double> step_sizes(int t, const StepSchedule& rho, const StepSchedule& gamma);

struct CsscaConfig {
  int batch = 10;        // B
  int short_iters = 10;  // J
  int iterations = 200;  // T_iters
  RVec rate_targets;     // R_k [bits/s/Hz]
  double tau = 0.01;
  /// Per-function proximal weights (objective first); overrides tau when set.
  std::optional<RVec> taus;
  double lambda_cap = 1e6;
  StepSchedule rho = default_rho();
  StepSchedule gamma = default_gamma();
  std::uint64_t seed = 1;
  int threads = 1;
  std::optional<PhaseVector> theta_init;  // default: uniform in [0, 2pi)
  std::optional<RVec> lambda_init;        // default: all ones
  bool freeze_theta = false;
  bool freeze_lambda = false;
  qcqp::Tolerances tolerances;

  void validate(int N, int K) const;
};

struct LongTermState {
  PhaseVector theta;
  RVec lambda;
  RVec f;                        // f[0] power, f[k] rate gaps
  std::vector<RVec> g_theta;     // direct theta part; g_theta[0] stays zero
  std::vector<RVec> g_w;         // theta part through w^J
  std::vector<RVec> g_lambda;    // lambda part through w^J
  int t = 0;
  double rho = 0.0;
  double gamma = 0.0;

  static LongTermState initial(const PhaseVector& theta, const RVec& lambda);
  int N() const { return static_cast<int>(theta.size()); }
  int K() const { return static_cast<int>(lambda.size()); }
};

/// Per-sample quantities from one unfolded solve.
struct SampleEstimate {
  double power = 0.0;
  RVec rates;
  unfold::GradientBundle power_grad;
  std::vector<unfold::RateGradient> rate_grads;
};

SampleEstimate estimate_sample(const channel::ChannelSample& sample, const PhaseVector& theta,
                               const RVec& lambda, const RVec& rate_targets, int J);

/// Averages the batch and mixes it into the accumulators with weight rho.
void update_surrogates(LongTermState& state, const std::vector<channel::ChannelSample>& batch,
                       const RVec& rate_targets, int J, double rho, int threads = 1);

/// Same update from precomputed per-sample estimates (order matters only
/// through floating-point summation, which is fixed to index order).
void accumulate(LongTermState& state, const std::vector<SampleEstimate>& estimates,
                const RVec& rate_targets, double rho);

struct SurrogateSet {
  std::vector<qcqp::ProxQuadratic> funcs;  // [0] objective, [1..K] constraints

  const qcqp::ProxQuadratic& objective() const { return funcs.front(); }
  std::vector<qcqp::ProxQuadratic> constraints() const {
    return {funcs.begin() + 1, funcs.end()};
  }
};

/// Surrogates expanded at the state's (theta^t, lambda^t).
SurrogateSet build_surrogates(const LongTermState& state, const RVec& taus);

/// [0, 2pi]^N x [0, cap]^K, with frozen blocks pinned to the current value.
qcqp::BoxDomain subproblem_box(const LongTermState& state, double lambda_cap, bool freeze_theta,
                               bool freeze_lambda);

struct SubproblemPoint {
  PhaseVector theta;
  RVec lambda;
};

/// min f_0 s.t. f_k <= 0; nullopt when infeasible.
std::optional<SubproblemPoint> solve_feasible_subproblem(const SurrogateSet& surrogates,
                                                         const qcqp::BoxDomain& box,
                                                         const qcqp::Tolerances& tol = {});

/// min max_k f_k over the box.
SubproblemPoint solve_fallback_subproblem(const SurrogateSet& surrogates, const qcqp::BoxDomain& box,
                                          const qcqp::Tolerances& tol = {});

/// theta <- (1 - gamma) theta + gamma theta_bar, same for lambda.
void smooth_update(LongTermState& state, const SubproblemPoint& target, double gamma);

/// Phases in [0, 2pi) with 2pi mapped to 0.
PhaseVector wrap_phases(const PhaseVector& theta);

struct TraceRow {
  int t = 0;
  double f0 = 0.0;
  RVec fk;
  bool feasible_branch = true;
  double gamma = 0.0;
  double rho = 0.0;
  double wall_ms = 0.0;
};

struct LongTermResult {
  PhaseVector theta;  // wrapped into [0, 2pi)
  RVec lambda;
  std::vector<TraceRow> trace;
  LongTermState final_state;
  /// True if some lambda_k sat at the cap after the last iteration.
  bool lambda_cap_active = false;
};

/// Runs config.iterations CSSCA steps. Batch j of iteration t is drawn from
/// derive_seed(config.seed, kTraining, {t, j}).
LongTermResult optimize_long_term(const channel::ScsiModel& scsi, const CsscaConfig& config);

/// Header: t,f0,f_1..f_K,branch,gamma,rho,wall_ms.
void write_trace_csv(std::ostream& os, const std::vector<TraceRow>& trace, bool with_timing);

/// {"theta": [...], "lambda": [...]} with round-trip precision.
std::string result_json(const LongTermResult& result);

}  // namespace ttsbf::cssca

#endif  // TTSBF_CSSCA_HPP
