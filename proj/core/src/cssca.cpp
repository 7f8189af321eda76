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

#include "ttsbf/cssca.hpp"

#include "ttsbf/parallel.hpp"
#include "ttsbf/rng.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <ostream>

namespace ttsbf::cssca {

double StepSchedule::at(int t) const {
  require(t >= 0, "StepSchedule: t must be >= 0");
  return std::min(1.0, scale / std::pow(offset + t, exponent));
}

std::pair<double, double> step_sizes(int t, const StepSchedule& rho, const StepSchedule& gamma) {
  return {rho.at(t), gamma.at(t)};
}

void CsscaConfig::validate(int N, int K) const {
  require(batch >= 1, "cssca: B must be >= 1");
  require(short_iters >= 1, "cssca: J must be >= 1");
  require(iterations >= 0, "cssca: T_iters must be >= 0");
  require(rate_targets.size() == K, "cssca: one rate target per user");
  require(tau > 0.0, "cssca: tau must be > 0");
  if (taus) require(taus->size() == K + 1 && (taus->array() > 0.0).all(), "cssca: K+1 positive taus");
  require(lambda_cap > 0.0, "cssca: lambda cap must be > 0");
  if (theta_init) require(theta_init->size() == N, "cssca: theta_init has the wrong length");
  if (lambda_init)
    require(lambda_init->size() == K && (lambda_init->array() >= 0.0).all(),
            "cssca: lambda_init must be K nonnegative values");
}

LongTermState LongTermState::initial(const PhaseVector& theta, const RVec& lambda) {
  LongTermState s;
  s.theta = theta;
  s.lambda = lambda;
  const auto N = theta.size(), K = lambda.size();
  s.f = RVec::Zero(K + 1);
  s.g_theta.assign(K + 1, RVec::Zero(N));
  s.g_w.assign(K + 1, RVec::Zero(N));
  s.g_lambda.assign(K + 1, RVec::Zero(K));
  return s;
}

SampleEstimate estimate_sample(const channel::ChannelSample& sample, const PhaseVector& theta,
                               const RVec& lambda, const RVec& rate_targets, int J) {
  auto [sol, tape] = unfold::record_and_solve(sample, theta, lambda, rate_targets, J);
  SampleEstimate e;
  e.power = sol.power;
  e.rates = sol.rates;
  e.power_grad = unfold::vjp_power(tape);
  const int K = static_cast<int>(lambda.size());
  e.rate_grads.reserve(K);
  for (int k = 0; k < K; ++k) e.rate_grads.push_back(unfold::vjp_rate(tape, k));
  return e;
}

void accumulate(LongTermState& state, const std::vector<SampleEstimate>& estimates,
                const RVec& rate_targets, double rho) {
  require(!estimates.empty(), "accumulate: empty batch");
  require(rho > 0.0 && rho <= 1.0, "accumulate: rho must be in (0, 1]");
  const int K = state.K(), N = state.N();
  const double inv_b = 1.0 / static_cast<double>(estimates.size());

  RVec f = RVec::Zero(K + 1);
  std::vector<RVec> gt(K + 1, RVec::Zero(N)), gw(K + 1, RVec::Zero(N)), gl(K + 1, RVec::Zero(K));
  for (const auto& e : estimates) {
    f[0] += e.power;
    gw[0] += e.power_grad.d_theta;
    gl[0] += e.power_grad.d_lambda;
    for (int k = 0; k < K; ++k) {
      // f_k = R_k - r_k, so every rate gradient enters negated.
      f[k + 1] += rate_targets[k] - e.rates[k];
      gt[k + 1] -= e.rate_grads[k].direct_theta;
      gw[k + 1] -= e.rate_grads[k].through_w.d_theta;
      gl[k + 1] -= e.rate_grads[k].through_w.d_lambda;
    }
  }
  state.f = (1.0 - rho) * state.f + rho * inv_b * f;
  for (int k = 0; k <= K; ++k) {
    state.g_theta[k] = (1.0 - rho) * state.g_theta[k] + rho * inv_b * gt[k];
    state.g_w[k] = (1.0 - rho) * state.g_w[k] + rho * inv_b * gw[k];
    state.g_lambda[k] = (1.0 - rho) * state.g_lambda[k] + rho * inv_b * gl[k];
  }
  state.rho = rho;
}

void update_surrogates(LongTermState& state, const std::vector<channel::ChannelSample>& batch,
                       const RVec& rate_targets, int J, double rho, int threads) {
  require(!batch.empty(), "update_surrogates: B must be >= 1");
  std::vector<SampleEstimate> est(batch.size());
  parallel_for(batch.size(), threads, [&](std::size_t j) {
    est[j] = estimate_sample(batch[j], state.theta, state.lambda, rate_targets, J);
  });
  accumulate(state, est, rate_targets, rho);
}

SurrogateSet build_surrogates(const LongTermState& state, const RVec& taus) {
  const int K = state.K();
  require(taus.size() == K + 1, "build_surrogates: K+1 proximal weights");
  SurrogateSet s;
  s.funcs.reserve(K + 1);
  for (int k = 0; k <= K; ++k)
    s.funcs.push_back(qcqp::ProxQuadratic::make(state.f[k], state.g_theta[k] + state.g_w[k],
                                                state.g_lambda[k], taus[k], state.theta, state.lambda));
  return s;
}

qcqp::BoxDomain subproblem_box(const LongTermState& state, double lambda_cap, bool freeze_theta,
                               bool freeze_lambda) {
  const int N = state.N(), K = state.K();
  qcqp::BoxDomain box = qcqp::BoxDomain::phases_and_multipliers(N, K, lambda_cap);
  if (freeze_theta) {
    box.lower.head(N) = state.theta;
    box.upper.head(N) = state.theta;
  }
  if (freeze_lambda) {
    box.lower.tail(K) = state.lambda;
    box.upper.tail(K) = state.lambda;
  }
  return box;
}

namespace {

SubproblemPoint split(const RVec& x, int N) {
  return {x.head(N), x.tail(x.size() - N)};
}

}  // namespace

std::optional<SubproblemPoint> solve_feasible_subproblem(const SurrogateSet& surrogates,
                                                         const qcqp::BoxDomain& box,
                                                         const qcqp::Tolerances& tol) {
  const int N = box.dim() - static_cast<int>(surrogates.funcs.size() - 1);
  const auto res = qcqp::solve_constrained(surrogates.objective(), surrogates.constraints(), box, tol);
  if (const auto* sol = std::get_if<qcqp::ConstrainedSolution>(&res)) return split(sol->x, N);
  return std::nullopt;
}

SubproblemPoint solve_fallback_subproblem(const SurrogateSet& surrogates, const qcqp::BoxDomain& box,
                                          const qcqp::Tolerances& tol) {
  const int N = box.dim() - static_cast<int>(surrogates.funcs.size() - 1);
  if (surrogates.funcs.size() == 1) {
    // No constraints: the gap reduces to the objective's prox step.
    const RVec x = qcqp::inner_argmin(&surrogates.objective(), 1.0, RVec(), {}, box);
    return split(x, N);
  }
  qcqp::Tolerances relaxed = tol;
  relaxed.strict = false;
  return split(qcqp::solve_minimax(surrogates.constraints(), box, relaxed).x, N);
}

void smooth_update(LongTermState& state, const SubproblemPoint& target, double gamma) {
  require(gamma > 0.0 && gamma <= 1.0, "smooth_update: gamma must be in (0, 1]");
  // Increment form keeps frozen blocks (target == current) bit-exact.
  if (gamma == 1.0) {
    state.theta = target.theta;
    state.lambda = target.lambda.cwiseMax(0.0);
  } else {
    state.theta += gamma * (target.theta - state.theta);
    state.lambda = (state.lambda + gamma * (target.lambda - state.lambda)).cwiseMax(0.0);
  }
  state.theta = state.theta.cwiseMax(0.0).cwiseMin(kTwoPi);
  state.gamma = gamma;
}

PhaseVector wrap_phases(const PhaseVector& theta) {
  PhaseVector out(theta.size());
  for (Eigen::Index n = 0; n < theta.size(); ++n) {
    double v = std::fmod(theta[n], kTwoPi);
    if (v < 0.0) v += kTwoPi;
    out[n] = v >= kTwoPi ? 0.0 : v;
  }
  return out;
}

LongTermResult optimize_long_term(const channel::ScsiModel& scsi, const CsscaConfig& config) {
  const int N = scsi.dims().N(), K = scsi.dims().K;
  config.validate(N, K);

  PhaseVector theta0;
  if (config.theta_init) {
    theta0 = *config.theta_init;
  } else {
    Rng rng(derive_seed(config.seed, SeedDomain::kInit));
    std::uniform_real_distribution<double> phase(0.0, kTwoPi);
    theta0.resize(N);
    for (int n = 0; n < N; ++n) theta0[n] = phase(rng);
  }
  const RVec lambda0 = config.lambda_init ? *config.lambda_init : RVec::Ones(K);
  LongTermState state = LongTermState::initial(theta0, lambda0);
  const RVec taus = config.taus ? *config.taus : RVec::Constant(K + 1, config.tau);

  LongTermResult out;
  out.trace.reserve(config.iterations);
  std::vector<channel::ChannelSample> batch(config.batch);
  const auto t_start = std::chrono::steady_clock::now();
  for (int t = 0; t < config.iterations; ++t) {
    const auto [rho, gamma] = step_sizes(t, config.rho, config.gamma);
    state.t = t;
    parallel_for(batch.size(), config.threads, [&](std::size_t j) {
      batch[j] = channel::sample_channel(scsi, derive_seed(config.seed, SeedDomain::kTraining,
                                                           {static_cast<std::uint64_t>(t), j}));
    });
    update_surrogates(state, batch, config.rate_targets, config.short_iters, rho, config.threads);

    const SurrogateSet surr = build_surrogates(state, taus);
    const qcqp::BoxDomain box = subproblem_box(state, config.lambda_cap, config.freeze_theta,
                                               config.freeze_lambda);
    std::optional<SubproblemPoint> target;
    try {
      target = solve_feasible_subproblem(surr, box, config.tolerances);
    } catch (const SolverDiagnostic&) {
      target.reset();
    }
    const bool feasible = target.has_value();
    if (!feasible) target = solve_fallback_subproblem(surr, box, config.tolerances);
    smooth_update(state, *target, gamma);

    TraceRow row;
    row.t = t;
    row.f0 = state.f[0];
    row.fk = state.f.tail(K);
    row.feasible_branch = feasible;
    row.gamma = gamma;
    row.rho = rho;
    row.wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t_start).count();
    out.trace.push_back(std::move(row));
  }
  state.t = config.iterations;
  out.theta = wrap_phases(state.theta);
  out.lambda = state.lambda;
  out.lambda_cap_active = (state.lambda.array() >= config.lambda_cap).any();
  out.final_state = std::move(state);
  return out;
}

void write_trace_csv(std::ostream& os, const std::vector<TraceRow>& trace, bool with_timing) {
  const auto K = trace.empty() ? 0 : trace.front().fk.size();
  os << "t,f0";
  for (Eigen::Index k = 0; k < K; ++k) os << ",f_" << (k + 1);
  os << ",branch,gamma,rho,wall_ms\n";
  const auto old_prec = os.precision(17);
  for (const auto& r : trace) {
    os << r.t << ',' << r.f0;
    for (Eigen::Index k = 0; k < K; ++k) os << ',' << r.fk[k];
    os << ',' << (r.feasible_branch ? "feasible" : "fallback") << ',' << r.gamma << ',' << r.rho << ','
       << (with_timing ? r.wall_ms : 0.0) << '\n';
  }
  os.precision(old_prec);
}

std::string result_json(const LongTermResult& result) {
  nlohmann::json j;
  j["theta"] = std::vector<double>(result.theta.data(), result.theta.data() + result.theta.size());
  j["lambda"] = std::vector<double>(result.lambda.data(), result.lambda.data() + result.lambda.size());
  j["lambda_cap_active"] = result.lambda_cap_active;
  j["iterations"] = static_cast<int>(result.trace.size());
  return j.dump(2);
}

}  // namespace ttsbf::cssca
