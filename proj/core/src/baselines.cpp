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

#include "ttsbf/baselines.hpp"

#include "ttsbf/parallel.hpp"
#include "ttsbf/quantize.hpp"
#include "ttsbf/rng.hpp"
#include "ttsbf/unfold.hpp"
#include "ttsbf/wmmse.hpp"

#include <cmath>
#include <limits>

namespace ttsbf::baselines {

RVec sinr_targets(const RVec& rate_targets) {
  RVec g(rate_targets.size());
  for (Eigen::Index k = 0; k < g.size(); ++k) g[k] = std::exp2(rate_targets[k]) - 1.0;
  return g;
}

std::optional<MinPowerSolution> min_power_beamforming(const std::vector<CVec>& h_eff, const RVec& sigma2,
                                                      const RVec& targets, const MinPowerOptions& opts) {
  const int K = static_cast<int>(h_eff.size());
  require(K >= 1, "min_power_beamforming: at least one user");
  require(sigma2.size() == K && targets.size() == K, "min_power_beamforming: one target per user");
  require((targets.array() >= 0.0).all(), "min_power_beamforming: targets must be >= 0");
  const auto M = h_eff.front().size();

  MinPowerSolution sol;
  sol.w.assign(K, CVec::Zero(M));
  sol.uplink = RVec::Zero(K);
  std::vector<int> active;
  for (int k = 0; k < K; ++k)
    if (targets[k] > 0.0) active.push_back(k);
  if (active.empty()) return sol;

  // Unit-noise channels.
  std::vector<CVec> hn(K);
  for (int k = 0; k < K; ++k) hn[k] = h_eff[k] / std::sqrt(sigma2[k]);

  auto covariance = [&](const RVec& lam) {
    CMat S = CMat::Identity(M, M);
    for (int k : active) S.noalias() += lam[k] * hn[k] * hn[k].adjoint();
    return S;
  };

  RVec lam = RVec::Zero(K);
  bool converged = false;
  int it = 0;
  for (; it < opts.max_iterations; ++it) {
    const Eigen::LLT<CMat> llt(covariance(lam));
    RVec next = RVec::Zero(K);
    for (int k : active) {
      const double s = std::real(hn[k].dot(llt.solve(hn[k])));
      if (!(s > 0.0)) return std::nullopt;
      next[k] = targets[k] / ((1.0 + targets[k]) * s);
    }
    if (!next.allFinite() || next.sum() > opts.uplink_cap) return std::nullopt;
    const double change = (next - lam).cwiseAbs().maxCoeff();
    lam = next;
    if (change <= opts.tolerance * lam.cwiseAbs().maxCoeff()) {
      converged = true;
      ++it;
      break;
    }
  }
  if (!converged) return std::nullopt;

  // MMSE directions, then downlink powers from the SINR equalities.
  const Eigen::LLT<CMat> llt(covariance(lam));
  std::vector<CVec> v(K);
  for (int k : active) {
    v[k] = llt.solve(hn[k]);
    v[k].normalize();
  }
  const auto A = static_cast<Eigen::Index>(active.size());
  RMat D(A, A);
  for (Eigen::Index a = 0; a < A; ++a) {
    const int k = active[a];
    for (Eigen::Index b = 0; b < A; ++b) {
      const int j = active[b];
      const double c = std::norm(hn[k].dot(v[j]));
      D(a, b) = (a == b) ? c / targets[k] : -c;
    }
  }
  const RVec p = D.partialPivLu().solve(RVec::Ones(A));
  if (!p.allFinite() || (p.array() < 0.0).any()) return std::nullopt;
  for (Eigen::Index a = 0; a < A; ++a) sol.w[active[a]] = std::sqrt(p[a]) * v[active[a]];

  const RVec sinr = wmmse::sinr_and_rate(h_eff, sol.w, sigma2).sinr;
  for (int k : active)
    if (sinr[k] < targets[k] - 1e-6 * std::max(1.0, targets[k])) return std::nullopt;

  sol.power = wmmse::total_power(sol.w);
  sol.uplink = lam;
  sol.iterations = it;
  return sol;
}

namespace {

PhaseVector uniform_phases(int N, std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_real_distribution<double> phase(0.0, kTwoPi);
  PhaseVector th(N);
  for (int n = 0; n < N; ++n) th[n] = phase(rng);
  return th;
}

PhaseVector on_grid(const PhaseVector& theta, const std::optional<int>& bits) {
  return bits ? quantize::project_phases(theta, quantize::DiscreteGrid::with_bits(*bits)) : theta;
}

BeamformerSet equal_power_mf(const std::vector<CVec>& h, double p_ref_w) {
  const double alpha = std::sqrt(p_ref_w / static_cast<double>(h.size()));
  BeamformerSet w;
  w.reserve(h.size());
  for (const auto& hk : h) {
    const double nrm = hk.norm();
    w.push_back(nrm > 0.0 ? CVec(alpha * hk / nrm) : CVec(CVec::Zero(hk.size())));
  }
  return w;
}

}  // namespace

MetricsRecord baseline_random_phase(const channel::ScsiModel& scsi, const BaselineConfig& config) {
  const int N = scsi.dims().N();
  const RVec targets = sinr_targets(config.rate_targets);
  const SlotPolicy policy = [&](const channel::ChannelSample& seen, std::size_t s) {
    SlotDesign d;
    for (int attempt = 0; attempt <= config.max_retries; ++attempt) {
      d.theta = on_grid(uniform_phases(N, derive_seed(config.eval.seed, SeedDomain::kBaseline,
                                                      {s, static_cast<std::uint64_t>(attempt)})),
                        config.phase_bits);
      const auto mp = min_power_beamforming(channel::effective_channel(seen, d.theta), seen.noise_vars, targets);
      if (mp) {
        d.w = mp->w;
        return d;
      }
    }
    d.feasible = false;
    return d;
  };
  return evaluate_slots(scsi, config.eval, policy, kLabelRandomPhase);
}

std::pair<double, RVec> wsr_sample_gradient(const std::vector<CMat>& cascades, const std::vector<CVec>& h_d,
                                            const RVec& sigma2, const PhaseVector& theta, double p_ref_w) {
  const std::vector<CVec> h = channel::effective_channel(cascades, h_d, theta);
  const int K = static_cast<int>(h.size());
  const BeamformerSet w = equal_power_mf(h, p_ref_w);
  const double sum_rate = wmmse::sinr_and_rate(h, w, sigma2).rate.sum();

  const auto M = h.front().size();
  BeamformerSet w_bar(K, CVec::Zero(M));
  std::vector<CVec> h_bar(K, CVec::Zero(M));
  for (int k = 0; k < K; ++k) {
    const unfold::RateCotangent c = unfold::rate_cotangent(h, w, sigma2, k);
    for (int j = 0; j < K; ++j) {
      w_bar[j] += c.w_bar[j];
      h_bar[j] += c.h_bar[j];
    }
  }
  // w_k = alpha h_k / ||h_k||
  const double alpha = std::sqrt(p_ref_w / static_cast<double>(K));
  for (int k = 0; k < K; ++k) {
    const double nrm = h[k].norm();
    if (nrm == 0.0) continue;
    const double proj = std::real(h[k].dot(w_bar[k]));
    h_bar[k] += alpha * (w_bar[k] / nrm - h[k] * (proj / (nrm * nrm * nrm)));
  }
  return {sum_rate, unfold::theta_from_channel_cotangent(cascades, theta, h_bar)};
}

WsrTrainResult train_wsr_phases(const channel::ScsiModel& scsi, const BaselineConfig& config) {
  const cssca::CsscaConfig& c = config.wsr;
  require(c.batch >= 1 && c.iterations >= 0 && c.tau > 0.0, "train_wsr_phases: invalid training config");
  const int N = scsi.dims().N();
  const double p_ref = dbm_to_watts(config.p_ref_dbm);

  WsrTrainResult out;
  PhaseVector theta = c.theta_init ? *c.theta_init : uniform_phases(N, derive_seed(c.seed, SeedDomain::kInit));
  double f0 = 0.0;
  RVec g0 = RVec::Zero(N);
  std::vector<double> vals(c.batch);
  std::vector<RVec> grads(c.batch);
  for (int t = 0; t < c.iterations; ++t) {
    const auto [rho, gamma] = cssca::step_sizes(t, c.rho, c.gamma);
    parallel_for(static_cast<std::size_t>(c.batch), c.threads, [&](std::size_t j) {
      const channel::ChannelSample s = channel::sample_channel(
          scsi, derive_seed(c.seed, SeedDomain::kTraining, {static_cast<std::uint64_t>(t), j}));
      auto [v, g] = wsr_sample_gradient(channel::cascaded_channels(s), s.h_d, s.noise_vars, theta, p_ref);
      vals[j] = v;
      grads[j] = std::move(g);
    });
    double mean_v = 0.0;
    RVec mean_g = RVec::Zero(N);
    for (int j = 0; j < c.batch; ++j) {
      mean_v += vals[j];
      mean_g += grads[j];
    }
    mean_v /= c.batch;
    mean_g /= c.batch;
    // Minimize -sum rate: f0 and its gradient enter negated.
    f0 = (1.0 - rho) * f0 - rho * mean_v;
    g0 = (1.0 - rho) * g0 - rho * mean_g;
    const PhaseVector target = (theta - g0 / (2.0 * c.tau)).cwiseMax(0.0).cwiseMin(kTwoPi);
    theta = (1.0 - gamma) * theta + gamma * target;
    out.sum_rate_trace.push_back(-f0);
  }
  out.theta = cssca::wrap_phases(theta);
  return out;
}

std::pair<PhaseVector, MetricsRecord> baseline_tts_wsrmax(const channel::ScsiModel& scsi,
                                                          const BaselineConfig& config) {
  const PhaseVector theta = on_grid(train_wsr_phases(scsi, config).theta, config.phase_bits);
  const RVec targets = sinr_targets(config.rate_targets);
  const SlotPolicy policy = [&](const channel::ChannelSample& seen, std::size_t) {
    SlotDesign d;
    d.theta = theta;
    const auto mp = min_power_beamforming(channel::effective_channel(seen, theta), seen.noise_vars, targets);
    d.feasible = mp.has_value();
    if (mp) d.w = mp->w;
    return d;
  };
  return {theta, evaluate_slots(scsi, config.eval, policy, kLabelWsrMax)};
}

namespace {

double margin_of(const CMat& g, const RVec& sigma2, const RVec& targets) {
  const auto K = g.rows();
  double m = std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k < K; ++k) {
    if (targets[k] <= 0.0) continue;
    double interf = sigma2[k];
    for (Eigen::Index j = 0; j < K; ++j)
      if (j != k) interf += std::norm(g(k, j));
    m = std::min(m, std::norm(g(k, k)) / interf / targets[k]);
  }
  return m;
}

// One pass over the elements; each keeps its current phase unless another
// value strictly improves the worst normalized SINR at fixed w.
PhaseVector phase_sweep(const std::vector<CMat>& cascades, const std::vector<CVec>& h_d, PhaseVector theta,
                        const BeamformerSet& w, const RVec& sigma2, const RVec& targets, int grid,
                        bool refine) {
  const int K = static_cast<int>(cascades.size());
  const auto N = theta.size();
  std::vector<CVec> h = channel::effective_channel(cascades, h_d, theta);
  CMat a(K, K), b(K, K), g(K, K);
  for (Eigen::Index n = 0; n < N; ++n) {
    const cplx old_phasor = std::polar(1.0, -theta[n]);
    for (int k = 0; k < K; ++k) {
      const CVec base = h[k] - cascades[k].col(n) * old_phasor;
      for (int j = 0; j < K; ++j) {
        a(k, j) = base.dot(w[j]);
        b(k, j) = cascades[k].col(n).dot(w[j]);
      }
    }
    auto margin_at = [&](double th) {
      const cplx e = std::polar(1.0, th);  // conj(e^{-j th})
      g = a + e * b;
      return margin_of(g, sigma2, targets);
    };
    double best_th = theta[n];
    double best = margin_at(best_th);
    const double step = kTwoPi / grid;
    double grid_best_th = best_th;
    double grid_best = best;
    for (int i = 0; i < grid; ++i) {
      const double th = step * i;
      const double m = margin_at(th);
      if (m > grid_best) {
        grid_best = m;
        grid_best_th = th;
      }
    }
    constexpr int kRefine = 16;
    for (int i = -kRefine; refine && i <= kRefine; ++i) {
      double th = grid_best_th + step * i / kRefine;
      th = std::fmod(th + kTwoPi, kTwoPi);
      const double m = margin_at(th);
      if (m > grid_best) {
        grid_best = m;
        grid_best_th = th;
      }
    }
    if (grid_best > best) best_th = grid_best_th;
    if (best_th != theta[n]) {
      const cplx delta = std::polar(1.0, -best_th) - old_phasor;
      for (int k = 0; k < K; ++k) h[k] += cascades[k].col(n) * delta;
      theta[n] = best_th;
    }
  }
  return theta;
}

}  // namespace

AoSlotResult ao_slot(const channel::ChannelSample& sample, const RVec& targets, const PhaseVector& theta0,
                     int rounds, int grid, double p_ref_w, bool discrete) {
  require(rounds >= 0 && grid >= 1, "ao_slot: invalid rounds or grid");
  const std::vector<CMat> casc = channel::cascaded_channels(sample);
  AoSlotResult res;
  res.theta = theta0;
  auto cur = min_power_beamforming(channel::effective_channel(casc, sample.h_d, theta0), sample.noise_vars,
                                   targets);
  if (cur) res.round_powers.push_back(cur->power);
  for (int r = 0; r < rounds; ++r) {
    const BeamformerSet w_fix =
        cur ? cur->w : equal_power_mf(channel::effective_channel(casc, sample.h_d, res.theta), p_ref_w);
    const PhaseVector cand_theta =
        phase_sweep(casc, sample.h_d, res.theta, w_fix, sample.noise_vars, targets, grid, !discrete);
    auto cand = min_power_beamforming(channel::effective_channel(casc, sample.h_d, cand_theta),
                                      sample.noise_vars, targets);
    if (!cand) {
      if (cur) break;  // revert: keep the last accepted design
      res.theta = cand_theta;
      continue;
    }
    if (cur && cand->power > cur->power) break;
    res.theta = cand_theta;
    cur = std::move(cand);
    res.round_powers.push_back(cur->power);
  }
  res.feasible = cur.has_value();
  if (cur) {
    res.w = std::move(cur->w);
    res.power = cur->power;
  }
  return res;
}

MetricsRecord baseline_icsi_ao(const channel::ScsiModel& scsi, const BaselineConfig& config) {
  const int N = scsi.dims().N();
  const RVec targets = sinr_targets(config.rate_targets);
  const double p_ref = dbm_to_watts(config.p_ref_dbm);
  SlotEvaluation eval = config.eval;
  eval.delay.delay_ms *= config.icsi_delay_factor;
  const SlotPolicy policy = [&](const channel::ChannelSample& seen, std::size_t s) {
    const PhaseVector theta0 = on_grid(
        uniform_phases(N, derive_seed(config.eval.seed, SeedDomain::kBaseline, {s, 0xa0ULL})), config.phase_bits);
    const int grid = config.phase_bits ? (1 << *config.phase_bits) : config.ao_grid;
    AoSlotResult r = ao_slot(seen, targets, theta0, config.ao_rounds, grid, p_ref, config.phase_bits.has_value());
    SlotDesign d;
    d.feasible = r.feasible;
    d.theta = std::move(r.theta);
    d.w = std::move(r.w);
    return d;
  };
  return evaluate_slots(scsi, eval, policy, kLabelAo);
}

}  // namespace ttsbf::baselines
