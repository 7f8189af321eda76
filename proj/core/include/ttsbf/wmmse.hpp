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

#ifndef TTSBF_WMMSE_HPP
#define TTSBF_WMMSE_HPP

#include "ttsbf/channel.hpp"
#include "ttsbf/types.hpp"

#include <optional>
#include <string>
#include <vector>

// Short-term active beamforming. For fixed phases and multipliers the
// per-slot problem is
//
//   min_w  sum_k ||w_k||^2 + sum_k lambda_k (R_k - r_k(w)),   r_k in bits/s/Hz,
//
// solved by block-coordinate descent on its weighted-MSE form
//
//   min_{w,u,q}  sum_k ||w_k||^2 + sum_k lambda'_k (q_k e_k - ln q_k),
//
// with lambda'_k = lambda_k / ln 2 so that both forms share stationary points
// when rates are measured in bits.
namespace ttsbf::wmmse {

struct ShortTermProblem {
  std::vector<CVec> h_eff;  // K effective channels of length M
  RVec lambda;              // >= 0
  RVec rate_targets;        // R_k [bits/s/Hz]
  RVec sigma2;              // > 0 [W]

  int K() const { return static_cast<int>(h_eff.size()); }
  int M() const { return h_eff.empty() ? 0 : static_cast<int>(h_eff.front().size()); }
  void validate() const;
  /// lambda_k / ln 2: the weight that multiplies the natural-log MSE terms.
  RVec mse_weights() const { return lambda / kLn2; }
};

struct SinrRate {
  RVec sinr;
  RVec rate;  // log2(1 + sinr)
};

SinrRate sinr_and_rate(const std::vector<CVec>& h_eff, const BeamformerSet& w, const RVec& sigma2);
SinrRate sinr_and_rate(const PhaseVector& theta, const BeamformerSet& w,
                       const channel::ChannelSample& sample);

/// g(k, j) = h~_k^H w_j.
CMat inner_products(const std::vector<CVec>& h_eff, const BeamformerSet& w);

/// MMSE receive scalars u_k = h~_k^H w_k / (sum_j |h~_k^H w_j|^2 + sigma_k^2).
CVec update_u(const ShortTermProblem& prob, const BeamformerSet& w);

/// e_k = |u_k^* h~_k^H w_k - 1|^2 + sum_{j != k} |u_k|^2 |h~_k^H w_j|^2 + sigma_k^2 |u_k|^2.
RVec mse(const ShortTermProblem& prob, const CVec& u, const BeamformerSet& w);

/// q_k = 1 / e_k.
RVec update_q(const ShortTermProblem& prob, const CVec& u, const BeamformerSet& w);

/// w_k = lambda'_k q_k u_k (I + sum_j lambda'_j q_j |u_j|^2 h~_j h~_j^H)^{-1} h~_k.
BeamformerSet update_w(const ShortTermProblem& prob, const CVec& u, const RVec& q);

/// Weighted-MSE objective at (w, u, q).
double equivalent_objective(const ShortTermProblem& prob, const BeamformerSet& w, const CVec& u,
                            const RVec& q);

/// sum ||w||^2 + sum lambda_k (R_k - r_k); includes the constant sum lambda_k R_k.
double short_term_objective(const ShortTermProblem& prob, const BeamformerSet& w);

/// Norm of the gradient of short_term_objective w.r.t. all beamformers.
double kkt_residual(const ShortTermProblem& prob, const BeamformerSet& w);

/// w_k = c h~_k with one common c so the total power is K watts.
BeamformerSet matched_filter_init(const std::vector<CVec>& h_eff);

inline double total_power(const BeamformerSet& w) {
  double p = 0.0;
  for (const auto& wk : w) p += wk.squaredNorm();
  return p;
}

/// Everything one (u, q, w) sweep computes; the unfolded reverse pass reads
/// these back instead of recomputing them.
struct LayerRecord {
  BeamformerSet w_in;
  CMat g;      // K x K inner products h~_k^H w_j of w_in
  RVec total;  // T_k = sum_j |g_kj|^2 + sigma_k^2
  RVec interference;  // I_k = T_k - |g_kk|^2, accumulated directly
  CVec u;
  RVec e;
  RVec q;
  RVec a;      // lambda'_k q_k |u_k|^2
  CVec b;      // lambda'_k q_k u_k
  CMat chol_l; // lower Cholesky factor of I + sum_k a_k h~_k h~_k^H
  CMat x;      // M x K, columns A^{-1} h~_k
  BeamformerSet w_out;
};

/// One full sweep starting from w_in.
LayerRecord sweep(const ShortTermProblem& prob, const BeamformerSet& w_in);

struct ShortTermSolution {
  BeamformerSet w;
  CVec u;
  RVec q;
  RVec e;
  RVec rates;
  double power = 0.0;
  double objective = 0.0;  // short_term_objective at w
  /// short_term_objective after each sweep (only when tracing).
  std::vector<double> objective_trace;
  /// Weighted-MSE objective after every block update (only when tracing).
  std::vector<double> block_trace;
};

struct SolveOptions {
  int iterations = 10;
  bool trace = false;
};

ShortTermSolution solve_short_term(const ShortTermProblem& prob, const SolveOptions& opts,
                                   const std::optional<BeamformerSet>& w_init = std::nullopt);

/// {"w": [[[re, im], ...] per user], "u", "q", "e", "rates", "power", "objective"}.
std::string solution_json(const ShortTermSolution& sol);

}  // namespace ttsbf::wmmse

#endif  // TTSBF_WMMSE_HPP
