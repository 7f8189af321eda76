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

#ifndef TTSBF_UNFOLD_HPP
#define TTSBF_UNFOLD_HPP

#include "ttsbf/channel.hpp"
#include "ttsbf/wmmse.hpp"

#include <cstddef>
#include <utility>
#include <vector>

// Reverse-mode differentiation of the J-layer WMMSE network
//
//   theta -> h~(theta) -> w^0 = c h~ -> [u, q, w] x J -> w^J
//
// with lambda entering every w sub-layer. Cotangents of complex quantities
// follow the real convention z_bar = dL/dRe(z) + i dL/dIm(z), so every
// differentiated output is a real scalar of the real parameters (theta, lambda).
namespace ttsbf::unfold {

/// Read-only record of one forward solve.
class WmmseTape {
 public:
  const std::vector<CMat>& cascades() const { return cascades_; }
  const std::vector<CVec>& h_direct() const { return h_d_; }
  const std::vector<CVec>& h_eff() const { return h_eff_; }
  const PhaseVector& theta() const { return theta_; }
  const RVec& lambda() const { return lambda_; }
  const RVec& sigma2() const { return sigma2_; }
  const RVec& rate_targets() const { return rate_targets_; }
  const BeamformerSet& initial_w() const { return w0_; }
  double init_scale() const { return init_scale_; }
  double init_energy() const { return init_energy_; }
  const std::vector<wmmse::LayerRecord>& layers() const { return layers_; }
  const BeamformerSet& output() const { return layers_.back().w_out; }

  int layer_count() const { return static_cast<int>(layers_.size()); }
  /// Three sub-layers (u, q, w) per layer.
  int sublayer_count() const { return 3 * layer_count(); }
  /// Bytes held by the per-layer records.
  std::size_t layer_bytes() const;

  wmmse::ShortTermProblem problem() const;

 private:
  friend std::pair<wmmse::ShortTermSolution, WmmseTape> record_and_solve(
      std::vector<CMat> cascades, std::vector<CVec> h_d, const PhaseVector& theta, const RVec& lambda,
      const RVec& rate_targets, const RVec& sigma2, int J);

  std::vector<CMat> cascades_;
  std::vector<CVec> h_d_;
  std::vector<CVec> h_eff_;
  PhaseVector theta_;
  RVec lambda_;
  RVec sigma2_;
  RVec rate_targets_;
  BeamformerSet w0_;
  double init_scale_ = 0.0;
  double init_energy_ = 0.0;
  std::vector<wmmse::LayerRecord> layers_;
};

struct GradientBundle {
  RVec d_theta;
  RVec d_lambda;

  GradientBundle& operator+=(const GradientBundle& o) {
    d_theta += o.d_theta;
    d_lambda += o.d_lambda;
    return *this;
  }
  bool all_finite() const { return d_theta.allFinite() && d_lambda.allFinite(); }
};

struct RateGradient {
  /// Chain through w^J(theta, lambda) with the rate's w-cotangent.
  GradientBundle through_w;
  /// d r_k / d theta with w held fixed.
  RVec direct_theta;

  RVec total_theta() const { return through_w.d_theta + direct_theta; }
};

/// Runs J WMMSE sweeps from the matched-filter initialization and records
/// every intermediate. Numerics are identical to wmmse::solve_short_term.
std::pair<wmmse::ShortTermSolution, WmmseTape> record_and_solve(
    std::vector<CMat> cascades, std::vector<CVec> h_d, const PhaseVector& theta, const RVec& lambda,
    const RVec& rate_targets, const RVec& sigma2, int J);

std::pair<wmmse::ShortTermSolution, WmmseTape> record_and_solve(const channel::ChannelSample& sample,
                                                                const PhaseVector& theta,
                                                                const RVec& lambda,
                                                                const RVec& rate_targets, int J);

/// Re-executes the forward pass from the tape's inputs.
BeamformerSet replay(const WmmseTape& tape);

/// Pulls a cotangent on w^J back to (theta, lambda). `h_bar_extra` adds a
/// cotangent directly on h~ (may be empty).
GradientBundle vjp_output(const WmmseTape& tape, const BeamformerSet& w_bar,
                          const std::vector<CVec>& h_bar_extra = {});

/// Gradient of sum_k ||w_k^J||^2.
GradientBundle vjp_power(const WmmseTape& tape);

/// Gradient of r_k(theta, w^J(theta, lambda)) in bits/s/Hz, split into the
/// through-solution and direct parts.
RateGradient vjp_rate(const WmmseTape& tape, int k);

/// d theta from a cotangent on h~ (the theta -> h~ map only).
RVec theta_from_channel_cotangent(const std::vector<CMat>& cascades, const PhaseVector& theta,
                                  const std::vector<CVec>& h_bar);

/// Cotangents of r_k w.r.t. the beamformers and the effective channels at
/// fixed (h~, w).
struct RateCotangent {
  BeamformerSet w_bar;
  std::vector<CVec> h_bar;
};
RateCotangent rate_cotangent(const std::vector<CVec>& h_eff, const BeamformerSet& w, const RVec& sigma2,
                             int k);

/// Real Jacobian d[Re w^J; Im w^J] / d theta (2MK x N) assembled from unit
/// cotangents. Test helper; the optimizer only uses VJPs.
RMat jacobian_theta(const WmmseTape& tape);

}  // namespace ttsbf::unfold

#endif  // TTSBF_UNFOLD_HPP
