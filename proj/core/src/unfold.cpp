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

#include "ttsbf/unfold.hpp"

#include <cmath>

namespace ttsbf::unfold {

namespace {

std::size_t bytes_of(const CMat& m) { return static_cast<std::size_t>(m.size()) * sizeof(cplx); }
std::size_t bytes_of(const CVec& v) { return static_cast<std::size_t>(v.size()) * sizeof(cplx); }
std::size_t bytes_of(const RVec& v) { return static_cast<std::size_t>(v.size()) * sizeof(double); }
std::size_t bytes_of(const BeamformerSet& w) {
  std::size_t n = 0;
  for (const auto& v : w) n += bytes_of(v);
  return n;
}

}  // namespace

std::size_t WmmseTape::layer_bytes() const {
  std::size_t n = 0;
  for (const auto& r : layers_) {
    n += bytes_of(r.w_in) + bytes_of(r.g) + bytes_of(r.total) + bytes_of(r.interference) +
         bytes_of(r.u) + bytes_of(r.e) + bytes_of(r.q) + bytes_of(r.a) + bytes_of(r.b) +
         bytes_of(r.chol_l) + bytes_of(r.x) + bytes_of(r.w_out);
  }
  return n;
}

wmmse::ShortTermProblem WmmseTape::problem() const {
  return wmmse::ShortTermProblem{h_eff_, lambda_, rate_targets_, sigma2_};
}

std::pair<wmmse::ShortTermSolution, WmmseTape> record_and_solve(
    std::vector<CMat> cascades, std::vector<CVec> h_d, const PhaseVector& theta, const RVec& lambda,
    const RVec& rate_targets, const RVec& sigma2, int J) {
  require(J >= 1, "record_and_solve: J must be >= 1");
  WmmseTape tape;
  tape.h_eff_ = channel::effective_channel(cascades, h_d, theta);
  tape.cascades_ = std::move(cascades);
  tape.h_d_ = std::move(h_d);
  tape.theta_ = theta;
  tape.lambda_ = lambda;
  tape.sigma2_ = sigma2;
  tape.rate_targets_ = rate_targets;
  const wmmse::ShortTermProblem prob = tape.problem();
  prob.validate();

  double energy = 0.0;
  for (const auto& h : tape.h_eff_) energy += h.squaredNorm();
  tape.init_energy_ = energy;
  tape.w0_ = wmmse::matched_filter_init(tape.h_eff_);
  tape.init_scale_ = energy > 0.0 ? std::sqrt(static_cast<double>(prob.K()) / energy) : 0.0;

  tape.layers_.reserve(J);
  const BeamformerSet* w = &tape.w0_;
  for (int it = 0; it < J; ++it) {
    tape.layers_.push_back(wmmse::sweep(prob, *w));
    w = &tape.layers_.back().w_out;
  }

  wmmse::ShortTermSolution sol;
  const wmmse::LayerRecord& last = tape.layers_.back();
  sol.w = last.w_out;
  sol.u = last.u;
  sol.q = last.q;
  sol.e = last.e;
  sol.rates = wmmse::sinr_and_rate(prob.h_eff, sol.w, prob.sigma2).rate;
  sol.power = wmmse::total_power(sol.w);
  sol.objective = sol.power + prob.lambda.dot(prob.rate_targets - sol.rates);
  return {std::move(sol), std::move(tape)};
}

std::pair<wmmse::ShortTermSolution, WmmseTape> record_and_solve(const channel::ChannelSample& sample,
                                                                const PhaseVector& theta,
                                                                const RVec& lambda,
                                                                const RVec& rate_targets, int J) {
  return record_and_solve(channel::cascaded_channels(sample), sample.h_d, theta, lambda, rate_targets,
                          sample.noise_vars, J);
}

BeamformerSet replay(const WmmseTape& tape) {
  const wmmse::ShortTermProblem prob = tape.problem();
  BeamformerSet w = wmmse::matched_filter_init(prob.h_eff);
  for (int it = 0; it < tape.layer_count(); ++it) w = wmmse::sweep(prob, w).w_out;
  return w;
}

RVec theta_from_channel_cotangent(const std::vector<CMat>& cascades, const PhaseVector& theta,
                                  const std::vector<CVec>& h_bar) {
  const Eigen::Index N = theta.size();
  RVec d_theta = RVec::Zero(N);
  for (std::size_t k = 0; k < cascades.size(); ++k) {
    // d h~_k / d theta_n = -j C_k[:, n] e^{-j theta_n}
    const Eigen::RowVectorXcd y = h_bar[k].adjoint() * cascades[k];
    for (Eigen::Index n = 0; n < N; ++n) d_theta[n] += std::imag(y[n] * std::polar(1.0, -theta[n]));
  }
  return d_theta;
}

namespace {

// Reverse of one (u, q, w) layer. Consumes the cotangent on w_out and
// returns the cotangent on w_in; accumulates into h_bar and lam_bar (the
// latter w.r.t. lambda' = lambda / ln 2).
BeamformerSet reverse_layer(const wmmse::LayerRecord& r, const std::vector<CVec>& h,
                            const RVec& lam_mse, const BeamformerSet& w_bar, std::vector<CVec>& h_bar,
                            RVec& lam_bar) {
  const int K = static_cast<int>(h.size());
  const auto M = r.x.rows();

  // w_k = b_k x_k, x_k = A^{-1} h_k
  CVec b_bar(K);
  CMat x_bar(M, K);
  for (int k = 0; k < K; ++k) {
    b_bar[k] = r.x.col(k).dot(w_bar[k]);
    x_bar.col(k) = std::conj(r.b[k]) * w_bar[k];
  }
  // A = L L^H; v_k = A^{-1} x_bar_k
  const auto L = r.chol_l.triangularView<Eigen::Lower>();
  CMat v = L.solve(x_bar);
  L.adjoint().solveInPlace(v);
  const CMat a_bar_mat = -v * r.x.adjoint();
  const CMat a_sym = a_bar_mat + a_bar_mat.adjoint();
  RVec a_bar(K);
  for (int k = 0; k < K; ++k) {
    h_bar[k] += v.col(k);
    a_bar[k] = std::real(h[k].dot(a_bar_mat * h[k]));
    h_bar[k] += r.a[k] * (a_sym * h[k]);
  }

  // b = lam' q u, a = lam' q |u|^2
  CVec u_bar(K);
  RVec q_bar(K);
  for (int k = 0; k < K; ++k) {
    const double qk = r.q[k];
    const double u2 = std::norm(r.u[k]);
    const double s_bar = std::real(b_bar[k] * std::conj(r.u[k]));
    u_bar[k] = lam_mse[k] * qk * b_bar[k] + 2.0 * lam_mse[k] * qk * a_bar[k] * r.u[k];
    lam_bar[k] += qk * s_bar + qk * u2 * a_bar[k];
    q_bar[k] = lam_mse[k] * s_bar + lam_mse[k] * u2 * a_bar[k];
  }

  // q = 1/e, e = I/T (the MMSE receiver makes de/du vanish), u = g_kk / T
  CMat g_bar = CMat::Zero(K, K);
  for (int k = 0; k < K; ++k) {
    const double t = r.total[k];
    const double i = r.interference[k];
    const double e_bar = -r.q[k] * r.q[k] * q_bar[k];
    const double gkk2 = std::norm(r.g(k, k));
    for (int j = 0; j < K; ++j) {
      const double de = (j == k) ? -i / (t * t) : gkk2 / (t * t);
      g_bar(k, j) += 2.0 * e_bar * de * r.g(k, j);
    }
    g_bar(k, k) += u_bar[k] / t;
    const double inv_t_bar = std::real(u_bar[k] * std::conj(r.g(k, k)));
    const double t_bar = -inv_t_bar / (t * t);
    for (int j = 0; j < K; ++j) g_bar(k, j) += 2.0 * t_bar * r.g(k, j);
  }

  // g_kj = h_k^H w_j
  BeamformerSet w_in_bar(K, CVec::Zero(M));
  for (int k = 0; k < K; ++k) {
    for (int j = 0; j < K; ++j) {
      w_in_bar[j] += g_bar(k, j) * h[k];
      h_bar[k] += std::conj(g_bar(k, j)) * r.w_in[j];
    }
  }
  return w_in_bar;
}

}  // namespace

GradientBundle vjp_output(const WmmseTape& tape, const BeamformerSet& w_bar,
                          const std::vector<CVec>& h_bar_extra) {
  const auto& h = tape.h_eff();
  const int K = static_cast<int>(h.size());
  require(static_cast<int>(w_bar.size()) == K, "vjp_output: one cotangent per beamformer");
  const auto M = h.front().size();
  std::vector<CVec> h_bar(K, CVec::Zero(M));
  if (!h_bar_extra.empty()) {
    require(static_cast<int>(h_bar_extra.size()) == K, "vjp_output: one channel cotangent per user");
    for (int k = 0; k < K; ++k) h_bar[k] += h_bar_extra[k];
  }
  const RVec lam_mse = tape.lambda() / kLn2;
  RVec lam_bar = RVec::Zero(K);

  BeamformerSet wb = w_bar;
  const auto& layers = tape.layers();
  for (auto it = layers.rbegin(); it != layers.rend(); ++it)
    wb = reverse_layer(*it, h, lam_mse, wb, h_bar, lam_bar);

  // w0_k = c h_k, c = sqrt(K / S), S = sum ||h||^2
  const double c = tape.init_scale();
  if (c > 0.0) {
    double c_bar = 0.0;
    for (int k = 0; k < K; ++k) {
      c_bar += std::real(h[k].dot(wb[k]));
      h_bar[k] += c * wb[k];
    }
    const double s_bar = -0.5 * c_bar * c / tape.init_energy();
    for (int k = 0; k < K; ++k) h_bar[k] += 2.0 * s_bar * h[k];
  }

  GradientBundle out;
  out.d_theta = theta_from_channel_cotangent(tape.cascades(), tape.theta(), h_bar);
  out.d_lambda = lam_bar / kLn2;
  return out;
}

GradientBundle vjp_power(const WmmseTape& tape) {
  BeamformerSet w_bar;
  w_bar.reserve(tape.output().size());
  for (const auto& w : tape.output()) w_bar.push_back(2.0 * w);
  return vjp_output(tape, w_bar);
}

RateCotangent rate_cotangent(const std::vector<CVec>& h_eff, const BeamformerSet& w, const RVec& sigma2,
                             int k) {
  const int K = static_cast<int>(h_eff.size());
  require(k >= 0 && k < K, "rate_cotangent: user index out of range");
  const CMat g = wmmse::inner_products(h_eff, w);
  double interf = sigma2[k];
  for (int j = 0; j < K; ++j)
    if (j != k) interf += std::norm(g(k, j));
  const double total = interf + std::norm(g(k, k));

  const auto M = h_eff.front().size();
  RateCotangent out{BeamformerSet(K, CVec::Zero(M)), std::vector<CVec>(K, CVec::Zero(M))};
  for (int j = 0; j < K; ++j) {
    // r_k = (ln T - ln I) / ln 2
    double d = 1.0 / total;
    if (j != k) d -= 1.0 / interf;
    const cplx gk_bar = 2.0 * d / kLn2 * g(k, j);
    out.w_bar[j] += gk_bar * h_eff[k];
    out.h_bar[k] += std::conj(gk_bar) * w[j];
  }
  return out;
}

RateGradient vjp_rate(const WmmseTape& tape, int k) {
  const RateCotangent cot = rate_cotangent(tape.h_eff(), tape.output(), tape.sigma2(), k);
  RateGradient out;
  out.through_w = vjp_output(tape, cot.w_bar);
  out.direct_theta = theta_from_channel_cotangent(tape.cascades(), tape.theta(), cot.h_bar);
  return out;
}

RMat jacobian_theta(const WmmseTape& tape) {
  const int K = static_cast<int>(tape.output().size());
  const auto M = tape.output().front().size();
  const auto N = tape.theta().size();
  RMat jac(2 * M * K, N);
  BeamformerSet w_bar(K, CVec::Zero(M));
  Eigen::Index row = 0;
  for (int part = 0; part < 2; ++part) {
    const cplx unit = part == 0 ? cplx(1.0, 0.0) : cplx(0.0, 1.0);
    for (int k = 0; k < K; ++k) {
      for (Eigen::Index m = 0; m < M; ++m) {
        w_bar[k][m] = unit;
        jac.row(row++) = vjp_output(tape, w_bar).d_theta.transpose();
        w_bar[k][m] = 0.0;
      }
    }
  }
  return jac;
}

}  // namespace ttsbf::unfold
