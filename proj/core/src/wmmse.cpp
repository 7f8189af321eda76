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

#include "ttsbf/wmmse.hpp"

#include <json.hpp>

#include <cmath>

namespace ttsbf::wmmse {

void ShortTermProblem::validate() const {
  const int k_users = K();
  require(k_users >= 1, "ShortTermProblem: at least one user");
  require(lambda.size() == k_users && rate_targets.size() == k_users && sigma2.size() == k_users,
          "ShortTermProblem: lambda, R and sigma2 need one entry per user");
  require((lambda.array() >= 0.0).all(), "ShortTermProblem: lambda must be >= 0");
  require((sigma2.array() > 0.0).all(), "ShortTermProblem: sigma2 must be > 0");
  for (const auto& h : h_eff) require(h.size() == M(), "ShortTermProblem: inconsistent channel length");
}

CMat inner_products(const std::vector<CVec>& h_eff, const BeamformerSet& w) {
  const auto K = static_cast<Eigen::Index>(h_eff.size());
  require(static_cast<Eigen::Index>(w.size()) == K, "inner_products: one beamformer per user");
  CMat g(K, K);
  for (Eigen::Index k = 0; k < K; ++k)
    for (Eigen::Index j = 0; j < K; ++j) g(k, j) = h_eff[k].dot(w[j]);  // dot conjugates h
  return g;
}

namespace {

struct Powers {
  RVec total;
  RVec interference;
};

Powers received_powers(const CMat& g, const RVec& sigma2) {
  const auto K = g.rows();
  Powers p{RVec(K), RVec(K)};
  for (Eigen::Index k = 0; k < K; ++k) {
    double interf = sigma2[k];
    for (Eigen::Index j = 0; j < K; ++j)
      if (j != k) interf += std::norm(g(k, j));
    p.interference[k] = interf;
    p.total[k] = interf + std::norm(g(k, k));
  }
  return p;
}

RVec mse_from(const CMat& g, const CVec& u, const RVec& sigma2) {
  const auto K = g.rows();
  RVec e(K);
  for (Eigen::Index k = 0; k < K; ++k) {
    const double u2 = std::norm(u[k]);
    double v = std::norm(std::conj(u[k]) * g(k, k) - 1.0) + sigma2[k] * u2;
    for (Eigen::Index j = 0; j < K; ++j)
      if (j != k) v += u2 * std::norm(g(k, j));
    e[k] = v;
  }
  return e;
}

}  // namespace

SinrRate sinr_and_rate(const std::vector<CVec>& h_eff, const BeamformerSet& w, const RVec& sigma2) {
  const CMat g = inner_products(h_eff, w);
  const Powers p = received_powers(g, sigma2);
  const auto K = g.rows();
  SinrRate out{RVec(K), RVec(K)};
  for (Eigen::Index k = 0; k < K; ++k) {
    out.sinr[k] = std::norm(g(k, k)) / p.interference[k];
    out.rate[k] = std::log1p(out.sinr[k]) / kLn2;
  }
  return out;
}

SinrRate sinr_and_rate(const PhaseVector& theta, const BeamformerSet& w,
                       const channel::ChannelSample& sample) {
  return sinr_and_rate(channel::effective_channel(sample, theta), w, sample.noise_vars);
}

CVec update_u(const ShortTermProblem& prob, const BeamformerSet& w) {
  const CMat g = inner_products(prob.h_eff, w);
  const Powers p = received_powers(g, prob.sigma2);
  CVec u(prob.K());
  for (int k = 0; k < prob.K(); ++k) u[k] = g(k, k) / p.total[k];
  return u;
}

RVec mse(const ShortTermProblem& prob, const CVec& u, const BeamformerSet& w) {
  return mse_from(inner_products(prob.h_eff, w), u, prob.sigma2);
}

RVec update_q(const ShortTermProblem& prob, const CVec& u, const BeamformerSet& w) {
  return mse(prob, u, w).cwiseInverse();
}

namespace {

struct WStep {
  RVec a;
  CVec b;
  CMat chol_l;
  CMat x;
  BeamformerSet w;
};

WStep w_step(const ShortTermProblem& prob, const CVec& u, const RVec& q) {
  const int K = prob.K(), M = prob.M();
  const RVec lam = prob.mse_weights();
  WStep s;
  s.a.resize(K);
  s.b.resize(K);
  CMat A = CMat::Identity(M, M);
  CMat H(M, K);
  for (int k = 0; k < K; ++k) {
    s.a[k] = lam[k] * q[k] * std::norm(u[k]);
    s.b[k] = lam[k] * q[k] * u[k];
    H.col(k) = prob.h_eff[k];
    A.noalias() += s.a[k] * prob.h_eff[k] * prob.h_eff[k].adjoint();
  }
  Eigen::LLT<CMat> llt(A);
  if (llt.info() != Eigen::Success) throw SolverDiagnostic("update_w: Cholesky of I + PSD failed");
  s.chol_l = llt.matrixL();
  s.x = llt.solve(H);
  s.w.resize(K);
  for (int k = 0; k < K; ++k) s.w[k] = s.b[k] * s.x.col(k);
  return s;
}

}  // namespace

BeamformerSet update_w(const ShortTermProblem& prob, const CVec& u, const RVec& q) {
  return w_step(prob, u, q).w;
}

double equivalent_objective(const ShortTermProblem& prob, const BeamformerSet& w, const CVec& u,
                            const RVec& q) {
  const RVec e = mse(prob, u, w);
  const RVec lam = prob.mse_weights();
  double f = total_power(w);
  for (int k = 0; k < prob.K(); ++k)
    if (lam[k] != 0.0) f += lam[k] * (q[k] * e[k] - std::log(q[k]));
  return f;
}

double short_term_objective(const ShortTermProblem& prob, const BeamformerSet& w) {
  const SinrRate sr = sinr_and_rate(prob.h_eff, w, prob.sigma2);
  return total_power(w) + prob.lambda.dot(prob.rate_targets - sr.rate);
}

double kkt_residual(const ShortTermProblem& prob, const BeamformerSet& w) {
  const int K = prob.K();
  const CMat g = inner_products(prob.h_eff, w);
  const Powers p = received_powers(g, prob.sigma2);
  double sq = 0.0;
  for (int j = 0; j < K; ++j) {
    // 2 dF/dw_j^* for F = sum ||w||^2 - sum_k lambda_k r_k
    CVec grad = 2.0 * w[j];
    for (int k = 0; k < K; ++k) {
      double coeff = 1.0 / p.total[k];
      if (j != k) coeff -= 1.0 / p.interference[k];
      grad -= (2.0 * prob.lambda[k] * coeff / kLn2) * g(k, j) * prob.h_eff[k];
    }
    sq += grad.squaredNorm();
  }
  return std::sqrt(sq);
}

BeamformerSet matched_filter_init(const std::vector<CVec>& h_eff) {
  double s = 0.0;
  for (const auto& h : h_eff) s += h.squaredNorm();
  const double c = s > 0.0 ? std::sqrt(static_cast<double>(h_eff.size()) / s) : 0.0;
  BeamformerSet w;
  w.reserve(h_eff.size());
  for (const auto& h : h_eff) w.push_back(c * h);
  return w;
}

LayerRecord sweep(const ShortTermProblem& prob, const BeamformerSet& w_in) {
  const int K = prob.K();
  LayerRecord r;
  r.w_in = w_in;
  r.g = inner_products(prob.h_eff, w_in);
  Powers p = received_powers(r.g, prob.sigma2);
  r.total = std::move(p.total);
  r.interference = std::move(p.interference);
  r.u.resize(K);
  r.e.resize(K);
  r.q.resize(K);
  for (int k = 0; k < K; ++k) {
    r.u[k] = r.g(k, k) / r.total[k];
    // MSE at the MMSE receiver, I_k / T_k, without the 1 - SINR/(1+SINR) cancellation.
    r.e[k] = r.interference[k] / r.total[k];
    r.q[k] = 1.0 / r.e[k];
  }
  WStep ws = w_step(prob, r.u, r.q);
  r.a = std::move(ws.a);
  r.b = std::move(ws.b);
  r.chol_l = std::move(ws.chol_l);
  r.x = std::move(ws.x);
  r.w_out = std::move(ws.w);
  return r;
}

ShortTermSolution solve_short_term(const ShortTermProblem& prob, const SolveOptions& opts,
                                   const std::optional<BeamformerSet>& w_init) {
  prob.validate();
  require(opts.iterations >= 1, "solve_short_term: J must be >= 1");
  BeamformerSet w = w_init ? *w_init : matched_filter_init(prob.h_eff);
  require(static_cast<int>(w.size()) == prob.K(), "solve_short_term: w_init needs one vector per user");

  ShortTermSolution sol;
  if (opts.trace) sol.objective_trace.push_back(short_term_objective(prob, w));
  RVec q_prev;
  for (int it = 0; it < opts.iterations; ++it) {
    LayerRecord r = sweep(prob, w);
    if (opts.trace) {
      if (it > 0) sol.block_trace.push_back(equivalent_objective(prob, w, r.u, q_prev));
      sol.block_trace.push_back(equivalent_objective(prob, w, r.u, r.q));
      sol.block_trace.push_back(equivalent_objective(prob, r.w_out, r.u, r.q));
    }
    w = std::move(r.w_out);
    sol.u = std::move(r.u);
    sol.q = std::move(r.q);
    sol.e = std::move(r.e);
    q_prev = sol.q;
    if (opts.trace) sol.objective_trace.push_back(short_term_objective(prob, w));
  }
  sol.w = std::move(w);
  sol.rates = sinr_and_rate(prob.h_eff, sol.w, prob.sigma2).rate;
  sol.power = total_power(sol.w);
  sol.objective = sol.power + prob.lambda.dot(prob.rate_targets - sol.rates);
  return sol;
}

std::string solution_json(const ShortTermSolution& sol) {
  auto cvec = [](const CVec& v) {
    nlohmann::json a = nlohmann::json::array();
    for (const auto& z : v) a.push_back({z.real(), z.imag()});
    return a;
  };
  auto rvec = [](const RVec& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
  nlohmann::json j;
  j["w"] = nlohmann::json::array();
  for (const auto& wk : sol.w) j["w"].push_back(cvec(wk));
  j["u"] = cvec(sol.u);
  j["q"] = rvec(sol.q);
  j["e"] = rvec(sol.e);
  j["rates"] = rvec(sol.rates);
  j["power"] = sol.power;
  j["objective"] = sol.objective;
  return j.dump();
}

}  // namespace ttsbf::wmmse
