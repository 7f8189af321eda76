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


#include "test_util.hpp"

#include "ttsbf/wmmse.hpp"

#include <doctest.h>
#include <json.hpp>

#include <algorithm>
#include <cmath>

using namespace ttsbf;
using namespace ttsbf::wmmse;

namespace {

ShortTermProblem random_problem(Rng& rng, int K, int M, double lam_lo = 0.5, double lam_hi = 3.0) {
  ShortTermProblem p;
  p.h_eff = test::random_channels(rng, K, M);
  p.lambda = test::random_uniform(rng, K, lam_lo, lam_hi);
  p.rate_targets = RVec::Constant(K, 2.0);
  p.sigma2 = test::random_uniform(rng, K, 0.05, 0.5);
  return p;
}

BeamformerSet random_w(Rng& rng, int K, int M) { return test::random_channels(rng, K, M, 0.5); }

}  // namespace

TEST_SUITE("wmmse") {

TEST_CASE("sinr_and_rate examples") {
  std::vector<CVec> h{CVec::Zero(2), CVec::Zero(2)};
  h[0] << cplx(1.0, 0.0), cplx(0.0, 0.0);
  h[1] << cplx(0.0, 0.0), cplx(1.0, 0.0);
  BeamformerSet w{CVec::Zero(2), CVec::Zero(2)};
  w[0] << cplx(0.0, std::sqrt(0.3)), 0.0;
  const RVec sigma2 = RVec::Constant(2, 0.3);
  const SinrRate sr = sinr_and_rate(h, w, sigma2);
  CHECK(sr.sinr[0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(sr.rate[0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(sr.sinr[1] == 0.0);
  CHECK(sr.rate[1] == 0.0);
}

TEST_CASE("sinr_and_rate matches a scalar loop") {
  Rng rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    const auto h = test::random_channels(rng, 3, 4);
    const auto w = random_w(rng, 3, 4);
    const RVec s2 = test::random_uniform(rng, 3, 0.1, 1.0);
    const SinrRate sr = sinr_and_rate(h, w, s2);
    for (int k = 0; k < 3; ++k) {
      double sig = 0.0, intf = s2[k];
      for (int j = 0; j < 3; ++j) {
        cplx ip = 0.0;
        for (int m = 0; m < 4; ++m) ip += std::conj(h[k][m]) * w[j][m];
        (j == k ? sig : intf) += std::norm(ip);
      }
      CHECK(std::abs(sr.sinr[k] - sig / intf) <= 1e-12 * std::max(1.0, sig / intf));
      CHECK(std::abs(sr.rate[k] - std::log2(1.0 + sig / intf)) <= 1e-12);
    }
  }
}

TEST_CASE("update_u") {
  Rng rng(5);
  ShortTermProblem p = random_problem(rng, 3, 4);
  const BeamformerSet zero(3, CVec::Zero(4));
  CHECK(update_u(p, zero).norm() == 0.0);

  SUBCASE("high-SNR single user") {
    ShortTermProblem one;
    one.h_eff = {test::random_cvec(rng, 4)};
    one.lambda = RVec::Ones(1);
    one.rate_targets = RVec::Ones(1);
    one.sigma2 = RVec::Constant(1, 1e-6);
    const BeamformerSet w{10.0 * one.h_eff[0]};
    const cplx g = one.h_eff[0].dot(w[0]);
    const cplx u = update_u(one, w)[0];
    CHECK(std::abs(u * g - 1.0) <= one.sigma2[0] / std::norm(g));
  }
  SUBCASE("minimizes the MSE") {
    for (int trial = 0; trial < 20; ++trial) {
      const auto w = random_w(rng, 3, 4);
      const CVec u = update_u(p, w);
      const RVec e0 = mse(p, u, w);
      for (int k = 0; k < 3; ++k)
        for (cplx d : {cplx(1e-4, 0), cplx(-1e-4, 0), cplx(0, 1e-4), cplx(0, -1e-4)}) {
          CVec up = u;
          up[k] += d;
          CHECK(mse(p, up, w)[k] >= e0[k]);
        }
    }
  }
}

TEST_CASE("update_q") {
  Rng rng(6);
  ShortTermProblem p = random_problem(rng, 3, 4);
  const BeamformerSet zero(3, CVec::Zero(4));
  const CVec u0 = update_u(p, zero);
  const RVec q0 = update_q(p, u0, zero);
  for (int k = 0; k < 3; ++k) CHECK(q0[k] == 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const auto w = random_w(rng, 3, 4);
    const CVec u = update_u(p, w);
    const RVec q = update_q(p, u, w);
    const RVec e = mse(p, u, w);
    for (int k = 0; k < 3; ++k) CHECK(q[k] * e[k] == doctest::Approx(1.0).epsilon(1e-15));
  }
}

TEST_CASE("update_w") {
  Rng rng(7);
  SUBCASE("lambda = 0 gives zero beamformers") {
    ShortTermProblem p = random_problem(rng, 3, 4);
    p.lambda.setZero();
    const auto w = random_w(rng, 3, 4);
    const CVec u = update_u(p, w);
    for (const auto& wk : update_w(p, u, update_q(p, u, w))) CHECK(wk.norm() == 0.0);
  }
  SUBCASE("single user rank-one closed form") {
    ShortTermProblem p = random_problem(rng, 1, 4);
    const CVec u = test::random_cvec(rng, 1);
    const RVec q = RVec::Constant(1, 1.7);
    const double lam = p.mse_weights()[0];
    const CVec& h = p.h_eff[0];
    const CVec want = (lam * q[0] * u[0] / (1.0 + lam * q[0] * std::norm(u[0]) * h.squaredNorm())) * h;
    CHECK((update_w(p, u, q)[0] - want).norm() <= 1e-12 * want.norm());
  }
  SUBCASE("first-order condition") {
    for (int trial = 0; trial < 20; ++trial) {
      ShortTermProblem p = random_problem(rng, 3, 4);
      const CVec u = test::random_cvec(rng, 3);
      const RVec q = test::random_uniform(rng, 3, 0.5, 4.0);
      const BeamformerSet w = update_w(p, u, q);
      const RVec lam = p.mse_weights();
      for (int k = 0; k < 3; ++k) {
        CVec grad = w[k] - lam[k] * q[k] * u[k] * p.h_eff[k];
        for (int j = 0; j < 3; ++j) grad += lam[j] * q[j] * std::norm(u[j]) * p.h_eff[j] * p.h_eff[j].dot(w[k]);
        CHECK(grad.norm() <= 1e-10);
      }
    }
  }
}

TEST_CASE("matched_filter_init carries K watts") {
  Rng rng(8);
  const auto h = test::random_channels(rng, 3, 5);
  CHECK(total_power(matched_filter_init(h)) == doctest::Approx(3.0).epsilon(1e-14));
  const auto w = matched_filter_init(h);
  const cplx ratio = w[0][0] / h[0][0];
  for (int k = 0; k < 3; ++k) CHECK((w[k] - ratio * h[k]).norm() <= 1e-14);
}

TEST_CASE("solve_short_term with lambda = 0") {
  Rng rng(9);
  ShortTermProblem p = random_problem(rng, 2, 3);
  p.lambda.setZero();
  const ShortTermSolution s = solve_short_term(p, {1, false});
  CHECK(s.power == 0.0);
  for (int k = 0; k < 2; ++k) CHECK(s.rates[k] == 0.0);
  CHECK_THROWS_AS(solve_short_term(p, {0, false}), InvalidArgument);
}

TEST_CASE("block updates never increase the weighted MSE objective") {
  Rng rng(10);
  int violations = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const ShortTermProblem p = random_problem(rng, 3, 4);
    const ShortTermSolution s = solve_short_term(p, {10, true});
    for (std::size_t i = 1; i < s.block_trace.size(); ++i)
      if (s.block_trace[i] > s.block_trace[i - 1] + 1e-9 * std::abs(s.block_trace[i - 1])) ++violations;
    for (std::size_t i = 1; i < s.objective_trace.size(); ++i)
      if (s.objective_trace[i] > s.objective_trace[i - 1] + 1e-9 * std::abs(s.objective_trace[i - 1])) ++violations;
  }
  CHECK(violations == 0);
}

TEST_CASE("convergence plateau and KKT residual") {
  Rng rng(11);
  const ShortTermProblem p = random_problem(rng, 3, 4);
  const double o50 = solve_short_term(p, {50, false}).objective;
  const double o51 = solve_short_term(p, {51, false}).objective;
  CHECK(std::abs(o50 - o51) < 1e-8);

  std::vector<double> r5, r50;
  for (int trial = 0; trial < 30; ++trial) {
    const ShortTermProblem q = random_problem(rng, 3, 4);
    r5.push_back(kkt_residual(q, solve_short_term(q, {5, false}).w));
    r50.push_back(kkt_residual(q, solve_short_term(q, {50, false}).w));
  }
  std::nth_element(r5.begin(), r5.begin() + 15, r5.end());
  std::nth_element(r50.begin(), r50.begin() + 15, r50.end());
  CHECK(r50[15] < r5[15]);
}

TEST_CASE("MMSE identity at convergence") {
  Rng rng(12);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const ShortTermProblem p = random_problem(rng, 3, 4);
    const ShortTermSolution s = solve_short_term(p, {300, false});
    // q is computed at the input of the last sweep; recompute at the output.
    const CVec u = update_u(p, s.w);
    const RVec q = update_q(p, u, s.w);
    for (int k = 0; k < 3; ++k) worst = std::max(worst, std::abs(std::log2(q[k]) - s.rates[k]));
  }
  CHECK(worst <= 1e-8);
}

TEST_CASE("per-user phase rotation of the channel leaves power and rates unchanged") {
  Rng rng(13);
  const ShortTermProblem p = random_problem(rng, 3, 4);
  ShortTermProblem r = p;
  for (int k = 0; k < 3; ++k) r.h_eff[k] *= std::polar(1.0, 0.7 * (k + 1));
  const ShortTermSolution a = solve_short_term(p, {20, false}), b = solve_short_term(r, {20, false});
  CHECK(std::abs(a.power - b.power) <= 1e-10 * a.power);
  for (int k = 0; k < 3; ++k) CHECK(std::abs(a.rates[k] - b.rates[k]) <= 1e-10);
}

TEST_CASE("solution_json") {
  Rng rng(14);
  const ShortTermSolution s = solve_short_term(random_problem(rng, 2, 3), {5, false});
  const auto j = nlohmann::json::parse(solution_json(s));
  CHECK(j["w"].size() == 2);
  CHECK(j["w"][0].size() == 3);
  CHECK(j["power"].get<double>() == s.power);
  CHECK(j["rates"][1].get<double>() == s.rates[1]);
}

}  // TEST_SUITE
