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

#include "ttsbf/gradcheck.hpp"

#include "ttsbf/rng.hpp"
#include "ttsbf/unfold.hpp"
#include "ttsbf/wmmse.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

namespace ttsbf::unfold {

bool GradcheckReport::all_pass() const {
  return std::all_of(rows.begin(), rows.end(), [](const GradcheckRow& r) { return r.pass; });
}

double GradcheckReport::max_error() const {
  double m = 0.0;
  for (const auto& r : rows) m = std::max(m, r.rel_error);
  return m;
}

channel::ChannelSample gradcheck_instance(int M, int N, int K, std::uint64_t seed) {
  require(M >= 1 && N >= 1 && K >= 1, "gradcheck_instance: dims must be >= 1");
  Rng rng(seed);
  std::normal_distribution<double> gauss(0.0, std::sqrt(0.5));
  auto cn = [&] { return cplx(gauss(rng), gauss(rng)); };
  channel::ChannelSample s;
  s.G = CMat(N, M);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < M; ++j) s.G(i, j) = cn();
  for (int k = 0; k < K; ++k) {
    CVec hr(N), hd(M);
    for (int n = 0; n < N; ++n) hr[n] = cn();
    for (int m = 0; m < M; ++m) hd[m] = cn();
    s.h_r.push_back(hr);
    s.h_d.push_back(hd);
  }
  s.noise_vars = RVec::Ones(K);
  return s;
}

RVec central_difference(const std::function<double(const RVec&)>& f, const RVec& x, double step) {
  RVec g(x.size());
  RVec xp = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    xp[i] = x[i] + step;
    const double fp = f(xp);
    xp[i] = x[i] - step;
    const double fm = f(xp);
    xp[i] = x[i];
    g[i] = (fp - fm) / (2.0 * step);
  }
  return g;
}

double fd_relative_error(const std::function<double(const RVec&)>& f, const RVec& x, const RVec& analytic,
                         const std::vector<double>& steps) {
  double best = std::numeric_limits<double>::infinity();
  for (double h : steps) {
    const RVec fd = central_difference(f, x, h);
    const double scale = fd.cwiseAbs().maxCoeff();
    const double diff = (analytic - fd).cwiseAbs().maxCoeff();
    const double err = scale > 0.0 ? diff / scale : diff;
    best = std::min(best, err);
  }
  return best;
}

GradcheckReport gradcheck(const GradcheckOptions& opts) {
  require(opts.instances >= 1 && opts.J >= 1, "gradcheck: instances and J must be >= 1");
  require(!opts.steps.empty(), "gradcheck: at least one step size");
  GradcheckReport rep;
  rep.tolerance = opts.tolerance;
  const int K = opts.K;
  const RVec targets = RVec::Ones(K);

  for (int i = 0; i < opts.instances; ++i) {
    const std::uint64_t base = derive_seed(opts.seed, SeedDomain::kGradcheck, {static_cast<std::uint64_t>(i)});
    const channel::ChannelSample s = gradcheck_instance(opts.M, opts.N, K, base);
    Rng rng(splitmix64(base));
    std::uniform_real_distribution<double> phase(0.0, kTwoPi), mult(0.5, 2.0);
    PhaseVector theta(opts.N);
    for (auto& t : theta) t = phase(rng);
    RVec lambda(K);
    for (auto& l : lambda) l = mult(rng);

    const auto [sol, tape] = record_and_solve(s, theta, lambda, targets, opts.J);
    auto solve_w = [&](const PhaseVector& th, const RVec& lam) {
      return record_and_solve(s, th, lam, targets, opts.J).first.w;
    };
    auto rate_of = [&](const PhaseVector& th, const BeamformerSet& w, int k) {
      return wmmse::sinr_and_rate(th, w, s).rate[k];
    };
    auto add = [&](const std::string& q, double err) {
      rep.rows.push_back({i, q, err, err <= opts.tolerance});
    };

    const GradientBundle gp = vjp_power(tape);
    add("power/theta", fd_relative_error(
                           [&](const RVec& th) { return wmmse::total_power(solve_w(th, lambda)); }, theta,
                           gp.d_theta, opts.steps));
    add("power/lambda", fd_relative_error(
                            [&](const RVec& lam) { return wmmse::total_power(solve_w(theta, lam)); }, lambda,
                            gp.d_lambda, opts.steps));
    for (int k = 0; k < K; ++k) {
      const RateGradient gr = vjp_rate(tape, k);
      const std::string name = "rate_" + std::to_string(k + 1);
      add(name + "/theta", fd_relative_error(
                               [&](const RVec& th) { return rate_of(th, solve_w(th, lambda), k); }, theta,
                               gr.total_theta(), opts.steps));
      add(name + "/lambda", fd_relative_error(
                                [&](const RVec& lam) { return rate_of(theta, solve_w(theta, lam), k); }, lambda,
                                gr.through_w.d_lambda, opts.steps));
      add(name + "/theta_direct",
          fd_relative_error([&](const RVec& th) { return rate_of(th, sol.w, k); }, theta, gr.direct_theta,
                            opts.steps));
    }
  }
  return rep;
}

void write_gradcheck_table(std::ostream& os, const GradcheckReport& report) {
  os << "instance,quantity,rel_error,result\n";
  char buf[32];
  for (const auto& r : report.rows) {
    std::snprintf(buf, sizeof buf, "%.3e", r.rel_error);
    os << r.instance << ',' << r.quantity << ',' << buf << ',' << (r.pass ? "PASS" : "FAIL") << '\n';
  }
}

}  // namespace ttsbf::unfold
