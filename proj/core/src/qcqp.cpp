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

#include "ttsbf/qcqp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

namespace ttsbf::qcqp {

double ProxQuadratic::value(const RVec& x) const {
  const RVec d = x - center;
  return constant + linear.dot(d) + tau * d.squaredNorm();
}

RVec ProxQuadratic::gradient(const RVec& x) const { return linear + 2.0 * tau * (x - center); }

void ProxQuadratic::validate() const {
  require(tau > 0.0, "ProxQuadratic: tau must be > 0");
  require(linear.size() == center.size(), "ProxQuadratic: linear term and center differ in length");
  require(std::isfinite(constant) && linear.allFinite() && center.allFinite(),
          "ProxQuadratic: non-finite coefficients");
}

ProxQuadratic ProxQuadratic::make(double constant, const RVec& lin_theta, const RVec& lin_lambda,
                                  double tau, const RVec& theta_center, const RVec& lambda_center) {
  ProxQuadratic f;
  f.constant = constant;
  f.tau = tau;
  f.linear.resize(lin_theta.size() + lin_lambda.size());
  f.linear << lin_theta, lin_lambda;
  f.center.resize(theta_center.size() + lambda_center.size());
  f.center << theta_center, lambda_center;
  return f;
}

void BoxDomain::validate() const {
  require(lower.size() == upper.size(), "BoxDomain: bound lengths differ");
  require((lower.array() <= upper.array()).all(), "BoxDomain: lower > upper");
}

BoxDomain BoxDomain::phases_and_multipliers(int N, int K, double lambda_cap) {
  require(N >= 0 && K >= 0, "BoxDomain: negative dimension");
  require(lambda_cap > 0.0, "BoxDomain: lambda cap must be > 0");
  BoxDomain b;
  b.lower = RVec::Zero(N + K);
  b.upper.resize(N + K);
  b.upper.head(N).setConstant(kTwoPi);
  b.upper.tail(K).setConstant(lambda_cap);
  return b;
}

namespace {

void check_shapes(const ProxQuadratic* objective, const std::vector<ProxQuadratic>& constraints,
                  const BoxDomain& box) {
  box.validate();
  const RVec* center = nullptr;
  auto check = [&](const ProxQuadratic& f) {
    f.validate();
    require(f.dim() == box.dim(), "qcqp: function and box dimensions differ");
    if (center == nullptr)
      center = &f.center;
    else
      require(f.center == *center, "qcqp: all functions must share one center");
  };
  if (objective != nullptr) check(*objective);
  for (const auto& c : constraints) check(c);
}

// Everything the dual needs at one multiplier vector.
struct DualPoint {
  RVec mu;
  RVec x;
  RVec f;  // constraint values at x
  double g = 0.0;
  double tau_sum = 0.0;
  std::vector<bool> free;  // coordinate strictly inside the box
};

class Dual {
 public:
  Dual(const ProxQuadratic* objective, double w0, const std::vector<ProxQuadratic>& constraints,
       const BoxDomain& box)
      : obj_(objective), w0_(objective ? w0 : 0.0), cons_(constraints), box_(box) {
    center_ = objective ? objective->center : constraints.front().center;
  }

  DualPoint eval(const RVec& mu) const {
    DualPoint p;
    p.mu = mu;
    const auto n = center_.size();
    RVec lin = RVec::Zero(n);
    double tau = 0.0;
    if (obj_ != nullptr && w0_ > 0.0) {
      lin += w0_ * obj_->linear;
      tau += w0_ * obj_->tau;
    }
    for (std::size_t k = 0; k < cons_.size(); ++k) {
      if (mu[k] == 0.0) continue;
      lin += mu[k] * cons_[k].linear;
      tau += mu[k] * cons_[k].tau;
    }
    if (!(tau > 0.0)) throw SolverDiagnostic("qcqp: zero effective curvature in the inner problem");
    p.tau_sum = tau;
    const RVec raw = center_ - lin / (2.0 * tau);
    p.x = box_.clip(raw);
    p.free.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) p.free[i] = raw[i] > box_.lower[i] && raw[i] < box_.upper[i];
    const auto K = static_cast<Eigen::Index>(cons_.size());
    p.f.resize(K);
    for (Eigen::Index k = 0; k < K; ++k) p.f[k] = cons_[k].value(p.x);
    p.g = (obj_ != nullptr && w0_ > 0.0) ? w0_ * obj_->value(p.x) : 0.0;
    p.g += mu.dot(p.f);
    return p;
  }

  // Hessian of the dual (negative semidefinite).
  RMat hessian(const DualPoint& p) const {
    const auto K = static_cast<Eigen::Index>(cons_.size());
    const auto n = center_.size();
    RMat grads(n, K);
    for (Eigen::Index k = 0; k < K; ++k) grads.col(k) = cons_[k].gradient(p.x);
    for (Eigen::Index i = 0; i < n; ++i)
      if (!p.free[i]) grads.row(i).setZero();
    return -(grads.transpose() * grads) / (2.0 * p.tau_sum);
  }

  Eigen::Index size() const { return static_cast<Eigen::Index>(cons_.size()); }

 private:
  const ProxQuadratic* obj_;
  double w0_;
  const std::vector<ProxQuadratic>& cons_;
  const BoxDomain& box_;
  RVec center_;
};

RVec project_simplex(const RVec& v) {
  const auto n = v.size();
  std::vector<double> s(v.data(), v.data() + n);
  std::sort(s.begin(), s.end(), std::greater<>());
  double cum = 0.0, shift = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    cum += s[i];
    const double t = (cum - 1.0) / static_cast<double>(i + 1);
    if (s[i] - t > 0.0) shift = t;
  }
  return (v.array() - shift).max(0.0).matrix();
}

RVec project_orthant(const RVec& v) { return v.cwiseMax(0.0); }

// Solves (-H_FF + delta I) d_F = rhs_F, optionally with sum(d_F) = 0.
RVec newton_direction(const RMat& H, const RVec& rhs, const std::vector<bool>& free, bool sum_zero) {
  const auto K = H.rows();
  std::vector<Eigen::Index> idx;
  for (Eigen::Index k = 0; k < K; ++k)
    if (free[k]) idx.push_back(k);
  RVec d = RVec::Zero(K);
  const auto nf = static_cast<Eigen::Index>(idx.size());
  if (nf == 0) return d;
  const double scale = std::max(H.cwiseAbs().maxCoeff(), 1e-300);
  const double delta = 1e-13 * scale;
  const Eigen::Index dim = sum_zero ? nf + 1 : nf;
  RMat sys = RMat::Zero(dim, dim);
  RVec b = RVec::Zero(dim);
  for (Eigen::Index a = 0; a < nf; ++a) {
    for (Eigen::Index c = 0; c < nf; ++c) sys(a, c) = -H(idx[a], idx[c]);
    sys(a, a) += delta;
    b[a] = rhs[idx[a]];
    if (sum_zero) {
      sys(a, nf) = 1.0;
      sys(nf, a) = 1.0;
    }
  }
  const RVec sol = sys.fullPivLu().solve(b);
  if (!sol.allFinite()) return d;
  for (Eigen::Index a = 0; a < nf; ++a) d[idx[a]] = sol[a];
  return d;
}

// Projected Newton ascent with Armijo backtracking and a projected-gradient
// fallback. `simplex` selects the feasible set of the multipliers.
template <class Converged>
DualPoint ascend(const Dual& dual, RVec mu, bool simplex, int max_iter, Converged converged, int& iters) {
  auto project = [&](const RVec& v) { return simplex ? project_simplex(v) : project_orthant(v); };
  auto residual = [&](const DualPoint& q) { return (q.mu - project(q.mu + q.f)).cwiseAbs().maxCoeff(); };
  DualPoint p = dual.eval(mu);
  const auto K = dual.size();
  for (iters = 0; iters < max_iter; ++iters) {
    if (converged(p)) return p;
    const RMat H = dual.hessian(p);
    std::vector<bool> free(K);
    if (simplex) {
      double lowest_support = std::numeric_limits<double>::infinity();
      for (Eigen::Index k = 0; k < K; ++k)
        if (p.mu[k] > 0.0) lowest_support = std::min(lowest_support, p.f[k]);
      for (Eigen::Index k = 0; k < K; ++k) free[k] = p.mu[k] > 0.0 || p.f[k] >= lowest_support;
    } else {
      for (Eigen::Index k = 0; k < K; ++k) free[k] = p.mu[k] > 0.0 || p.f[k] > 0.0;
    }

    // Backtracking along the projected arc; returns the first point with a
    // sufficient increase, or nothing.
    // Changes below this are indistinguishable from rounding in g.
    const double noise = 1e-15 * (1.0 + std::abs(p.g));
    auto search = [&](const RVec& d, double s0) -> std::optional<DualPoint> {
      double s = s0;
      for (int ls = 0; ls < 120; ++ls, s *= 0.5) {
        const RVec cand = project(p.mu + s * d);
        if ((cand - p.mu).cwiseAbs().maxCoeff() == 0.0) return std::nullopt;
        const double predicted = p.f.dot(cand - p.mu);
        if (!(predicted > 0.0)) continue;
        DualPoint q = dual.eval(cand);
        if (q.g > p.g + noise && q.g >= p.g + 1e-4 * predicted) return q;
      }
      return std::nullopt;
    };

    std::optional<DualPoint> best;
    const RVec d_newton = newton_direction(H, p.f, free, simplex);
    if (d_newton.cwiseAbs().maxCoeff() > 0.0) best = search(d_newton, 1.0);
    // A flat dual (every coordinate clipped) needs long steps; backtracking trims them.
    const double fnorm = std::max(p.f.cwiseAbs().maxCoeff(), 1e-300);
    std::optional<DualPoint> grad = search(p.f, 1e12 / fnorm);
    if (grad && (!best || grad->g > best->g)) best = std::move(grad);
    if (!best && d_newton.cwiseAbs().maxCoeff() > 0.0) {
      // Near the optimum g is flat to round-off; Newton steps are then judged
      // by the projected-gradient residual alone.
      const double r0 = residual(p);
      double s = 1.0;
      for (int ls = 0; ls < 60 && !best; ++ls, s *= 0.5) {
        DualPoint q = dual.eval(project(p.mu + s * d_newton));
        if (residual(q) < (1.0 - 1e-4 * s) * r0) best = std::move(q);
      }
    }
    if (!best) return p;  // no further ascent at machine precision
    p = std::move(*best);
  }
  return p;
}

}  // namespace

RVec inner_argmin(const ProxQuadratic* objective, double objective_weight, const RVec& weights,
                  const std::vector<ProxQuadratic>& constraints, const BoxDomain& box) {
  require(objective != nullptr || !constraints.empty(), "inner_argmin: nothing to minimize");
  check_shapes(objective, constraints, box);
  require(weights.size() == static_cast<Eigen::Index>(constraints.size()),
          "inner_argmin: one weight per constraint");
  require(objective_weight >= 0.0 && (weights.array() >= 0.0).all(), "inner_argmin: weights must be >= 0");
  return Dual(objective, objective_weight, constraints, box).eval(weights).x;
}

double dual_function(const ProxQuadratic& objective, const std::vector<ProxQuadratic>& constraints,
                     const BoxDomain& box, const RVec& mu) {
  check_shapes(&objective, constraints, box);
  require(mu.size() == static_cast<Eigen::Index>(constraints.size()), "dual_function: one mu per constraint");
  return Dual(&objective, 1.0, constraints, box).eval(mu).g;
}

MinimaxSolution solve_minimax(const std::vector<ProxQuadratic>& constraints, const BoxDomain& box,
                              const Tolerances& tol) {
  require(!constraints.empty(), "solve_minimax: at least one constraint");
  check_shapes(nullptr, constraints, box);
  const Dual dual(nullptr, 0.0, constraints, box);
  const auto K = dual.size();
  // Round-off can make late steps worse for the primal, so the best primal
  // point and the best dual bound are tracked separately.
  MinimaxSolution out;
  out.value = std::numeric_limits<double>::infinity();
  out.dual_value = -std::numeric_limits<double>::infinity();
  auto record = [&](const DualPoint& p) {
    const double v = p.f.maxCoeff();
    if (v < out.value) {
      out.value = v;
      out.x = p.x;
      out.weights = p.mu;
    }
    out.dual_value = std::max(out.dual_value, p.g);
  };
  auto gap_closed = [&](const DualPoint& p) {
    record(p);
    return out.value - out.dual_value <= tol.minimax_gap * (1.0 + std::abs(out.dual_value));
  };
  int iters = 0;
  record(ascend(dual, RVec::Constant(K, 1.0 / static_cast<double>(K)), true, tol.max_iterations, gap_closed,
                iters));
  out.iterations = iters;
  if (tol.strict && out.value - out.dual_value > 1e-6 * (1.0 + std::abs(out.value)))
    throw SolverDiagnostic("solve_minimax: duality gap did not close");
  return out;
}

ConstrainedResult solve_constrained(const ProxQuadratic& objective,
                                    const std::vector<ProxQuadratic>& constraints, const BoxDomain& box,
                                    const Tolerances& tol) {
  check_shapes(&objective, constraints, box);
  const Dual dual(&objective, 1.0, constraints, box);
  const auto K = dual.size();

  // Unconstrained prox step first; it is the answer whenever it is feasible.
  DualPoint p0 = dual.eval(RVec::Zero(K));
  if (K == 0 || p0.f.maxCoeff() <= 0.0)
    return ConstrainedSolution{p0.x, p0.mu, objective.value(p0.x), 0};

  MinimaxSolution mm = solve_minimax(constraints, box, tol);
  if (mm.value > tol.feasibility) return Infeasible{std::move(mm)};

  // Absolute tolerances plus the rounding error of f_k at x, including the
  // error of x itself (x0 - l / 2tau loses digits when tau is small).
  auto roundoff = [&](const DualPoint& p, Eigen::Index k) {
    const ProxQuadratic& f = constraints[k];
    const RVec d = p.x - f.center;
    const double x_err = p.x.cwiseAbs().maxCoeff() + d.cwiseAbs().maxCoeff();
    return 64.0 * std::numeric_limits<double>::epsilon() *
           (std::abs(f.constant) + f.linear.cwiseProduct(d).cwiseAbs().sum() + f.tau * d.squaredNorm() +
            f.gradient(p.x).cwiseAbs().sum() * x_err);
  };
  auto kkt_within = [&](const DualPoint& p, double share) {
    for (Eigen::Index k = 0; k < K; ++k) {
      const double r = roundoff(p, k);
      if (p.f[k] > share * tol.feasibility + r) return false;
      if (std::abs(p.mu[k] * p.f[k]) > share * tol.complementarity + p.mu[k] * r) return false;
    }
    return true;
  };
  int iters = 0;
  const DualPoint p = ascend(
      dual, RVec::Zero(K), false, tol.max_iterations, [&](const DualPoint& q) { return kkt_within(q, 0.5); },
      iters);
  if (!kkt_within(p, 1.0))
    throw SolverDiagnostic("solve_constrained: dual iterations did not reach KKT tolerance");
  return ConstrainedSolution{p.x, p.mu, objective.value(p.x), iters};
}

KktReport kkt_residuals(const ProxQuadratic& objective, const std::vector<ProxQuadratic>& constraints,
                        const BoxDomain& box, const RVec& x, const RVec& mu) {
  KktReport r;
  RVec grad = objective.gradient(x);
  for (std::size_t k = 0; k < constraints.size(); ++k) {
    const double fk = constraints[k].value(x);
    grad += mu[k] * constraints[k].gradient(x);
    r.feasibility = std::max(r.feasibility, fk);
    r.complementarity = std::max(r.complementarity, std::abs(mu[k] * fk));
    r.dual_feasibility = std::max(r.dual_feasibility, -mu[k]);
  }
  r.stationarity = (x - box.clip(x - grad)).norm();
  return r;
}

}  // namespace ttsbf::qcqp
