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

#ifndef TTSBF_QCQP_HPP
#define TTSBF_QCQP_HPP

#include "ttsbf/types.hpp"

#include <variant>
#include <vector>

// Convex programs whose objective and constraints all have the form
//
//   f(x) = c + l^T (x - x0) + tau ||x - x0||^2,   tau > 0,
//
// with one shared center x0, over a box. Any nonnegative combination of such
// functions has a scaled identity Hessian, so the Lagrangian minimizer over
// the box is a coordinate-wise clip and the dual lives in K dimensions.
namespace ttsbf::qcqp {

struct ProxQuadratic {
  double constant = 0.0;
  RVec linear;  // over the stacked variable x = [theta; lambda]
  double tau = 1.0;
  RVec center;

  int dim() const { return static_cast<int>(center.size()); }
  double value(const RVec& x) const;
  RVec gradient(const RVec& x) const;
  void validate() const;

  static ProxQuadratic make(double constant, const RVec& lin_theta, const RVec& lin_lambda, double tau,
                            const RVec& theta_center, const RVec& lambda_center);
};

struct BoxDomain {
  RVec lower;
  RVec upper;

  int dim() const { return static_cast<int>(lower.size()); }
  RVec clip(const RVec& x) const { return x.cwiseMax(lower).cwiseMin(upper); }
  void validate() const;

  /// [0, 2pi]^N x [0, lambda_cap]^K.
  static BoxDomain phases_and_multipliers(int N, int K, double lambda_cap);
};

struct Tolerances {
  double feasibility = 1e-9;
  double complementarity = 1e-8;
  double stationarity = 1e-8;
  double minimax_gap = 1e-12;
  int max_iterations = 500;
  // When false, solve_minimax returns its best point instead of throwing on
  // an unclosed duality gap.
  bool strict = true;
};

/// argmin over the box of w0 * objective + sum_k weights_k * constraints_k.
/// `objective` may be null (w0 is then ignored).
RVec inner_argmin(const ProxQuadratic* objective, double objective_weight, const RVec& weights,
                  const std::vector<ProxQuadratic>& constraints, const BoxDomain& box);

/// Lagrange dual function at mu >= 0 (objective weight 1).
double dual_function(const ProxQuadratic& objective, const std::vector<ProxQuadratic>& constraints,
                     const BoxDomain& box, const RVec& mu);

struct MinimaxSolution {
  RVec x;
  RVec weights;  // point of the unit simplex
  double value = 0.0;       // max_k f_k(x)
  double dual_value = 0.0;  // lower bound certified by weights
  int iterations = 0;
};

/// min over the box of max_k f_k(x).
MinimaxSolution solve_minimax(const std::vector<ProxQuadratic>& constraints, const BoxDomain& box,
                              const Tolerances& tol = {});

struct ConstrainedSolution {
  RVec x;
  RVec mu;
  double objective = 0.0;
  int iterations = 0;
};

struct Infeasible {
  MinimaxSolution minimax;
};

using ConstrainedResult = std::variant<ConstrainedSolution, Infeasible>;

/// min f_0 s.t. f_k <= 0 over the box. Infeasible exactly when the minimax
/// value exceeds tol.feasibility.
ConstrainedResult solve_constrained(const ProxQuadratic& objective,
                                    const std::vector<ProxQuadratic>& constraints, const BoxDomain& box,
                                    const Tolerances& tol = {});

struct KktReport {
  double stationarity = 0.0;     // || x - clip(x - grad L) ||
  double feasibility = 0.0;      // max(0, max_k f_k)
  double complementarity = 0.0;  // max_k |mu_k f_k|
  double dual_feasibility = 0.0; // max(0, -min_k mu_k)
};

KktReport kkt_residuals(const ProxQuadratic& objective, const std::vector<ProxQuadratic>& constraints,
                        const BoxDomain& box, const RVec& x, const RVec& mu);

}  // namespace ttsbf::qcqp

#endif  // TTSBF_QCQP_HPP
