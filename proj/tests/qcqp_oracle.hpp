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


#ifndef TTSBF_TESTS_QCQP_ORACLE_HPP
#define TTSBF_TESTS_QCQP_ORACLE_HPP

// Reference values for small prox-quadratic programs. Every function is
// convex, so nested one-dimensional searches are exact up to round-off:
// golden-section for the minimax value, and for the constrained problem
// bisection on the (convex) feasible slice followed by golden-section on the
// partial minimum. The innermost coordinate is handled in closed form.

#include "ttsbf/qcqp.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <vector>

namespace ttsbf::test {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct GoldenResult {
  double x;
  double value;
};

inline GoldenResult golden_min(const std::function<double(double)>& f, double lo, double hi, int iters = 50) {
  const double r = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = lo, b = hi;
  double c = b - r * (b - a), d = a + r * (b - a);
  double fc = f(c), fd = f(d);
  for (int i = 0; i < iters; ++i) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - r * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + r * (b - a);
      fd = f(d);
    }
  }
  GoldenResult best{lo, f(lo)};
  for (double x : {hi, c, d}) {
    const double v = f(x);
    if (v < best.value) best = {x, v};
  }
  return best;
}

class QcqpOracle {
 public:
  QcqpOracle(const qcqp::ProxQuadratic& objective, std::vector<qcqp::ProxQuadratic> constraints,
             const qcqp::BoxDomain& box)
      : obj_(objective), cons_(std::move(constraints)), box_(box), n_(box.dim()) {}

  /// min over the box of max_k f_k.
  double minimax() const {
    RVec x = box_.lower;
    return minimax_from(x, 0);
  }

  /// min f_0 s.t. f_k <= 0 over the box; +inf when infeasible.
  double constrained() const {
    RVec x = box_.lower;
    return constrained_from(x, 0);
  }

 private:
  // Coefficients of f restricted to coordinate i: a y^2 + b y + c.
  void restrict(const qcqp::ProxQuadratic& f, const RVec& x, int i, double& a, double& b, double& c) const {
    const double x0 = f.center[i];
    a = f.tau;
    b = f.linear[i] - 2.0 * f.tau * x0;
    RVec z = x;
    z[i] = 0.0;
    c = f.value(z);
  }

  double max_cons(const RVec& x) const {
    double m = -kInf;
    for (const auto& f : cons_) m = std::max(m, f.value(x));
    return m;
  }

  double minimax_from(RVec& x, int i) const {
    if (i == n_ - 1) {
      return golden_min(
                 [&](double y) {
                   x[i] = y;
                   return max_cons(x);
                 },
                 box_.lower[i], box_.upper[i])
          .value;
    }
    return golden_min(
               [&](double y) {
                 x[i] = y;
                 RVec tail = x;
                 return minimax_from(tail, i + 1);
               },
               box_.lower[i], box_.upper[i])
        .value;
  }

  // Last coordinate: intersect the sublevel intervals, minimize f_0 on it.
  double last_coordinate(RVec& x) const {
    const int i = n_ - 1;
    double lo = box_.lower[i], hi = box_.upper[i];
    for (const auto& f : cons_) {
      double a, b, c;
      restrict(f, x, i, a, b, c);
      const double disc = b * b - 4.0 * a * c;
      if (disc < 0.0) return kInf;
      const double s = std::sqrt(disc);
      lo = std::max(lo, (-b - s) / (2.0 * a));
      hi = std::min(hi, (-b + s) / (2.0 * a));
    }
    if (lo > hi) return kInf;
    double a, b, c;
    restrict(obj_, x, i, a, b, c);
    const double y = std::clamp(-b / (2.0 * a), lo, hi);
    x[i] = y;
    return obj_.value(x);
  }

  double constrained_from(RVec& x, int i) const {
    if (i == n_ - 1) return last_coordinate(x);
    auto slack = [&](double y) {
      RVec t = x;
      t[i] = y;
      return minimax_from(t, i + 1);
    };
    const GoldenResult m = golden_min(slack, box_.lower[i], box_.upper[i]);
    if (m.value > 0.0) return kInf;
    auto boundary = [&](double feasible, double other) {
      if (slack(other) <= 0.0) return other;
      for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (feasible + other);
        (slack(mid) <= 0.0 ? feasible : other) = mid;
      }
      return feasible;
    };
    const double a = boundary(m.x, box_.lower[i]);
    const double b = boundary(m.x, box_.upper[i]);
    auto partial = [&](double y) {
      RVec t = x;
      t[i] = y;
      const double v = constrained_from(t, i + 1);
      return std::isfinite(v) ? v : 1e300;
    };
    return golden_min(partial, a, b).value;
  }

  qcqp::ProxQuadratic obj_;
  std::vector<qcqp::ProxQuadratic> cons_;
  qcqp::BoxDomain box_;
  int n_;
};

/// Exhaustive search over a uniform grid with the given step. Functions are
/// separable, so each one is tabulated per coordinate; the last coordinate is
/// resolved by index search on the (convex) tabulated sequences, which makes
/// a 1e-3 grid affordable in three dimensions.
class GridOracle {
 public:
  GridOracle(const qcqp::ProxQuadratic& objective, const std::vector<qcqp::ProxQuadratic>& constraints,
             const qcqp::BoxDomain& box, double step)
      : n_(box.dim()), K_(static_cast<int>(constraints.size())) {
    std::vector<const qcqp::ProxQuadratic*> all{&objective};
    for (const auto& c : constraints) all.push_back(&c);
    for (int d = 0; d < n_; ++d) points_.push_back(static_cast<int>(std::floor((box.upper[d] - box.lower[d]) / step + 1e-9)) + 1);
    table_.resize(all.size());
    base_.resize(all.size());
    for (std::size_t f = 0; f < all.size(); ++f) {
      base_[f] = all[f]->constant;
      table_[f].resize(n_);
      for (int d = 0; d < n_; ++d) {
        table_[f][d].resize(points_[d]);
        for (int i = 0; i < points_[d]; ++i) {
          const double t = box.lower[d] + i * step - all[f]->center[d];
          table_[f][d][i] = all[f]->linear[d] * t + all[f]->tau * t * t;
        }
      }
    }
  }

  /// Smallest grid value of f_0 over grid points with every f_k <= 0; +inf if none.
  double constrained() const {
    const int last = n_ - 1;
    const auto& obj = table_[0][last];
    const int obj_min = argmin(obj);
    double best = std::numeric_limits<double>::infinity();
    for_outer([&](const std::vector<double>& partial) {
      int lo = 0, hi = points_[last] - 1;
      for (int k = 1; k <= K_ && lo <= hi; ++k) {
        const auto& t = table_[k][last];
        const double limit = -partial[k];
        const int m = argmin(t);
        if (t[m] > limit) {
          lo = 1;
          hi = 0;
          break;
        }
        // First index on the falling side and last on the rising side that meet the limit.
        int a = 0, b = m;
        while (a < b) {
          const int mid = (a + b) / 2;
          if (t[mid] <= limit) b = mid; else a = mid + 1;
        }
        int c = m, e = points_[last] - 1;
        while (c < e) {
          const int mid = (c + e + 1) / 2;
          if (t[mid] <= limit) c = mid; else e = mid - 1;
        }
        lo = std::max(lo, a);
        hi = std::min(hi, c);
      }
      if (lo > hi) return;
      const int z = std::clamp(obj_min, lo, hi);
      best = std::min(best, partial[0] + obj[z]);
    });
    return best;
  }

  /// Smallest grid value of max_k f_k.
  double minimax() const {
    const int last = n_ - 1;
    double best = std::numeric_limits<double>::infinity();
    for_outer([&](const std::vector<double>& partial) {
      auto g = [&](int z) {
        double v = -std::numeric_limits<double>::infinity();
        for (int k = 1; k <= K_; ++k) v = std::max(v, partial[k] + table_[k][last][z]);
        return v;
      };
      int a = 0, b = points_[last] - 1;
      while (a < b) {
        const int mid = (a + b) / 2;
        if (g(mid + 1) >= g(mid)) b = mid; else a = mid + 1;
      }
      best = std::min(best, g(a));
    });
    return best;
  }

 private:
  static int argmin(const std::vector<double>& v) {
    return static_cast<int>(std::min_element(v.begin(), v.end()) - v.begin());
  }

  // Calls fn with base + sum of outer-coordinate terms for every outer grid point.
  template <class Fn>
  void for_outer(Fn&& fn) const {
    const int outer = n_ - 1;
    std::vector<int> idx(outer, 0);
    std::vector<double> partial(table_.size());
    for (;;) {
      for (std::size_t f = 0; f < table_.size(); ++f) {
        partial[f] = base_[f];
        for (int d = 0; d < outer; ++d) partial[f] += table_[f][d][idx[d]];
      }
      fn(partial);
      int d = outer - 1;
      while (d >= 0 && ++idx[d] == points_[d]) idx[d--] = 0;
      if (d < 0) return;
    }
  }

  int n_;
  int K_;
  std::vector<int> points_;
  std::vector<double> base_;
  std::vector<std::vector<std::vector<double>>> table_;  // [function][coordinate][index]
};

struct RandomQcqp {
  qcqp::ProxQuadratic objective;
  std::vector<qcqp::ProxQuadratic> constraints;
  qcqp::BoxDomain box;
};

/// dim in {2, 3}; one to three constraints on [0, 1]^dim.
inline RandomQcqp random_qcqp(std::mt19937_64& rng, int dim) {
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  std::uniform_int_distribution<int> nk(1, 3);
  RandomQcqp p;
  p.box.lower = RVec::Zero(dim);
  p.box.upper = RVec::Ones(dim);
  RVec c(dim);
  for (auto& v : c) v = 0.5 + 0.4 * U(rng);
  auto make = [&](double k0) {
    qcqp::ProxQuadratic f;
    f.constant = k0;
    f.linear = RVec(dim);
    for (auto& v : f.linear) v = 2.0 * U(rng);
    f.tau = 1.0 + 0.4 * U(rng);
    f.center = c;
    return f;
  };
  p.objective = make(U(rng));
  const int K = nk(rng);
  for (int k = 0; k < K; ++k) p.constraints.push_back(make(0.3 * U(rng)));
  return p;
}

}  // namespace ttsbf::test

#endif  // TTSBF_TESTS_QCQP_ORACLE_HPP
