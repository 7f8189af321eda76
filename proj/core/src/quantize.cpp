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

#include "ttsbf/quantize.hpp"

#include <cmath>

namespace ttsbf::quantize {

DiscreteGrid DiscreteGrid::with_bits(int q) {
  require(q >= 1 && q <= 30, "DiscreteGrid: bits must be in [1, 30]");
  return DiscreteGrid{q};
}

int DiscreteGrid::levels() const {
  require(bits.has_value(), "DiscreteGrid: continuous grid has no levels");
  return 1 << *bits;
}

double DiscreteGrid::spacing() const { return kTwoPi / levels(); }

double circular_distance(double a, double b) {
  double d = std::fmod(std::abs(a - b), kTwoPi);
  return std::min(d, kTwoPi - d);
}

PhaseVector project_phases(const PhaseVector& theta, const DiscreteGrid& grid) {
  if (grid.is_continuous()) return cssca::wrap_phases(theta);
  const int L = grid.levels();
  const double step = grid.spacing();
  PhaseVector out(theta.size());
  for (Eigen::Index n = 0; n < theta.size(); ++n) {
    const double th = cssca::wrap_phases(theta.segment(n, 1))[0];
    const int lo = std::min(static_cast<int>(std::floor(th / step)), L - 1);
    const int hi = (lo + 1) % L;
    const double d_lo = circular_distance(th, lo * step);
    const double d_hi = circular_distance(th, hi * step);
    int pick;
    if (d_lo < d_hi)
      pick = lo;
    else if (d_hi < d_lo)
      pick = hi;
    else
      pick = std::min(lo, hi);
    out[n] = pick * step;
  }
  return out;
}

RVec reoptimize_multipliers(const channel::ScsiModel& scsi, const PhaseVector& theta_d,
                            cssca::CsscaConfig config) {
  require(theta_d.size() == scsi.dims().N(), "reoptimize_multipliers: theta_d has the wrong length");
  config.theta_init = theta_d;
  config.freeze_theta = true;
  config.freeze_lambda = false;
  return cssca::optimize_long_term(scsi, config).lambda;
}

}  // namespace ttsbf::quantize
