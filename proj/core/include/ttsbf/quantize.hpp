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

#ifndef TTSBF_QUANTIZE_HPP
#define TTSBF_QUANTIZE_HPP

#include "ttsbf/cssca.hpp"

#include <optional>

namespace ttsbf::quantize {

/// L = 2^Q levels {0, 2pi/L, ..., 2pi(L-1)/L}. An empty bit count means
/// continuous phases.
struct DiscreteGrid {
  std::optional<int> bits;

  static DiscreteGrid continuous() { return {}; }
  static DiscreteGrid with_bits(int q);
  bool is_continuous() const { return !bits.has_value(); }
  int levels() const;
  double spacing() const;
};

/// Nearest level in circular distance; ties go to the smaller level.
PhaseVector project_phases(const PhaseVector& theta, const DiscreteGrid& grid);

/// Smallest |a - b| modulo 2pi.
double circular_distance(double a, double b);

/// Reruns the long-term loop with theta pinned to theta_d; lambda starts
/// from config.lambda_init (or ones).
RVec reoptimize_multipliers(const channel::ScsiModel& scsi, const PhaseVector& theta_d,
                            cssca::CsscaConfig config);

}  // namespace ttsbf::quantize

#endif  // TTSBF_QUANTIZE_HPP
