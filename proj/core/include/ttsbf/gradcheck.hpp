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

#ifndef TTSBF_GRADCHECK_HPP
#define TTSBF_GRADCHECK_HPP

#include "ttsbf/channel.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace ttsbf::unfold {

struct GradcheckOptions {
  int instances = 20;
  int M = 2;
  int N = 4;
  int K = 2;
  int J = 3;
  std::uint64_t seed = 1;
  double tolerance = 1e-5;
  std::vector<double> steps{1e-4, 1e-5};
};

struct GradcheckRow {
  int instance = 0;
  std::string quantity;  // e.g. "power/theta", "rate_2/lambda", "rate_1/theta_direct"
  double rel_error = 0.0;
  bool pass = false;
};

struct GradcheckReport {
  std::vector<GradcheckRow> rows;
  double tolerance = 0.0;

  bool all_pass() const;
  double max_error() const;
};

/// Unit-variance Rayleigh instance with unit noise; used by the gradient checks.
channel::ChannelSample gradcheck_instance(int M, int N, int K, std::uint64_t seed);

/// Central differences of f around x, one coordinate at a time.
RVec central_difference(const std::function<double(const RVec&)>& f, const RVec& x, double step);

/// ||analytic - fd||_inf / ||fd||_inf, minimized over the steps.
double fd_relative_error(const std::function<double(const RVec&)>& f, const RVec& x, const RVec& analytic,
                         const std::vector<double>& steps);

GradcheckReport gradcheck(const GradcheckOptions& opts);

void write_gradcheck_table(std::ostream& os, const GradcheckReport& report);

}  // namespace ttsbf::unfold

#endif  // TTSBF_GRADCHECK_HPP
