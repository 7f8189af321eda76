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

#include "ttsbf/channel.hpp"

#include <cmath>

namespace ttsbf::channel {

namespace {

// Ascending series; terms peak near m = x/2, so cancellation stays below
// ~1e-12 absolute for |x| <= 12.
double j0_series(double x) {
  const double q = 0.25 * x * x;
  double term = 1.0;
  double sum = 1.0;
  for (int m = 1; m < 200; ++m) {
    term *= -q / (static_cast<double>(m) * m);
    sum += term;
    if (std::abs(term) < 1e-17 * std::abs(sum) && m > 2) break;
  }
  return sum;
}

// Hankel asymptotic expansion, truncated at its smallest term.
double j0_asymptotic(double x) {
  double p = 0.0, q = 0.0;
  double a = 1.0;  // a_k / x^k
  double last = 1.0;
  for (int k = 0; k < 60; ++k) {
    if (k > 0) {
      const double odd = 2.0 * k - 1.0;
      const double next = a * odd * odd / (8.0 * k * x);
      if (std::abs(next) > std::abs(last)) break;
      a = next;
      last = next;
    }
    // a_k carries (-1)^k for order zero, which flips the sign of the odd terms.
    const double signed_a = (k / 2) % 2 == 0 ? a : -a;
    if (k % 2 == 0)
      p += signed_a;
    else
      q -= signed_a;
    if (std::abs(a) < 1e-17) break;
  }
  const double chi = x - 0.25 * std::numbers::pi;
  return std::sqrt(2.0 / (std::numbers::pi * x)) * (p * std::cos(chi) - q * std::sin(chi));
}

}  // namespace

double bessel_j0(double x) {
  x = std::abs(x);
  return x <= 12.0 ? j0_series(x) : j0_asymptotic(x);
}

}  // namespace ttsbf::channel
