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

#include "ttsbf/channel_io.hpp"

#include <json.hpp>

#include <bit>
#include <cstring>
#include <fstream>

namespace ttsbf::channel {

namespace {

static_assert(std::endian::native == std::endian::little,
              "channel dumps are written in native order; big-endian hosts need a byte swap");

void put(std::ofstream& os, double v) { os.write(reinterpret_cast<const char*>(&v), sizeof v); }

double get(std::ifstream& is) {
  double v = 0.0;
  is.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!is) throw std::runtime_error("read_channel_dump: truncated binary file");
  return v;
}

void put(std::ofstream& os, cplx c) {
  put(os, c.real());
  put(os, c.imag());
}

cplx get_c(std::ifstream& is) {
  const double re = get(is);
  const double im = get(is);
  return {re, im};
}

}  // namespace

void write_channel_dump(const std::string& stem, const std::vector<ChannelSample>& samples) {
  require(!samples.empty(), "write_channel_dump: no samples");
  const int M = samples.front().M(), N = samples.front().N(), K = samples.front().K();
  std::ofstream bin(stem + ".bin", std::ios::binary);
  if (!bin) throw std::runtime_error("write_channel_dump: cannot open " + stem + ".bin");
  for (const auto& s : samples) {
    require(s.M() == M && s.N() == N && s.K() == K, "write_channel_dump: inconsistent dimensions");
    for (int n = 0; n < N; ++n)
      for (int m = 0; m < M; ++m) put(bin, s.G(n, m));
    for (int k = 0; k < K; ++k)
      for (int n = 0; n < N; ++n) put(bin, s.h_r[k][n]);
    for (int k = 0; k < K; ++k)
      for (int m = 0; m < M; ++m) put(bin, s.h_d[k][m]);
    for (int k = 0; k < K; ++k) put(bin, s.noise_vars[k]);
  }
  nlohmann::json meta = {
      {"format", "ttsbf-channel-dump-v1"},
      {"byte_order", "little"},
      {"M", M},
      {"N", N},
      {"K", K},
      {"count", samples.size()},
      {"layout", {"G[N][M] complex", "h_r[K][N] complex", "h_d[K][M] complex", "noise_vars[K] real"}}};
  std::ofstream js(stem + ".json");
  js << meta.dump(2) << '\n';
}

std::vector<ChannelSample> read_channel_dump(const std::string& stem) {
  std::ifstream js(stem + ".json");
  if (!js) throw std::runtime_error("read_channel_dump: cannot open " + stem + ".json");
  const nlohmann::json meta = nlohmann::json::parse(js);
  const int M = meta.at("M"), N = meta.at("N"), K = meta.at("K");
  const std::size_t count = meta.at("count");
  std::ifstream bin(stem + ".bin", std::ios::binary);
  if (!bin) throw std::runtime_error("read_channel_dump: cannot open " + stem + ".bin");
  std::vector<ChannelSample> out(count);
  for (auto& s : out) {
    s.G.resize(N, M);
    for (int n = 0; n < N; ++n)
      for (int m = 0; m < M; ++m) s.G(n, m) = get_c(bin);
    s.h_r.assign(K, CVec(N));
    s.h_d.assign(K, CVec(M));
    for (int k = 0; k < K; ++k)
      for (int n = 0; n < N; ++n) s.h_r[k][n] = get_c(bin);
    for (int k = 0; k < K; ++k)
      for (int m = 0; m < M; ++m) s.h_d[k][m] = get_c(bin);
    s.noise_vars.resize(K);
    for (int k = 0; k < K; ++k) s.noise_vars[k] = get(bin);
  }
  return out;
}

}  // namespace ttsbf::channel
