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

#ifndef TTSBF_CHANNEL_IO_HPP
#define TTSBF_CHANNEL_IO_HPP

#include "ttsbf/channel.hpp"

#include <string>
#include <vector>

namespace ttsbf::channel {

// Binary channel dump for cross-implementation comparison.
//
// <stem>.bin holds, per sample and in this order: G (N x M), h_r[0..K-1]
// (N each), h_d[0..K-1] (M each) as little-endian interleaved re/im doubles
// in row-major order, followed by the K noise variances as plain doubles.
// <stem>.json records {"format", "M", "N", "K", "count", "layout"}.
void write_channel_dump(const std::string& stem, const std::vector<ChannelSample>& samples);
std::vector<ChannelSample> read_channel_dump(const std::string& stem);

}  // namespace ttsbf::channel

#endif  // TTSBF_CHANNEL_IO_HPP
