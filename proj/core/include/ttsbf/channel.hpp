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

#ifndef TTSBF_CHANNEL_HPP
#define TTSBF_CHANNEL_HPP

#include "ttsbf/rng.hpp"
#include "ttsbf/types.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace ttsbf::channel {

struct SystemDims {
  int M = 1;   // AP antennas
  int Ny = 1;  // IRS elements along y
  int Nz = 1;  // IRS elements along z
  int K = 1;   // single-antenna users

  int N() const { return Ny * Nz; }
  void validate() const;
};

enum class Link { kApUser, kApIrs, kIrsUser };

using Position = Eigen::Vector3d;

struct PathLossParams {
  double c0_db = -30.0;  // path loss at the reference distance
  double d0 = 1.0;       // reference distance [m]
  double alpha_au = 3.6;
  double alpha_ai = 2.2;
  double alpha_iu = 2.2;
  Position ap_pos{2.0, 0.0, 0.0};
  Position irs_pos{0.0, 50.0, 3.0};
  std::vector<Position> user_pos;
  double d_a = 0.5;    // AP antenna spacing [wavelengths]
  double d_i = 0.125;  // IRS element spacing [wavelengths]
  double fc = 5e9;     // carrier [Hz]

  double exponent(Link link) const;
  void validate() const;
};

/// Geometry of one cluster. The ULA side uses `aod`; the UPA side uses
/// `azimuth`/`elevation`. Unused fields are ignored.
struct ClusterAngles {
  double aod = 0.0;
  double azimuth = 0.0;
  double elevation = 0.0;
};

/// One clustered link. Cluster 0 is the line-of-sight cluster.
struct CdlLinkModel {
  std::vector<double> cluster_powers;  // sigma_q^2, normalized after calibrate()
  std::vector<ClusterAngles> angles;
  double los_ratio = 0.0;  // beta in [0,1]
  double link_gain = 1.0;  // linear path-loss gain L
  bool calibrated = false;

  int clusters() const { return static_cast<int>(cluster_powers.size()); }

  /// Rescales the LoS cluster to carry exactly `los_ratio` of the expected
  /// power and spreads the rest over the NLoS clusters in their current
  /// proportions (equal split if they are all zero).
  void calibrate();

  /// E[|LoS term|^2] / E[|all terms|^2]; steering vectors are unit modulus, so
  /// this is sigma_0^2 / sum_q sigma_q^2.
  double expected_los_ratio() const;
};

/// One realization of the full channel ensemble {G, h_r,k, h_d,k}.
struct ChannelSample {
  CMat G;                  // N x M, AP -> IRS
  std::vector<CVec> h_r;   // K entries of length N, IRS -> user
  std::vector<CVec> h_d;   // K entries of length M, AP -> user
  RVec noise_vars;         // sigma_k^2 [W]

  int M() const { return static_cast<int>(G.cols()); }
  int N() const { return static_cast<int>(G.rows()); }
  int K() const { return static_cast<int>(h_d.size()); }
  bool all_finite() const;
};

/// Immutable statistical-CSI description. Steering vectors are precomputed,
/// so sampling only draws the complex cluster gains.
class ScsiModel {
 public:
  ScsiModel(SystemDims dims, PathLossParams pathloss, RVec noise_vars, CdlLinkModel ap_irs,
            std::vector<CdlLinkModel> ap_user, std::vector<CdlLinkModel> irs_user);

  const SystemDims& dims() const { return dims_; }
  const PathLossParams& pathloss() const { return pathloss_; }
  const RVec& noise_vars() const { return noise_vars_; }
  const CdlLinkModel& ap_irs() const { return ap_irs_; }
  const CdlLinkModel& ap_user(int k) const { return ap_user_.at(k); }
  const CdlLinkModel& irs_user(int k) const { return irs_user_.at(k); }

  ChannelSample sample(Rng& rng) const;

 private:
  SystemDims dims_;
  PathLossParams pathloss_;
  RVec noise_vars_;
  CdlLinkModel ap_irs_;
  std::vector<CdlLinkModel> ap_user_;
  std::vector<CdlLinkModel> irs_user_;
  // Precomputed per-cluster responses.
  std::vector<CMat> g_atoms_;                  // N x M rank-one atoms a_I a_T^H
  std::vector<std::vector<CVec>> hd_atoms_;    // [k][q] length M
  std::vector<std::vector<CVec>> hr_atoms_;    // [k][q] length N
};

/// Scenario knobs used to build a ScsiModel.
struct ScenarioConfig {
  SystemDims dims{6, 4, 10, 3};
  PathLossParams pathloss;
  double beta_ai = 0.0;
  double beta_au = 0.0;
  double beta_iu = 0.0;
  int clusters = 6;
  double noise_dbm = -80.0;
  /// Radius/center of the user semicircle when user_pos is empty.
  Position user_center{2.0, 50.0, 0.0};
  double user_radius = 3.0;
  /// LoS cluster angles follow the geometry; NLoS angles are drawn from the
  /// model seed.
  bool geometric_los = true;
};

/// Builds a calibrated model. Cluster angles and (if not given) user
/// positions are drawn from `seed` under SeedDomain::kModel.
ScsiModel make_scsi_model(const ScenarioConfig& cfg, std::uint64_t seed);

/// [a]_m = exp(-j 2 pi m d sin(aod)), m = 0..M-1, d in wavelengths.
CVec ula_response(int M, double d_a, double aod);

/// [a]_n = exp(-j 2 pi d (floor(n/Ny) sin(el) sin(az) + (n mod Ny) sin(el) cos(az))).
CVec upa_response(int Ny, int Nz, double d_i, double azimuth, double elevation);

/// L = C0 (d / D0)^(-alpha).
double path_loss_gain(const PathLossParams& params, Link link, double distance);

ChannelSample sample_channel(const ScsiModel& model, std::uint64_t seed);

/// h~_k = G^H diag(e^{j theta})^H h_r,k + h_d,k for every user.
std::vector<CVec> effective_channel(const ChannelSample& sample, const PhaseVector& theta);

/// C_k = G^H diag(h_r,k): the M x N matrix with h~_k = C_k e^{-j theta} + h_d,k.
std::vector<CMat> cascaded_channels(const ChannelSample& sample);

/// h~_k from precomputed cascades; matches effective_channel().
std::vector<CVec> effective_channel(const std::vector<CMat>& cascades, const std::vector<CVec>& h_d,
                                    const PhaseVector& theta);

/// f_d = v f_c / c with v in km/h.
double doppler_hz(double speed_kmh, double fc);

/// rho = J0(2 pi f_d delay).
double ar_coefficient(double delay_ms, double speed_kmh, double fc);

/// AR(1) aging applied to each block: h = rho h_old + sqrt(1 - rho^2) e.
ChannelSample apply_csi_delay(const ChannelSample& old_sample, const ChannelSample& innovation,
                              double delay_ms, double speed_kmh, double fc);

/// (NK + MK + NM) / (MK): delay of full-CSI acquisition relative to the
/// effective-channel delay.
double full_csi_delay_factor(const SystemDims& dims);

/// Bessel function of the first kind, order zero.
double bessel_j0(double x);

}  // namespace ttsbf::channel

#endif  // TTSBF_CHANNEL_HPP
