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

#include <algorithm>
#include <cmath>
#include <numeric>

namespace ttsbf::channel {

void SystemDims::validate() const {
  require(M >= 1, "SystemDims: M must be >= 1");
  require(K >= 1, "SystemDims: K must be >= 1");
  require(Ny >= 1 && Nz >= 1, "SystemDims: Ny, Nz must be >= 1");
}

double PathLossParams::exponent(Link link) const {
  switch (link) {
    case Link::kApUser: return alpha_au;
    case Link::kApIrs: return alpha_ai;
    case Link::kIrsUser: return alpha_iu;
  }
  return alpha_au;
}

void PathLossParams::validate() const {
  require(alpha_au > 0 && alpha_ai > 0 && alpha_iu > 0, "PathLossParams: exponents must be > 0");
  require(d_a > 0 && d_i > 0, "PathLossParams: element spacings must be > 0");
  require(d0 > 0 && fc > 0, "PathLossParams: reference distance and carrier must be > 0");
  require(ap_pos.allFinite() && irs_pos.allFinite(), "PathLossParams: positions must be finite");
  for (const auto& p : user_pos) require(p.allFinite(), "PathLossParams: user position not finite");
}

void CdlLinkModel::calibrate() {
  require(!cluster_powers.empty(), "CdlLinkModel: at least one cluster required");
  require(angles.size() == cluster_powers.size(), "CdlLinkModel: one angle set per cluster");
  require(los_ratio >= 0.0 && los_ratio <= 1.0, "CdlLinkModel: LoS ratio must lie in [0,1]");
  require(link_gain > 0.0, "CdlLinkModel: link gain must be > 0");
  for (double p : cluster_powers) require(p >= 0.0, "CdlLinkModel: cluster powers must be >= 0");

  const std::size_t q = cluster_powers.size();
  if (q == 1) {
    require(los_ratio == 1.0, "CdlLinkModel: a single-cluster link is pure LoS (beta = 1)");
    cluster_powers[0] = 1.0;
    calibrated = true;
    return;
  }
  double nlos = std::accumulate(cluster_powers.begin() + 1, cluster_powers.end(), 0.0);
  if (nlos <= 0.0) {
    std::fill(cluster_powers.begin() + 1, cluster_powers.end(), 1.0);
    nlos = static_cast<double>(q - 1);
  }
  const double scale = (1.0 - los_ratio) / nlos;
  for (std::size_t i = 1; i < q; ++i) cluster_powers[i] *= scale;
  cluster_powers[0] = los_ratio;
  calibrated = true;
}

double CdlLinkModel::expected_los_ratio() const {
  const double total = std::accumulate(cluster_powers.begin(), cluster_powers.end(), 0.0);
  return total > 0.0 ? cluster_powers.front() / total : 0.0;
}

bool ChannelSample::all_finite() const {
  if (!G.allFinite() || !noise_vars.allFinite()) return false;
  for (const auto& v : h_r)
    if (!v.allFinite()) return false;
  for (const auto& v : h_d)
    if (!v.allFinite()) return false;
  return true;
}

CVec ula_response(int M, double d_a, double aod) {
  require(M >= 1, "ula_response: M must be >= 1");
  CVec a(M);
  const double phase = -kTwoPi * d_a * std::sin(aod);
  for (int m = 0; m < M; ++m) a[m] = std::polar(1.0, phase * m);
  return a;
}

CVec upa_response(int Ny, int Nz, double d_i, double azimuth, double elevation) {
  require(Ny >= 1 && Nz >= 1, "upa_response: Ny, Nz must be >= 1");
  const int n_total = Ny * Nz;
  CVec a(n_total);
  const double sz = std::sin(elevation) * std::sin(azimuth);
  const double sy = std::sin(elevation) * std::cos(azimuth);
  for (int n = 0; n < n_total; ++n) {
    const int row = n / Ny;
    const int col = n - row * Ny;
    a[n] = std::polar(1.0, -kTwoPi * d_i * (row * sz + col * sy));
  }
  return a;
}

double path_loss_gain(const PathLossParams& params, Link link, double distance) {
  require(distance > 0.0 && std::isfinite(distance), "path_loss_gain: distance must be > 0");
  return db_to_linear(params.c0_db) * std::pow(distance / params.d0, -params.exponent(link));
}

ScsiModel::ScsiModel(SystemDims dims, PathLossParams pathloss, RVec noise_vars, CdlLinkModel ap_irs,
                     std::vector<CdlLinkModel> ap_user, std::vector<CdlLinkModel> irs_user)
    : dims_(dims),
      pathloss_(std::move(pathloss)),
      noise_vars_(std::move(noise_vars)),
      ap_irs_(std::move(ap_irs)),
      ap_user_(std::move(ap_user)),
      irs_user_(std::move(irs_user)) {
  dims_.validate();
  pathloss_.validate();
  const int K = dims_.K, M = dims_.M, N = dims_.N();
  require(noise_vars_.size() == K, "ScsiModel: one noise variance per user");
  require((noise_vars_.array() > 0.0).all(), "ScsiModel: noise variances must be > 0");
  require(static_cast<int>(ap_user_.size()) == K && static_cast<int>(irs_user_.size()) == K,
          "ScsiModel: one AP-user and one IRS-user link per user");
  auto check = [](const CdlLinkModel& l) {
    if (!l.calibrated) throw InvalidArgument("ScsiModel: link model is not calibrated");
  };
  check(ap_irs_);
  for (const auto& l : ap_user_) check(l);
  for (const auto& l : irs_user_) check(l);

  const double d_a = pathloss_.d_a, d_i = pathloss_.d_i;
  for (const auto& ang : ap_irs_.angles) {
    const CVec a_t = ula_response(M, d_a, ang.aod);
    const CVec a_i = upa_response(dims_.Ny, dims_.Nz, d_i, ang.azimuth, ang.elevation);
    g_atoms_.push_back(a_i * a_t.adjoint());
  }
  hd_atoms_.resize(K);
  hr_atoms_.resize(K);
  for (int k = 0; k < K; ++k) {
    for (const auto& ang : ap_user_[k].angles) hd_atoms_[k].push_back(ula_response(M, d_a, ang.aod));
    for (const auto& ang : irs_user_[k].angles)
      hr_atoms_[k].push_back(upa_response(dims_.Ny, dims_.Nz, d_i, ang.azimuth, ang.elevation));
  }
  (void)N;
}

namespace {

cplx draw_cn(Rng& rng, double variance) {
  std::normal_distribution<double> nd(0.0, std::sqrt(0.5 * variance));
  const double re = nd(rng);
  const double im = nd(rng);
  return {re, im};
}

template <typename Atom>
Atom superpose(const CdlLinkModel& link, const std::vector<Atom>& atoms, Rng& rng) {
  Atom out = Atom::Zero(atoms.front().rows(), atoms.front().cols());
  for (std::size_t q = 0; q < atoms.size(); ++q) {
    const cplx p = draw_cn(rng, link.cluster_powers[q]);
    out += p * atoms[q];
  }
  out *= std::sqrt(link.link_gain);
  return out;
}

}  // namespace

ChannelSample ScsiModel::sample(Rng& rng) const {
  ChannelSample s;
  s.G = superpose(ap_irs_, g_atoms_, rng);
  const int K = dims_.K;
  s.h_r.reserve(K);
  s.h_d.reserve(K);
  for (int k = 0; k < K; ++k) {
    s.h_r.push_back(superpose(irs_user_[k], hr_atoms_[k], rng));
    s.h_d.push_back(superpose(ap_user_[k], hd_atoms_[k], rng));
  }
  s.noise_vars = noise_vars_;
  return s;
}

ChannelSample sample_channel(const ScsiModel& model, std::uint64_t seed) {
  Rng rng(seed);
  return model.sample(rng);
}

namespace {

struct UpaAngles {
  double azimuth;
  double elevation;
};

// Maps a unit direction leaving the y-z plane array onto the (azimuth,
// elevation) pair used by upa_response().
UpaAngles upa_angles_towards(const Position& dir) {
  const double lateral = std::min(1.0, std::hypot(dir.y(), dir.z()));
  return {std::atan2(dir.z(), dir.y()), std::asin(lateral)};
}

double ula_aod_towards(const Position& dir) { return std::asin(std::clamp(dir.x(), -1.0, 1.0)); }

CdlLinkModel make_link(int clusters, double beta, double gain, Rng& angle_rng) {
  CdlLinkModel link;
  link.cluster_powers.assign(clusters, 0.0);
  link.angles.resize(clusters);
  std::uniform_real_distribution<double> az(0.0, kTwoPi);
  std::uniform_real_distribution<double> el(0.0, std::numbers::pi);
  for (auto& a : link.angles) {
    a.aod = az(angle_rng);
    a.azimuth = az(angle_rng);
    a.elevation = el(angle_rng);
  }
  link.los_ratio = beta;
  link.link_gain = gain;
  if (clusters == 1) link.cluster_powers[0] = 1.0;
  link.calibrate();
  return link;
}

}  // namespace

ScsiModel make_scsi_model(const ScenarioConfig& cfg, std::uint64_t seed) {
  cfg.dims.validate();
  require(cfg.clusters >= 1, "ScenarioConfig: clusters must be >= 1");
  const int K = cfg.dims.K;
  Rng rng(derive_seed(seed, SeedDomain::kModel));

  PathLossParams pl = cfg.pathloss;
  if (pl.user_pos.empty()) {
    std::uniform_real_distribution<double> ang(0.0, std::numbers::pi);
    for (int k = 0; k < K; ++k) {
      const double phi = ang(rng);
      pl.user_pos.push_back(cfg.user_center +
                            cfg.user_radius * Position(std::cos(phi), std::sin(phi), 0.0));
    }
  }
  require(static_cast<int>(pl.user_pos.size()) == K, "ScenarioConfig: one position per user");
  pl.validate();

  const Position ap_to_irs = (pl.irs_pos - pl.ap_pos);
  CdlLinkModel ap_irs =
      make_link(cfg.clusters, cfg.beta_ai, path_loss_gain(pl, Link::kApIrs, ap_to_irs.norm()), rng);
  if (cfg.geometric_los) {
    const Position u = ap_to_irs.normalized();
    const UpaAngles at_irs = upa_angles_towards(-u);
    ap_irs.angles[0] = {ula_aod_towards(u), at_irs.azimuth, at_irs.elevation};
  }

  std::vector<CdlLinkModel> ap_user, irs_user;
  for (int k = 0; k < K; ++k) {
    const Position d_au = pl.user_pos[k] - pl.ap_pos;
    const Position d_iu = pl.user_pos[k] - pl.irs_pos;
    CdlLinkModel au = make_link(cfg.clusters, cfg.beta_au, path_loss_gain(pl, Link::kApUser, d_au.norm()), rng);
    CdlLinkModel iu = make_link(cfg.clusters, cfg.beta_iu, path_loss_gain(pl, Link::kIrsUser, d_iu.norm()), rng);
    if (cfg.geometric_los) {
      au.angles[0].aod = ula_aod_towards(d_au.normalized());
      const UpaAngles a = upa_angles_towards(d_iu.normalized());
      iu.angles[0].azimuth = a.azimuth;
      iu.angles[0].elevation = a.elevation;
    }
    ap_user.push_back(std::move(au));
    irs_user.push_back(std::move(iu));
  }
  RVec noise = RVec::Constant(K, dbm_to_watts(cfg.noise_dbm));
  return ScsiModel(cfg.dims, std::move(pl), std::move(noise), std::move(ap_irs), std::move(ap_user),
                   std::move(irs_user));
}

std::vector<CVec> effective_channel(const ChannelSample& sample, const PhaseVector& theta) {
  const int N = sample.N(), K = sample.K();
  require(theta.size() == N, "effective_channel: theta length must equal N");
  require(static_cast<int>(sample.h_r.size()) == K, "effective_channel: h_r/h_d user count mismatch");
  for (int k = 0; k < K; ++k)
    require(sample.h_r[k].size() == N && sample.h_d[k].size() == sample.M(),
            "effective_channel: channel dimension mismatch");
  // Same operation order as the cascade form, so both agree bit for bit.
  return effective_channel(cascaded_channels(sample), sample.h_d, theta);
}

std::vector<CMat> cascaded_channels(const ChannelSample& sample) {
  std::vector<CMat> out;
  out.reserve(sample.K());
  for (int k = 0; k < sample.K(); ++k)
    out.push_back(sample.G.adjoint() * sample.h_r[k].asDiagonal());
  return out;
}

std::vector<CVec> effective_channel(const std::vector<CMat>& cascades, const std::vector<CVec>& h_d,
                                    const PhaseVector& theta) {
  require(cascades.size() == h_d.size(), "effective_channel: cascade/direct user count mismatch");
  const Eigen::Index N = theta.size();
  CVec phasor(N);
  for (Eigen::Index n = 0; n < N; ++n) phasor[n] = std::polar(1.0, -theta[n]);
  std::vector<CVec> out;
  out.reserve(h_d.size());
  for (std::size_t k = 0; k < h_d.size(); ++k) {
    require(cascades[k].cols() == N, "effective_channel: theta length must equal N");
    out.push_back(cascades[k] * phasor + h_d[k]);
  }
  return out;
}

double doppler_hz(double speed_kmh, double fc) { return (speed_kmh / 3.6) * fc / kSpeedOfLight; }

double ar_coefficient(double delay_ms, double speed_kmh, double fc) {
  require(delay_ms >= 0.0, "ar_coefficient: delay must be >= 0");
  return bessel_j0(kTwoPi * doppler_hz(speed_kmh, fc) * delay_ms * 1e-3);
}

ChannelSample apply_csi_delay(const ChannelSample& old_sample, const ChannelSample& innovation,
                              double delay_ms, double speed_kmh, double fc) {
  require(delay_ms >= 0.0, "apply_csi_delay: delay must be >= 0");
  if (delay_ms == 0.0) return old_sample;
  require(innovation.G.rows() == old_sample.G.rows() && innovation.G.cols() == old_sample.G.cols() &&
              innovation.K() == old_sample.K(),
          "apply_csi_delay: innovation dimensions must match");
  const double rho = ar_coefficient(delay_ms, speed_kmh, fc);
  const double nu = std::sqrt(std::max(0.0, 1.0 - rho * rho));
  ChannelSample out = old_sample;
  out.G = rho * old_sample.G + nu * innovation.G;
  for (int k = 0; k < old_sample.K(); ++k) {
    out.h_r[k] = rho * old_sample.h_r[k] + nu * innovation.h_r[k];
    out.h_d[k] = rho * old_sample.h_d[k] + nu * innovation.h_d[k];
  }
  return out;
}

double full_csi_delay_factor(const SystemDims& dims) {
  const double M = dims.M, K = dims.K, N = dims.N();
  return (N * K + M * K + N * M) / (M * K);
}

}  // namespace ttsbf::channel
