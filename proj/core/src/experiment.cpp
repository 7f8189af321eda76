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

#include "ttsbf/experiment.hpp"

#include "ttsbf/parallel.hpp"
#include "ttsbf/quantize.hpp"
#include "ttsbf/wmmse.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <ostream>

namespace ttsbf::harness {

OverheadReport overhead_report(const channel::SystemDims& dims, std::int64_t slots_per_interval) {
  require(dims.M >= 1 && dims.Ny >= 1 && dims.Nz >= 1 && dims.K >= 0, "overhead_report: invalid dims");
  require(slots_per_interval >= 1, "overhead_report: T_s must be >= 1");
  const std::int64_t M = dims.M, K = dims.K, N = static_cast<std::int64_t>(dims.Ny) * dims.Nz;
  return {M * K, N * M + N * K + M * K, N, slots_per_interval * N};
}

MetricsRecord evaluate_policy(const PhaseVector& theta, const RVec& lambda, const channel::ScsiModel& scsi,
                              const SlotEvaluation& eval, const RVec& rate_targets, int J,
                              const std::string& scheme) {
  const int K = scsi.dims().K;
  require(theta.size() == scsi.dims().N(), "evaluate_policy: theta has the wrong length");
  require(lambda.size() == K && rate_targets.size() == K, "evaluate_policy: one multiplier and target per user");
  require(J >= 1, "evaluate_policy: J must be >= 1");
  const SlotPolicy policy = [&](const channel::ChannelSample& seen, std::size_t) {
    SlotDesign d;
    d.theta = theta;
    const wmmse::ShortTermProblem prob{channel::effective_channel(seen, theta), lambda, rate_targets,
                                       seen.noise_vars};
    d.w = wmmse::solve_short_term(prob, {J, false}).w;
    return d;
  };
  return evaluate_slots(scsi, eval, policy, scheme);
}

SlotEvaluation slot_evaluation(const ExperimentConfig& cfg, std::uint64_t seed, int threads) {
  SlotEvaluation e;
  e.slots = cfg.eval_slots;
  e.seed = seed;
  e.delay = {cfg.delay_ms, cfg.speed_kmh};
  e.threads = threads;
  return e;
}

baselines::BaselineConfig baseline_config(const ExperimentConfig& cfg, std::uint64_t seed, int threads) {
  baselines::BaselineConfig b;
  b.rate_targets = cfg.rate_targets;
  b.eval = slot_evaluation(cfg, seed, threads);
  b.max_retries = cfg.max_retries;
  b.p_ref_dbm = cfg.p_ref_dbm;
  b.ao_rounds = cfg.ao_rounds;
  b.ao_grid = cfg.ao_grid;
  b.wsr = cfg.long_term(seed, threads);
  b.icsi_delay_factor = channel::full_csi_delay_factor(cfg.scenario.dims);
  b.phase_bits = cfg.quantize_bits;
  return b;
}

PddRun run_pdd(const ExperimentConfig& cfg, std::uint64_t seed, const RunOptions& opt) {
  const auto t0 = std::chrono::steady_clock::now();
  const channel::ScsiModel scsi = channel::make_scsi_model(cfg.scenario, seed);
  cssca::CsscaConfig lt = cfg.long_term(seed, opt.threads);
  PddRun run;
  run.long_term = cssca::optimize_long_term(scsi, lt);
  run.theta = run.long_term.theta;
  run.lambda = run.long_term.lambda;
  if (cfg.quantize_bits) {
    run.theta = quantize::project_phases(run.theta, quantize::DiscreteGrid::with_bits(*cfg.quantize_bits));
    lt.lambda_init = run.lambda;
    run.lambda = quantize::reoptimize_multipliers(scsi, run.theta, lt);
  }
  run.record = evaluate_policy(run.theta, run.lambda, scsi, slot_evaluation(cfg, seed, opt.threads),
                               cfg.rate_targets, cfg.short_iters, kLabelPdd);
  run.record.wall_ms =
      opt.timing ? std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count() : 0.0;
  return run;
}

MetricsRecord run_scheme(const ExperimentConfig& cfg, const std::string& scheme, std::uint64_t seed,
                         const RunOptions& opt) {
  if (scheme == kLabelPdd) return run_pdd(cfg, seed, opt).record;
  const auto t0 = std::chrono::steady_clock::now();
  const channel::ScsiModel scsi = channel::make_scsi_model(cfg.scenario, seed);
  const baselines::BaselineConfig b = baseline_config(cfg, seed, opt.threads);
  MetricsRecord m;
  if (scheme == baselines::kLabelWsrMax)
    m = baselines::baseline_tts_wsrmax(scsi, b).second;
  else if (scheme == baselines::kLabelRandomPhase)
    m = baselines::baseline_random_phase(scsi, b);
  else if (scheme == baselines::kLabelAo)
    m = baselines::baseline_icsi_ao(scsi, b);
  else
    throw InvalidArgument("run_scheme: unknown scheme '" + scheme + "'");
  m.wall_ms =
      opt.timing ? std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count() : 0.0;
  return m;
}

ExperimentConfig apply_axis(const ExperimentConfig& cfg, SweepAxis axis, double value) {
  ExperimentConfig c = cfg;
  switch (axis) {
    case SweepAxis::kNone: break;
    case SweepAxis::kBeta:
      c.scenario.beta_ai = value;
      c.scenario.beta_iu = value;
      break;
    case SweepAxis::kN:
      c.scenario.dims.Nz = static_cast<int>(std::lround(value)) / c.scenario.dims.Ny;
      break;
    case SweepAxis::kQ:
      if (value == 0.0)
        c.quantize_bits.reset();
      else
        c.quantize_bits = static_cast<int>(std::lround(value));
      break;
    case SweepAxis::kDelay: c.delay_ms = value; break;
  }
  c.sweep_axis = SweepAxis::kNone;
  c.sweep_values.clear();
  c.validate();
  return c;
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::string axis_label(SweepAxis axis, double value) {
  if (axis == SweepAxis::kNone) return "none";
  if (axis == SweepAxis::kQ && value == 0.0) return "Q=inf";
  return std::string(axis_name(axis)) + "=" + format_number(value);
}

SweepResult run_sweep(const ExperimentConfig& cfg, const RunOptions& opt) {
  require(!cfg.schemes.empty(), "run_sweep: empty scheme list");
  require(!cfg.seeds.empty(), "run_sweep: empty seed list");
  cfg.validate();
  std::vector<double> values = cfg.sweep_values;
  if (cfg.sweep_axis == SweepAxis::kNone) values = {0.0};

  struct Cell {
    std::size_t value;
    std::uint64_t seed;
    std::string scheme;
  };
  std::vector<Cell> cells;
  std::vector<ExperimentConfig> point_cfgs;
  for (std::size_t v = 0; v < values.size(); ++v) {
    point_cfgs.push_back(apply_axis(cfg, cfg.sweep_axis, values[v]));
    for (std::uint64_t seed : cfg.seeds)
      for (const auto& s : cfg.schemes) cells.push_back({v, seed, s});
  }

  SweepResult out;
  out.config_hash = config_hash(cfg);
  out.K = cfg.scenario.dims.K;
  out.rows.resize(cells.size());
  RunOptions inner = opt;
  inner.threads = 1;
  parallel_for(cells.size(), opt.threads, [&](std::size_t i) {
    const Cell& c = cells[i];
    SweepRow& row = out.rows[i];
    row.scheme = c.scheme;
    row.axis = axis_label(cfg.sweep_axis, values[c.value]);
    row.seed = c.seed;
    row.record = run_scheme(point_cfgs[c.value], c.scheme, c.seed, inner);
  });
  return out;
}

void write_csv_header(std::ostream& os, int K) {
  os << "scheme,axis,seed,power_dBm";
  for (int k = 1; k <= K; ++k) os << ",rate_user_" << k;
  os << ",worst_rate,infeasible_slots,config_hash,wall_ms\n";
}

void write_csv_row(std::ostream& os, const SweepRow& row, const std::string& config_hash, bool timing) {
  const MetricsRecord& m = row.record;
  os << row.scheme << ',' << row.axis << ',' << row.seed << ',' << format_number(m.power_dbm);
  for (Eigen::Index k = 0; k < m.avg_rates.size(); ++k) os << ',' << format_number(m.avg_rates[k]);
  os << ',' << format_number(m.worst_rate) << ',' << m.infeasible_slots << ',' << config_hash << ','
     << format_number(timing ? m.wall_ms : 0.0) << '\n';
}

void write_sweep_csv(std::ostream& os, const SweepResult& result, bool timing) {
  write_csv_header(os, result.K);
  for (const auto& row : result.rows) write_csv_row(os, row, result.config_hash, timing);
}

double median(std::vector<double> v) {
  require(!v.empty(), "median: empty input");
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::vector<RateTableRow> rate_target_table(const ExperimentConfig& cfg, const RunOptions& opt) {
  require(!cfg.schemes.empty(), "rate_target_table: empty scheme list");
  const int K = cfg.scenario.dims.K;
  require(cfg.rate_table_equal.size() == K && cfg.rate_table_unequal.size() == K,
          "rate_target_table: both target rows need one entry per user");
  ExperimentConfig eq = cfg, uneq = cfg;
  eq.rate_targets = cfg.rate_table_equal;
  uneq.rate_targets = cfg.rate_table_unequal;
  eq.sweep_axis = uneq.sweep_axis = SweepAxis::kNone;
  eq.sweep_values.clear();
  uneq.sweep_values.clear();

  const std::size_t S = cfg.schemes.size(), D = cfg.seeds.size();
  std::vector<double> p_eq(S * D), p_uneq(S * D);
  RunOptions inner = opt;
  inner.threads = 1;
  parallel_for(2 * S * D, opt.threads, [&](std::size_t i) {
    const bool unequal = i >= S * D;
    const std::size_t j = i % (S * D);
    const MetricsRecord m = run_scheme(unequal ? uneq : eq, cfg.schemes[j / D], cfg.seeds[j % D], inner);
    (unequal ? p_uneq : p_eq)[j] = m.power_dbm;
  });

  std::vector<RateTableRow> rows;
  for (std::size_t s = 0; s < S; ++s) {
    RateTableRow r;
    r.scheme = cfg.schemes[s];
    r.power_equal_dbm = median({p_eq.begin() + s * D, p_eq.begin() + (s + 1) * D});
    r.power_unequal_dbm = median({p_uneq.begin() + s * D, p_uneq.begin() + (s + 1) * D});
    // dBm difference is 10 log10 of the watt ratio.
    r.diff_db = r.power_unequal_dbm - r.power_equal_dbm;
    rows.push_back(r);
  }
  return rows;
}

void write_rate_table_csv(std::ostream& os, const std::vector<RateTableRow>& rows) {
  os << "scheme,power_equal_dBm,power_unequal_dBm,diff_dB\n";
  for (const auto& r : rows)
    os << r.scheme << ',' << format_number(r.power_equal_dbm) << ',' << format_number(r.power_unequal_dbm) << ','
       << format_number(r.diff_db) << '\n';
}

}  // namespace ttsbf::harness
