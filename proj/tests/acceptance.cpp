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

//
// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. TTSBF_THREADS controls the sweep parallelism; results do
// not depend on it.

#include "qcqp_oracle.hpp"
#include "test_util.hpp"

#include "ttsbf/config.hpp"
#include "ttsbf/cssca.hpp"
#include "ttsbf/experiment.hpp"
#include "ttsbf/gradcheck.hpp"
#include "ttsbf/parallel.hpp"
#include "ttsbf/wmmse.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

using namespace ttsbf;
using harness::ExperimentConfig;
using harness::SweepAxis;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

int threads() { return default_thread_count(); }

std::vector<std::uint64_t> seeds_1_to(int n) {
  std::vector<std::uint64_t> s;
  for (int i = 1; i <= n; ++i) s.push_back(static_cast<std::uint64_t>(i));
  return s;
}

// Median power_dBm (or worst rate) per (axis label, scheme).
std::map<std::pair<std::string, std::string>, double> medians(const harness::SweepResult& r, bool worst_rate) {
  std::map<std::pair<std::string, std::string>, std::vector<double>> groups;
  for (const auto& row : r.rows)
    groups[{row.axis, row.scheme}].push_back(worst_rate ? row.record.worst_rate : row.record.power_dbm);
  std::map<std::pair<std::string, std::string>, double> out;
  for (auto& [key, v] : groups) out[key] = harness::median(v);
  return out;
}

wmmse::ShortTermProblem random_problem(Rng& rng, int K, int M) {
  wmmse::ShortTermProblem p;
  p.h_eff = test::random_channels(rng, K, M);
  p.lambda = test::random_uniform(rng, K, 0.5, 3.0);
  p.rate_targets = RVec::Constant(K, 2.0);
  p.sigma2 = test::random_uniform(rng, K, 0.05, 0.5);
  return p;
}

Outcome gradient_fidelity() {
  const auto t0 = Clock::now();
  unfold::GradcheckOptions o;
  o.instances = 20;
  o.M = 2;
  o.N = 4;
  o.K = 2;
  o.J = 3;
  o.tolerance = 1e-5;
  const unfold::GradcheckReport rep = unfold::gradcheck(o);
  const double secs = seconds_since(t0);
  return {rep.all_pass() && secs < 10.0, std::to_string(rep.rows.size()) + " comparisons, max rel error " +
                                             fmt("%.2e", rep.max_error()) + ", " + fmt("%.2f", secs) + " s"};
}

Outcome wmmse_monotonicity() {
  Rng rng(derive_seed(2, SeedDomain::kGradcheck));
  int violations = 0;
  std::size_t updates = 0;
  for (int i = 0; i < 500; ++i) {
    const auto p = random_problem(rng, 3, 4);
    const auto s = wmmse::solve_short_term(p, {20, true});
    for (std::size_t j = 1; j < s.block_trace.size(); ++j, ++updates)
      if (s.block_trace[j] > s.block_trace[j - 1] + 1e-9 * std::abs(s.block_trace[j - 1])) ++violations;
  }
  return {violations == 0 && updates > 0,
          std::to_string(updates) + " block updates, " + std::to_string(violations) + " increases"};
}

Outcome mmse_rate_identity() {
  Rng rng(derive_seed(3, SeedDomain::kGradcheck));
  double worst = 0.0, lagged = 0.0;
  for (int i = 0; i < 100; ++i) {
    const auto p = random_problem(rng, 3, 4);
    const auto s = wmmse::solve_short_term(p, {100, false});
    // u and q as optimal responses to the returned beamformers.
    const CVec u = wmmse::update_u(p, s.w);
    const RVec q = wmmse::update_q(p, u, s.w);
    for (int k = 0; k < 3; ++k) {
      worst = std::max(worst, std::abs(std::log2(q[k]) - s.rates[k]));
      lagged = std::max(lagged, std::abs(std::log2(s.q[k]) - s.rates[k]));
    }
  }
  return {worst <= 1e-6, "max |log2 q - r| = " + fmt("%.2e", worst) + " over 100 instances (q from the last sweep input: " +
                             fmt("%.2e", lagged) + ")"};
}

Outcome qcqp_exactness() {
  std::mt19937_64 rng(4);
  double exact_gap = 0.0, grid_excess = -std::numeric_limits<double>::infinity(), grid_spread = 0.0, kkt = 0.0;
  int feasible = 0;
  bool ok = true;
  for (int t = 0; t < 200; ++t) {
    const auto p = test::random_qcqp(rng, 2 + t % 2);
    const test::QcqpOracle exact(p.objective, p.constraints, p.box);
    const test::GridOracle grid(p.objective, p.constraints, p.box, 1e-3);

    const qcqp::MinimaxSolution mm = qcqp::solve_minimax(p.constraints, p.box);
    const double g_mm = grid.minimax();
    exact_gap = std::max(exact_gap, std::abs(mm.value - exact.minimax()));
    grid_excess = std::max(grid_excess, mm.value - g_mm);
    grid_spread = std::max(grid_spread, g_mm - mm.value);

    const auto res = qcqp::solve_constrained(p.objective, p.constraints, p.box);
    if (const auto* s = std::get_if<qcqp::ConstrainedSolution>(&res)) {
      ++feasible;
      exact_gap = std::max(exact_gap, std::abs(s->objective - exact.constrained()));
      const double g = grid.constrained();
      if (std::isfinite(g)) {
        grid_excess = std::max(grid_excess, s->objective - g);
        grid_spread = std::max(grid_spread, g - s->objective);
      }
      const auto k = qcqp::kkt_residuals(p.objective, p.constraints, p.box, s->x, s->mu);
      kkt = std::max({kkt, k.stationarity, k.feasibility, k.complementarity, k.dual_feasibility});
    } else if (!(exact.minimax() > 0.0)) {
      ok = false;
    }
  }
  ok = ok && exact_gap <= 1e-5 && kkt <= 1e-8 && grid_excess <= 1e-9;
  return {ok, std::to_string(feasible) + "/200 feasible; |solver - exact oracle| <= " + fmt("%.1e", exact_gap) +
                  "; solver - grid(1e-3) <= " + fmt("%.1e", grid_excess) + " (grid above solver by up to " +
                  fmt("%.1e", grid_spread) + "); max KKT residual " + fmt("%.1e", kkt)};
}

Outcome overhead_table() {
  const auto r = harness::overhead_report({6, 4, 10, 3}, 2000);
  std::ostringstream d;
  d << '(' << r.per_slot_tts << ", " << r.per_slot_icsi << ", " << r.per_interval_tts << ", "
    << r.per_interval_icsi << ')';
  return {r == harness::OverheadReport{18, 378, 40, 80000}, d.str()};
}

bool plateaued(const std::vector<cssca::TraceRow>& trace, double* change) {
  const std::size_t T = trace.size();
  if (T < 51) return false;
  const double a = trace[T - 51].f0, b = trace[T - 1].f0;
  *change = std::abs(b - a) / std::abs(a);
  return *change < 0.05;
}

Outcome convergence_behavior() {
  const ExperimentConfig cfg = harness::preset("desk-scale");
  const auto t0 = Clock::now();
  const harness::PddRun run = harness::run_pdd(cfg, 1, {1, false});
  const double secs = seconds_since(t0);
  const double R = cfg.rate_targets[0];
  const double worst = run.record.worst_rate;
  double change = 0.0;
  const bool plateau = plateaued(run.long_term.trace, &change);
  const bool rate_ok = std::abs(worst - R) <= 0.05 * R;
  return {rate_ok && plateau && secs < 600.0,
          "seed 1: worst-user rate " + fmt("%.3f", worst) + " (target " + fmt("%.0f", R) + "), f0 change over last 50 " +
              fmt("%.2f%%", 100.0 * change) + ", " + fmt("%.1f", secs) + " s single-threaded"};
}

std::string convergence_spread() {
  const ExperimentConfig cfg = harness::preset("desk-scale");
  const auto seeds = seeds_1_to(10);
  std::vector<harness::PddRun> runs(seeds.size());
  parallel_for(seeds.size(), threads(), [&](std::size_t i) { runs[i] = harness::run_pdd(cfg, seeds[i], {1, false}); });
  int rate_ok = 0, plateau_ok = 0;
  for (const auto& r : runs) {
    double change = 0.0;
    rate_ok += std::abs(r.record.worst_rate - cfg.rate_targets[0]) <= 0.05 * cfg.rate_targets[0];
    plateau_ok += plateaued(r.long_term.trace, &change);
  }
  return "seeds 1-10: rate within 5% on " + std::to_string(rate_ok) + "/10, plateau on " +
         std::to_string(plateau_ok) + "/10";
}

harness::SweepResult n_sweep() {
  ExperimentConfig cfg = harness::preset("desk-scale");
  cfg.seeds = seeds_1_to(10);
  cfg.sweep_axis = SweepAxis::kN;
  cfg.sweep_values = {8, 16, 32};
  return harness::run_sweep(cfg, {threads(), false});
}

Outcome scheme_ordering(const harness::SweepResult& sweep) {
  const auto med = medians(sweep, false);
  const double pdd = med.at({"N=16", harness::kLabelPdd});
  const double wsr = med.at({"N=16", baselines::kLabelWsrMax});
  const double rnd = med.at({"N=16", baselines::kLabelRandomPhase});
  return {pdd <= wsr && pdd <= rnd, "median power " + fmt("%.2f", pdd) + " dBm vs TTS-WSRMax " + fmt("%.2f", wsr) +
                                        " (margin " + fmt("%.2f", wsr - pdd) + " dB), random-phase " +
                                        fmt("%.2f", rnd) + " (margin " + fmt("%.2f", rnd - pdd) + " dB)"};
}

Outcome monotone_trends(const harness::SweepResult& sweep) {
  const auto med = medians(sweep, false);
  bool ok = true;
  std::string detail;
  for (const char* s : {harness::kLabelPdd, baselines::kLabelWsrMax, baselines::kLabelRandomPhase,
                        baselines::kLabelAo}) {
    const double p8 = med.at({"N=8", s}), p16 = med.at({"N=16", s}), p32 = med.at({"N=32", s});
    ok = ok && p16 < p8 && p32 < p16;
    detail += std::string(s) + " " + fmt("%.2f", p8) + "/" + fmt("%.2f", p16) + "/" + fmt("%.2f", p32) + "; ";
  }

  ExperimentConfig cfg = harness::preset("desk-scale");
  cfg.seeds = seeds_1_to(10);
  cfg.schemes = {harness::kLabelPdd};
  cfg.sweep_axis = SweepAxis::kQ;
  cfg.sweep_values = {0, 3};
  const auto qmed = medians(harness::run_sweep(cfg, {threads(), false}), false);
  const double loss = qmed.at({"Q=3", harness::kLabelPdd}) - qmed.at({"Q=inf", harness::kLabelPdd});
  ok = ok && loss <= 1.0;
  return {ok, "median dBm at N=8/16/32: " + detail + "Q=3 minus Q=inf " + fmt("%.3f", loss) + " dB"};
}

Outcome delay_robustness() {
  ExperimentConfig cfg = harness::preset("desk-scale");
  cfg.seeds = seeds_1_to(10);
  cfg.sweep_axis = SweepAxis::kDelay;
  cfg.sweep_values = {0, 1, 2, 5};
  const auto med = medians(harness::run_sweep(cfg, {threads(), false}), true);
  auto drop = [&](const char* s) { return med.at({"delay=0", s}) - med.at({"delay=5", s}); };
  const double ao = drop(baselines::kLabelAo);
  bool ok = true;
  std::string detail;
  for (const char* s : {harness::kLabelPdd, baselines::kLabelWsrMax, baselines::kLabelRandomPhase}) {
    ok = ok && drop(s) < ao;
    detail += std::string(s) + " " + fmt("%.3f", drop(s)) + ", ";
  }
  return {ok, "median worst-rate drop at 5 ms: " + detail + baselines::kLabelAo + " " + fmt("%.3f", ao)};
}

Outcome determinism() {
  ExperimentConfig cfg = harness::preset("desk-scale");
  cfg.seeds = {1, 2};
  cfg.eval_slots = 100;
  cfg.sweep_axis = SweepAxis::kBeta;
  cfg.sweep_values = {0.0, 0.8};
  auto csv = [&](int th) {
    std::ostringstream os;
    harness::write_sweep_csv(os, harness::run_sweep(cfg, {th, false}), false);
    return os.str();
  };
  auto trace = [&] {
    const channel::ScsiModel scsi = channel::make_scsi_model(cfg.scenario, 1);
    std::ostringstream os;
    cssca::write_trace_csv(os, cssca::optimize_long_term(scsi, cfg.long_term(1, threads())).trace, false);
    return os.str();
  };
  const std::string a = csv(1);
  const bool same = a == csv(1) && a == csv(std::max(2, threads())) && trace() == trace();
  return {same, "sweep CSV (" + std::to_string(a.size()) + " bytes) and trace CSV identical across repeats and thread counts"};
}

}  // namespace

int main() {
  int failures = 0;
  auto report = [&](int id, const std::string& name, const std::function<Outcome()>& run) {
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << id << " (" << name << "): " << o.detail << std::endl;
  };

  report(1, "gradient fidelity", gradient_fidelity);
  report(2, "WMMSE monotonicity", wmmse_monotonicity);
  report(3, "MMSE-rate identity", mmse_rate_identity);
  report(4, "QCQP exactness", qcqp_exactness);
  report(5, "overhead table", overhead_table);
  report(6, "convergence behavior", convergence_behavior);
  try {
    std::cout << "INFO criterion 6: " << convergence_spread() << std::endl;
  } catch (const std::exception& e) {
    std::cout << "INFO criterion 6: spread run failed: " << e.what() << std::endl;
  }
  harness::SweepResult sweep;
  bool have_sweep = true;
  try {
    sweep = n_sweep();
  } catch (const std::exception& e) {
    have_sweep = false;
    std::cout << "N sweep failed: " << e.what() << std::endl;
  }
  report(7, "scheme ordering", [&] { return have_sweep ? scheme_ordering(sweep) : Outcome{false, "no N sweep"}; });
  report(8, "monotone trends", [&] { return have_sweep ? monotone_trends(sweep) : Outcome{false, "no N sweep"}; });
  report(9, "CSI-delay robustness", delay_robustness);
  report(10, "determinism", determinism);
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
