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
// ttsbf: command-line front end.
//
//   ttsbf optimize  --config c.json --seed 1 --out trace.csv [--result r.json]
//   ttsbf evaluate  --config c.json --seed 1 --out eval.csv [--input r.json]
//   ttsbf sweep     --config c.json --out sweep.csv [--seed-count 10] [--rate-table]
//   ttsbf gradcheck --out table.csv
//   ttsbf quantize  --config c.json --bits 3 --out q.csv
//   ttsbf overhead  --config c.json --out overhead.csv
//   ttsbf baseline  --config c.json --scheme TTS-WSRMax --out b.csv
//
// Exit codes: 0 success, 1 usage or input error, 2 infeasible or solver
// diagnostic. TTSBF_THREADS sets the worker count.

#include "ttsbf/config.hpp"
#include "ttsbf/cssca.hpp"
#include "ttsbf/experiment.hpp"
#include "ttsbf/gradcheck.hpp"
#include "ttsbf/parallel.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

namespace {

using namespace ttsbf;
using harness::ExperimentConfig;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitInfeasible = 2;

struct Common {
  std::string config;
  std::string preset = "desk-scale";
  std::optional<std::uint64_t> seed;
  std::string out = "-";
  bool timing = false;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config, "JSON experiment config");
  app->add_option("--preset", c.preset, "Base preset when no config is given")
      ->check(CLI::IsMember(harness::preset_names()));
  app->add_option("--seed", c.seed, "Master seed (overrides the config)");
  app->add_option("--out", c.out, "Output path, '-' for stdout");
  app->add_flag("--timing", c.timing, "Record wall-clock times (output is then not reproducible)");
}

ExperimentConfig resolve(const Common& c) {
  ExperimentConfig cfg = c.config.empty() ? harness::preset(c.preset) : harness::load_config(c.config);
  if (c.seed) {
    cfg.seed = *c.seed;
    cfg.seeds = {*c.seed};
  }
  cfg.validate();
  return cfg;
}

void emit(const std::string& path, const std::string& text) {
  if (path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InvalidArgument("cannot write '" + path + "'");
  f << text;
}

bool fully_infeasible(const MetricsRecord& m) { return m.infeasible_slots >= m.slots || std::isnan(m.power_w); }

harness::SweepRow row_of(const MetricsRecord& m, const std::string& axis, std::uint64_t seed) {
  return {m.scheme, axis, seed, m};
}

int cmd_optimize(const Common& c, const std::string& result_path) {
  const ExperimentConfig cfg = resolve(c);
  const channel::ScsiModel scsi = channel::make_scsi_model(cfg.scenario, cfg.seed);
  const cssca::LongTermResult r = cssca::optimize_long_term(scsi, cfg.long_term(cfg.seed, default_thread_count()));
  std::ostringstream os;
  cssca::write_trace_csv(os, r.trace, c.timing);
  emit(c.out, os.str());
  if (!result_path.empty()) emit(result_path, cssca::result_json(r) + "\n");
  return kExitOk;
}

int cmd_evaluate(const Common& c, const std::string& input) {
  const ExperimentConfig cfg = resolve(c);
  const int threads = default_thread_count();
  MetricsRecord m;
  if (input.empty()) {
    m = harness::run_pdd(cfg, cfg.seed, {threads, c.timing}).record;
  } else {
    std::ifstream f(input);
    if (!f) throw InvalidArgument("cannot open '" + input + "'");
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(f);
    } catch (const nlohmann::json::exception& e) {
      throw InvalidArgument(std::string("input: ") + e.what());
    }
    const auto th = j.at("theta").get<std::vector<double>>();
    const auto la = j.at("lambda").get<std::vector<double>>();
    const channel::ScsiModel scsi = channel::make_scsi_model(cfg.scenario, cfg.seed);
    m = harness::evaluate_policy(Eigen::Map<const RVec>(th.data(), static_cast<Eigen::Index>(th.size())),
                                 Eigen::Map<const RVec>(la.data(), static_cast<Eigen::Index>(la.size())), scsi,
                                 harness::slot_evaluation(cfg, cfg.seed, threads), cfg.rate_targets,
                                 cfg.short_iters);
  }
  std::ostringstream os;
  harness::write_csv_header(os, cfg.scenario.dims.K);
  harness::write_csv_row(os, row_of(m, "none", cfg.seed), harness::config_hash(cfg), c.timing);
  emit(c.out, os.str());
  return fully_infeasible(m) ? kExitInfeasible : kExitOk;
}

int cmd_sweep(const Common& c, int seed_count, bool rate_table) {
  ExperimentConfig cfg = resolve(c);
  if (seed_count > 0) {
    cfg.seeds.clear();
    for (int i = 0; i < seed_count; ++i) cfg.seeds.push_back(cfg.seed + static_cast<std::uint64_t>(i));
  }
  const harness::RunOptions opt{default_thread_count(), c.timing};
  std::ostringstream os;
  if (rate_table) {
    const auto rows = harness::rate_target_table(cfg, opt);
    harness::write_rate_table_csv(os, rows);
    emit(c.out, os.str());
    for (const auto& r : rows)
      if (std::isnan(r.diff_db)) return kExitInfeasible;
    return kExitOk;
  }
  const harness::SweepResult res = harness::run_sweep(cfg, opt);
  harness::write_sweep_csv(os, res, c.timing);
  emit(c.out, os.str());
  for (const auto& r : res.rows)
    if (fully_infeasible(r.record)) return kExitInfeasible;
  return kExitOk;
}

int cmd_gradcheck(const Common& c, unfold::GradcheckOptions opts) {
  if (c.seed) opts.seed = *c.seed;
  const unfold::GradcheckReport rep = unfold::gradcheck(opts);
  std::ostringstream os;
  unfold::write_gradcheck_table(os, rep);
  emit(c.out, os.str());
  std::cerr << (rep.all_pass() ? "PASS" : "FAIL") << " gradcheck: " << rep.rows.size()
            << " comparisons, max relative error " << rep.max_error() << "\n";
  return rep.all_pass() ? kExitOk : kExitInfeasible;
}

int cmd_quantize(const Common& c, std::optional<int> bits) {
  ExperimentConfig cfg = resolve(c);
  if (bits) cfg.quantize_bits = *bits;
  if (!cfg.quantize_bits) cfg.quantize_bits = 3;
  const harness::RunOptions opt{default_thread_count(), c.timing};
  ExperimentConfig cont = cfg;
  cont.quantize_bits.reset();
  const MetricsRecord mc = harness::run_pdd(cont, cfg.seed, opt).record;
  const MetricsRecord mq = harness::run_pdd(cfg, cfg.seed, opt).record;
  std::ostringstream os;
  const std::string hash = harness::config_hash(cfg);
  harness::write_csv_header(os, cfg.scenario.dims.K);
  harness::write_csv_row(os, row_of(mc, "Q=inf", cfg.seed), hash, c.timing);
  harness::write_csv_row(os, row_of(mq, harness::axis_label(harness::SweepAxis::kQ, *cfg.quantize_bits), cfg.seed),
                         hash, c.timing);
  emit(c.out, os.str());
  return fully_infeasible(mc) || fully_infeasible(mq) ? kExitInfeasible : kExitOk;
}

int cmd_overhead(const Common& c) {
  const ExperimentConfig cfg = resolve(c);
  const harness::OverheadReport r = harness::overhead_report(cfg.scenario.dims, cfg.slots_per_interval);
  std::ostringstream os;
  os << "per_slot_tts,per_slot_icsi,per_interval_tts,per_interval_icsi\n"
     << r.per_slot_tts << ',' << r.per_slot_icsi << ',' << r.per_interval_tts << ',' << r.per_interval_icsi << '\n';
  emit(c.out, os.str());
  return kExitOk;
}

int cmd_baseline(const Common& c, const std::vector<std::string>& schemes) {
  ExperimentConfig cfg = resolve(c);
  cfg.schemes = schemes.empty() ? std::vector<std::string>{baselines::kLabelWsrMax, baselines::kLabelRandomPhase,
                                                           baselines::kLabelAo}
                                : schemes;
  cfg.sweep_axis = harness::SweepAxis::kNone;
  cfg.sweep_values.clear();
  cfg.seeds = {cfg.seed};
  cfg.validate();
  const harness::SweepResult res = harness::run_sweep(cfg, {default_thread_count(), c.timing});
  std::ostringstream os;
  harness::write_sweep_csv(os, res, c.timing);
  emit(c.out, os.str());
  for (const auto& r : res.rows)
    if (fully_infeasible(r.record)) return kExitInfeasible;
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-timescale IRS beamforming optimizer"};
  app.require_subcommand(1);

  Common c_opt, c_eval, c_sweep, c_grad, c_quant, c_over, c_base;

  auto* opt = app.add_subcommand("optimize", "Long-term phase and multiplier optimization; writes the trace");
  add_common(opt, c_opt);
  std::string result_path;
  opt->add_option("--result", result_path, "Also write the optimized theta/lambda as JSON");

  auto* eval = app.add_subcommand("evaluate", "Held-out evaluation of the two-timescale policy");
  add_common(eval, c_eval);
  std::string input;
  eval->add_option("--input", input, "theta/lambda JSON from 'optimize --result'; optimizes first if absent");

  auto* sweep = app.add_subcommand("sweep", "Scheme x axis x seed sweep to CSV");
  add_common(sweep, c_sweep);
  int seed_count = 0;
  bool rate_table = false;
  sweep->add_option("--seed-count", seed_count, "Use seeds seed, seed+1, ... (overrides the config list)")
      ->check(CLI::NonNegativeNumber);
  sweep->add_flag("--rate-table", rate_table, "Equal vs unequal rate-target table instead of a sweep");

  auto* grad = app.add_subcommand("gradcheck", "Finite-difference check of the unfolded gradients");
  add_common(grad, c_grad);
  unfold::GradcheckOptions gopts;
  grad->add_option("--instances", gopts.instances)->check(CLI::PositiveNumber);
  grad->add_option("--M", gopts.M)->check(CLI::PositiveNumber);
  grad->add_option("--N", gopts.N)->check(CLI::PositiveNumber);
  grad->add_option("--K", gopts.K)->check(CLI::PositiveNumber);
  grad->add_option("--J", gopts.J)->check(CLI::PositiveNumber);
  grad->add_option("--tolerance", gopts.tolerance)->check(CLI::PositiveNumber);

  auto* quant = app.add_subcommand("quantize", "Continuous vs discrete phases with multiplier re-optimization");
  add_common(quant, c_quant);
  std::optional<int> bits;
  quant->add_option("--bits", bits, "Phase resolution Q (2^Q levels)")->check(CLI::Range(1, 30));

  auto* over = app.add_subcommand("overhead", "Channel-estimation and signalling overhead counts");
  add_common(over, c_over);

  auto* base = app.add_subcommand("baseline", "Run baseline schemes only");
  add_common(base, c_base);
  std::vector<std::string> schemes;
  base->add_option("--scheme", schemes, "Scheme label(s)")
      ->check(CLI::IsMember({baselines::kLabelWsrMax, baselines::kLabelRandomPhase, baselines::kLabelAo}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*opt) return cmd_optimize(c_opt, result_path);
    if (*eval) return cmd_evaluate(c_eval, input);
    if (*sweep) return cmd_sweep(c_sweep, seed_count, rate_table);
    if (*grad) return cmd_gradcheck(c_grad, gopts);
    if (*quant) return cmd_quantize(c_quant, bits);
    if (*over) return cmd_overhead(c_over);
    if (*base) return cmd_baseline(c_base, schemes);
  } catch (const SolverDiagnostic& e) {
    std::cerr << "solver diagnostic: " << e.what() << "\n";
    return kExitInfeasible;
  } catch (const InvalidArgument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
