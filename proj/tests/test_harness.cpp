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


#include "test_util.hpp"

#include "ttsbf/config.hpp"
#include "ttsbf/experiment.hpp"

#include <doctest.h>

#include <cmath>
#include <set>
#include <sstream>

using namespace ttsbf;
using namespace ttsbf::harness;

namespace {

ExperimentConfig tiny_config() {
  ExperimentConfig c = preset("desk-scale");
  c.scenario.dims = {3, 2, 2, 2};
  c.iterations = 8;
  c.batch = 2;
  c.short_iters = 3;
  c.eval_slots = 12;
  c.ao_grid = 8;
  c.ao_rounds = 1;
  c.rate_targets = RVec::Constant(2, 1.0);
  c.rate_table_equal = RVec::Constant(2, 1.0);
  c.rate_table_unequal = (RVec(2) << 0.5, 1.5).finished();
  return c;
}

std::string sweep_csv(const ExperimentConfig& cfg, int threads) {
  std::ostringstream os;
  write_sweep_csv(os, run_sweep(cfg, {threads, false}), false);
  return os.str();
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

}  // namespace

TEST_SUITE("harness") {

TEST_CASE("overhead counts") {
  CHECK(overhead_report({6, 4, 10, 3}, 2000) == OverheadReport{18, 378, 40, 80000});
  CHECK(overhead_report({1, 1, 1, 1}, 1) == OverheadReport{1, 3, 1, 1});
  CHECK(overhead_report({6, 4, 10, 0}, 2000) == OverheadReport{0, 240, 40, 80000});
  CHECK(overhead_report({4, 4, 4, 2}, 7) == OverheadReport{8, 104, 16, 112});
  CHECK_THROWS_AS(overhead_report({0, 4, 4, 2}, 7), InvalidArgument);
  CHECK_THROWS_AS(overhead_report({4, 4, 4, 2}, 0), InvalidArgument);
}

TEST_CASE("dBm conversion round-trips") {
  for (double dbm : {-80.0, -30.0, 0.0, 17.3, 30.0, 46.0}) {
    CHECK(std::abs(watts_to_dbm(dbm_to_watts(dbm)) - dbm) <= 1e-12);
  }
  CHECK(watts_to_dbm(1.0) == doctest::Approx(30.0));
  CHECK(dbm_to_watts(0.0) == doctest::Approx(1e-3));
  Rng rng(1);
  std::uniform_real_distribution<double> u(-12.0, 3.0);
  for (int i = 0; i < 1000; ++i) {
    const double w = std::pow(10.0, u(rng));
    CHECK(std::abs(dbm_to_watts(watts_to_dbm(w)) - w) <= 1e-12 * w);
  }
}

TEST_CASE("presets") {
  const ExperimentConfig d = preset("desk-scale");
  CHECK(d.scenario.dims.N() == 16);
  CHECK(d.scenario.dims.M == 4);
  CHECK(d.scenario.dims.K == 2);
  CHECK(d.batch == 4);
  CHECK(d.short_iters == 5);
  CHECK(d.iterations == 200);
  CHECK(d.eval_slots == 500);
  const ExperimentConfig p = preset("paper-default");
  CHECK(p.scenario.dims.N() == 40);
  CHECK(p.scenario.dims.M == 6);
  CHECK(p.scenario.dims.K == 3);
  CHECK(p.batch == 10);
  CHECK(p.short_iters == 10);
  CHECK(p.slots_per_interval == 2000);
  CHECK(p.tau == 0.01);
  CHECK(p.rate_targets == RVec::Constant(3, 4.0));
  d.validate();
  p.validate();
  CHECK_THROWS_AS(preset("huge"), InvalidArgument);
}

TEST_CASE("config JSON round trip and hash") {
  ExperimentConfig c = tiny_config();
  c.sweep_axis = SweepAxis::kN;
  c.sweep_values = {4, 8};
  c.seeds = {3, 5};
  c.quantize_bits = 2;
  const std::string text = config_to_json(c);
  const ExperimentConfig back = config_from_json(text);
  CHECK(config_to_json(back) == text);
  CHECK(config_hash(back) == config_hash(c));
  CHECK(config_hash(c).size() == 16);

  ExperimentConfig other = c;
  other.tau = 0.02;
  CHECK(config_hash(other) != config_hash(c));

  const ExperimentConfig o = config_from_json(R"({"preset": "desk-scale", "long_term": {"T_iters": 7}, "seed": 9})");
  CHECK(o.iterations == 7);
  CHECK(o.seed == 9);
  CHECK(o.seeds == std::vector<std::uint64_t>{9});
  CHECK(o.short_iters == 5);
}

TEST_CASE("config errors") {
  CHECK_THROWS_AS(config_from_json(R"({"bogus": 1})"), InvalidArgument);
  CHECK_THROWS_AS(config_from_json(R"({"long_term": {"TT": 1}})"), InvalidArgument);
  CHECK_THROWS_AS(config_from_json("{not json"), InvalidArgument);
  CHECK_THROWS_AS(config_from_json("[1, 2]"), InvalidArgument);
  CHECK_THROWS_AS(load_config("/nonexistent/cfg.json"), InvalidArgument);

  ExperimentConfig c = tiny_config();
  c.sweep_axis = SweepAxis::kBeta;
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
  c.sweep_values = {0.4, 1.5};
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
  c = tiny_config();
  c.sweep_axis = SweepAxis::kN;
  c.sweep_values = {5};
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
  c = tiny_config();
  c.rate_targets = RVec::Ones(3);
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
  c = tiny_config();
  c.schemes = {"nope"};
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
  c = tiny_config();
  c.schemes.clear();
  CHECK_THROWS_AS(run_sweep(c), InvalidArgument);
  CHECK_THROWS_AS(parse_axis("gamma"), InvalidArgument);
}

TEST_CASE("axis labels and number format") {
  CHECK(axis_label(SweepAxis::kNone, 0.0) == "none");
  CHECK(axis_label(SweepAxis::kBeta, 0.8) == "beta=0.8");
  CHECK(axis_label(SweepAxis::kN, 16) == "N=16");
  CHECK(axis_label(SweepAxis::kQ, 3) == "Q=3");
  CHECK(axis_label(SweepAxis::kQ, 0) == "Q=inf");
  CHECK(axis_label(SweepAxis::kDelay, 5) == "delay=5");
  for (SweepAxis a : {SweepAxis::kNone, SweepAxis::kBeta, SweepAxis::kN, SweepAxis::kQ, SweepAxis::kDelay})
    CHECK(parse_axis(axis_name(a)) == a);
  Rng rng(2);
  std::normal_distribution<double> g(0.0, 100.0);
  for (int i = 0; i < 200; ++i) {
    const double v = g(rng);
    CHECK(std::stod(format_number(v)) == v);
  }
  CHECK(format_number(std::nan("")) == "nan");
}

TEST_CASE("axis application") {
  const ExperimentConfig c = preset("desk-scale");
  CHECK(apply_axis(c, SweepAxis::kN, 32).scenario.dims.N() == 32);
  CHECK(apply_axis(c, SweepAxis::kBeta, 0.4).scenario.beta_ai == 0.4);
  CHECK(apply_axis(c, SweepAxis::kBeta, 0.4).scenario.beta_iu == 0.4);
  CHECK(apply_axis(c, SweepAxis::kQ, 2).quantize_bits == 2);
  CHECK_FALSE(apply_axis(c, SweepAxis::kQ, 0).quantize_bits.has_value());
  CHECK(apply_axis(c, SweepAxis::kDelay, 4).delay_ms == 4.0);
}

TEST_CASE("zero multipliers give zero power and zero rates") {
  const ExperimentConfig cfg = tiny_config();
  const channel::ScsiModel scsi = channel::make_scsi_model(cfg.scenario, 1);
  Rng rng(3);
  const MetricsRecord m = evaluate_policy(test::random_phases(rng, 4), RVec::Zero(2), scsi,
                                          slot_evaluation(cfg, 1, 1), cfg.rate_targets, 3);
  CHECK(m.power_w == 0.0);
  CHECK(m.avg_rates == RVec::Zero(2));
  CHECK(m.worst_rate == 0.0);
  CHECK(m.slots == cfg.eval_slots);
}

TEST_CASE("metrics record invariants") {
  const ExperimentConfig cfg = tiny_config();
  const channel::ScsiModel scsi = channel::make_scsi_model(cfg.scenario, 2);
  Rng rng(4);
  SlotEvaluation ev = slot_evaluation(cfg, 2, 1);
  ev.keep_slot_powers = true;
  const MetricsRecord m =
      evaluate_policy(test::random_phases(rng, 4), RVec::Constant(2, 0.05), scsi, ev, cfg.rate_targets, 3);
  CHECK(m.power_dbm == doctest::Approx(10.0 * std::log10(m.power_w * 1e3)).epsilon(1e-12));
  CHECK(m.avg_rates.minCoeff() >= 0.0);
  CHECK(m.worst_rate == m.avg_rates.minCoeff());
  REQUIRE(m.slot_powers.size() == static_cast<std::size_t>(cfg.eval_slots));
  double sum = 0.0;
  for (double p : m.slot_powers) sum += p;
  CHECK(m.power_w == doctest::Approx(sum / cfg.eval_slots).epsilon(1e-12));
  CHECK(m.scheme == kLabelPdd);
}

TEST_CASE("doubling the slot count stays within twice the standard error") {
  const ExperimentConfig cfg = preset("desk-scale");
  const channel::ScsiModel scsi = channel::make_scsi_model(cfg.scenario, 5);
  Rng rng(6);
  const PhaseVector th = test::random_phases(rng, 16);
  const RVec lam = RVec::Constant(2, 0.02);
  SlotEvaluation ev = slot_evaluation(cfg, 5, 1);
  ev.slots = 400;
  const MetricsRecord a = evaluate_policy(th, lam, scsi, ev, cfg.rate_targets, cfg.short_iters);
  ev.slots = 800;
  const MetricsRecord b = evaluate_policy(th, lam, scsi, ev, cfg.rate_targets, cfg.short_iters);
  CHECK(a.power_stderr_w > 0.0);
  CHECK(std::abs(a.power_w - b.power_w) < 2.0 * a.power_stderr_w);
}

TEST_CASE("evaluation seeds are held out from training") {
  std::set<std::uint64_t> seen;
  std::size_t drawn = 0;
  for (std::uint64_t master = 1; master <= 5; ++master)
    for (std::uint64_t i = 0; i < 200; ++i) {
      for (SeedDomain d : {SeedDomain::kModel, SeedDomain::kInit, SeedDomain::kTraining, SeedDomain::kEvaluation,
                           SeedDomain::kBaseline, SeedDomain::kInnovation, SeedDomain::kGradcheck}) {
        seen.insert(derive_seed(master, d, {i}));
        ++drawn;
      }
      seen.insert(derive_seed(master, SeedDomain::kTraining, {i, 0}));
      seen.insert(derive_seed(master, SeedDomain::kTraining, {i, 1}));
      drawn += 2;
    }
  CHECK(seen.size() == drawn);
}

TEST_CASE("sweep CSV is deterministic and thread independent") {
  ExperimentConfig cfg = tiny_config();
  cfg.sweep_axis = SweepAxis::kN;
  cfg.sweep_values = {2, 4};
  cfg.seeds = {1, 2};
  const std::string a = sweep_csv(cfg, 1);
  CHECK(a == sweep_csv(cfg, 1));
  CHECK(a == sweep_csv(cfg, 3));

  std::istringstream in(a);
  std::string line;
  std::getline(in, line);
  CHECK(line == "scheme,axis,seed,power_dBm,rate_user_1,rate_user_2,worst_rate,infeasible_slots,config_hash,wall_ms");
  int rows = 0;
  while (std::getline(in, line)) {
    const auto cells = split(line);
    REQUIRE(cells.size() == 10);
    CHECK(cells[8] == config_hash(cfg));
    CHECK(cells[9] == "0");
    ++rows;
  }
  CHECK(rows == 2 * 2 * 4);
}

TEST_CASE("sweep rows follow axis, seed, scheme order") {
  ExperimentConfig cfg = tiny_config();
  cfg.schemes = {kLabelPdd, baselines::kLabelRandomPhase};
  cfg.sweep_axis = SweepAxis::kQ;
  cfg.sweep_values = {0, 1};
  cfg.seeds = {4, 7};
  const SweepResult r = run_sweep(cfg, {2, false});
  REQUIRE(r.rows.size() == 8);
  CHECK(r.rows[0].axis == "Q=inf");
  CHECK(r.rows[4].axis == "Q=1");
  CHECK(r.rows[0].seed == 4);
  CHECK(r.rows[2].seed == 7);
  CHECK(r.rows[0].scheme == kLabelPdd);
  CHECK(r.rows[1].scheme == baselines::kLabelRandomPhase);
  // A single cell reproduces its sweep row.
  const MetricsRecord one = run_scheme(apply_axis(cfg, SweepAxis::kQ, 1), kLabelPdd, 7);
  CHECK(one.power_w == r.rows[6].record.power_w);
}

TEST_CASE("rate-target table") {
  ExperimentConfig cfg = tiny_config();
  cfg.seeds = {1, 2, 3};
  const auto rows = rate_target_table(cfg, {2, false});
  REQUIRE(rows.size() == cfg.schemes.size());
  for (std::size_t s = 0; s < rows.size(); ++s) {
    CHECK(rows[s].scheme == cfg.schemes[s]);
    CHECK(std::isfinite(rows[s].power_equal_dbm));
    CHECK(std::isfinite(rows[s].power_unequal_dbm));
    const double ratio = dbm_to_watts(rows[s].power_unequal_dbm) / dbm_to_watts(rows[s].power_equal_dbm);
    CHECK(rows[s].diff_db == doctest::Approx(10.0 * std::log10(ratio)).epsilon(1e-9));
  }
  std::ostringstream os;
  write_rate_table_csv(os, rows);
  CHECK(os.str().rfind("scheme,power_equal_dBm,power_unequal_dBm,diff_dB\n", 0) == 0);
  cfg.rate_table_unequal = RVec::Ones(3);
  CHECK_THROWS_AS(rate_target_table(cfg), InvalidArgument);
}

TEST_CASE("median") {
  CHECK(median({3.0, 1.0, 2.0}) == 2.0);
  CHECK(median({4.0, 1.0, 2.0, 3.0}) == 2.5);
  CHECK_THROWS_AS(median({}), InvalidArgument);
}

}  // TEST_SUITE
