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

#include "ttsbf/config.hpp"

#include "ttsbf/baselines.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace ttsbf::harness {

using nlohmann::json;

const char* axis_name(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::kNone: return "none";
    case SweepAxis::kBeta: return "beta";
    case SweepAxis::kN: return "N";
    case SweepAxis::kQ: return "Q";
    case SweepAxis::kDelay: return "delay";
  }
  return "none";
}

SweepAxis parse_axis(const std::string& name) {
  if (name == "none") return SweepAxis::kNone;
  if (name == "beta") return SweepAxis::kBeta;
  if (name == "N") return SweepAxis::kN;
  if (name == "Q") return SweepAxis::kQ;
  if (name == "delay") return SweepAxis::kDelay;
  throw InvalidArgument("unknown sweep axis '" + name + "' (none, beta, N, Q, delay)");
}

namespace {

const std::vector<std::string>& all_schemes() {
  static const std::vector<std::string> s{kLabelPdd, baselines::kLabelWsrMax, baselines::kLabelRandomPhase,
                                          baselines::kLabelAo};
  return s;
}

}  // namespace

void ExperimentConfig::validate() const {
  scenario.dims.validate();
  const int K = scenario.dims.K;
  require(rate_targets.size() == K, "config: one rate target per user");
  require((rate_targets.array() >= 0.0).all(), "config: rate targets must be >= 0");
  require(batch >= 1 && short_iters >= 1 && iterations >= 0, "config: B, J >= 1 and T_iters >= 0");
  require(tau > 0.0 && lambda_cap > 0.0, "config: tau and lambda_cap must be > 0");
  require(eval_slots >= 1 && slots_per_interval >= 1, "config: slot counts must be >= 1");
  require(speed_kmh >= 0.0 && delay_ms >= 0.0, "config: speed and delay must be >= 0");
  if (quantize_bits) require(*quantize_bits >= 1, "config: quantize_bits must be >= 1");
  require(ao_rounds >= 0 && ao_grid >= 1 && max_retries >= 0, "config: invalid baseline knobs");
  for (const auto& s : schemes) {
    bool known = false;
    for (const auto& a : all_schemes()) known = known || a == s;
    require(known, "config: unknown scheme '" + s + "'");
  }
  if (sweep_axis != SweepAxis::kNone) require(!sweep_values.empty(), "config: sweep values must be non-empty");
  for (double v : sweep_values) {
    switch (sweep_axis) {
      case SweepAxis::kBeta: require(v >= 0.0 && v <= 1.0, "config: beta values in [0, 1]"); break;
      case SweepAxis::kN:
        require(v >= 1.0 && std::fmod(v, scenario.dims.Ny) == 0.0, "config: N values must be multiples of Ny");
        break;
      case SweepAxis::kQ: require(v >= 0.0 && v == std::floor(v), "config: Q values are integers (0 = continuous)"); break;
      case SweepAxis::kDelay: require(v >= 0.0, "config: delay values must be >= 0"); break;
      case SweepAxis::kNone: break;
    }
  }
  if (rate_table_equal.size() > 0 || rate_table_unequal.size() > 0)
    require(rate_table_equal.size() == K && rate_table_unequal.size() == K,
            "config: rate table rows need one target per user");
}

cssca::CsscaConfig ExperimentConfig::long_term(std::uint64_t run_seed, int threads) const {
  cssca::CsscaConfig c;
  c.batch = batch;
  c.short_iters = short_iters;
  c.iterations = iterations;
  c.rate_targets = rate_targets;
  c.tau = tau;
  c.lambda_cap = lambda_cap;
  c.rho = rho;
  c.gamma = gamma;
  c.seed = run_seed;
  c.threads = threads;
  return c;
}

ExperimentConfig preset(const std::string& name) {
  ExperimentConfig c;
  c.preset = name;
  c.schemes = all_schemes();
  c.scenario.beta_ai = 0.8;
  c.scenario.beta_iu = 0.8;
  c.scenario.beta_au = 0.0;
  if (name == "paper-default") {
    c.scenario.dims = {6, 4, 10, 3};
    c.rate_targets = RVec::Constant(3, 4.0);
    c.batch = 10;
    c.short_iters = 10;
    c.iterations = 200;
    c.eval_slots = 2000;
    c.rate_table_equal = RVec::Constant(3, 4.0);
    c.rate_table_unequal = (RVec(3) << 3.0, 4.0, 5.0).finished();
  } else if (name == "desk-scale") {
    c.scenario.dims = {4, 4, 4, 2};
    c.rate_targets = RVec::Constant(2, 3.0);
    c.batch = 4;
    c.short_iters = 5;
    c.iterations = 200;
    c.eval_slots = 500;
    c.rate_table_equal = RVec::Constant(2, 3.0);
    c.rate_table_unequal = (RVec(2) << 2.0, 4.0).finished();
  } else {
    throw InvalidArgument("unknown preset '" + name + "' (paper-default, desk-scale)");
  }
  c.seeds = {c.seed};
  return c;
}

std::vector<std::string> preset_names() { return {"paper-default", "desk-scale"}; }

namespace {

RVec to_rvec(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const RVec>(v.data(), static_cast<Eigen::Index>(v.size()));
}

json from_rvec(const RVec& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

channel::Position to_pos(const json& j) {
  const auto v = j.get<std::vector<double>>();
  require(v.size() == 3, "config: positions have three coordinates");
  return {v[0], v[1], v[2]};
}

json from_pos(const channel::Position& p) { return std::vector<double>{p.x(), p.y(), p.z()}; }

void read_schedule(const json& j, cssca::StepSchedule& s) {
  s.scale = j.value("scale", s.scale);
  s.offset = j.value("offset", s.offset);
  s.exponent = j.value("exponent", s.exponent);
}

json write_schedule(const cssca::StepSchedule& s) {
  return {{"scale", s.scale}, {"offset", s.offset}, {"exponent", s.exponent}};
}

void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || it.key() == a;
    require(ok, "config: unknown key '" + it.key() + "' in " + where);
  }
}

}  // namespace

ExperimentConfig config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InvalidArgument(std::string("config: ") + e.what());
  }
  require(j.is_object(), "config: top level must be an object");
  check_keys(j,
             {"preset", "system", "pathloss", "channel", "rate_targets", "long_term", "evaluation",
              "baselines", "schemes", "seed", "seeds", "sweep", "rate_table"},
             "top level");
  ExperimentConfig c = preset(j.value("preset", std::string("desk-scale")));
  try {
    if (j.contains("system")) {
      const json& s = j["system"];
      check_keys(s, {"M", "Ny", "Nz", "K"}, "system");
      c.scenario.dims.M = s.value("M", c.scenario.dims.M);
      c.scenario.dims.Ny = s.value("Ny", c.scenario.dims.Ny);
      c.scenario.dims.Nz = s.value("Nz", c.scenario.dims.Nz);
      const int K = s.value("K", c.scenario.dims.K);
      if (K != c.scenario.dims.K) {
        c.scenario.dims.K = K;
        const double r = c.rate_targets.size() > 0 ? c.rate_targets[0] : 1.0;
        c.rate_targets = RVec::Constant(K, r);
        c.rate_table_equal.resize(0);
        c.rate_table_unequal.resize(0);
      }
    }
    if (j.contains("pathloss")) {
      const json& p = j["pathloss"];
      check_keys(p, {"C0_db", "D0", "alpha_au", "alpha_ai", "alpha_iu", "ap", "irs", "users", "d_a", "d_i", "fc"},
                 "pathloss");
      auto& pl = c.scenario.pathloss;
      pl.c0_db = p.value("C0_db", pl.c0_db);
      pl.d0 = p.value("D0", pl.d0);
      pl.alpha_au = p.value("alpha_au", pl.alpha_au);
      pl.alpha_ai = p.value("alpha_ai", pl.alpha_ai);
      pl.alpha_iu = p.value("alpha_iu", pl.alpha_iu);
      if (p.contains("ap")) pl.ap_pos = to_pos(p["ap"]);
      if (p.contains("irs")) pl.irs_pos = to_pos(p["irs"]);
      if (p.contains("users")) {
        pl.user_pos.clear();
        for (const auto& u : p["users"]) pl.user_pos.push_back(to_pos(u));
      }
      pl.d_a = p.value("d_a", pl.d_a);
      pl.d_i = p.value("d_i", pl.d_i);
      pl.fc = p.value("fc", pl.fc);
    }
    if (j.contains("channel")) {
      const json& ch = j["channel"];
      check_keys(ch, {"beta_ai", "beta_au", "beta_iu", "clusters", "noise_dbm", "user_center", "user_radius",
                      "geometric_los"},
                 "channel");
      auto& s = c.scenario;
      s.beta_ai = ch.value("beta_ai", s.beta_ai);
      s.beta_au = ch.value("beta_au", s.beta_au);
      s.beta_iu = ch.value("beta_iu", s.beta_iu);
      s.clusters = ch.value("clusters", s.clusters);
      s.noise_dbm = ch.value("noise_dbm", s.noise_dbm);
      if (ch.contains("user_center")) s.user_center = to_pos(ch["user_center"]);
      s.user_radius = ch.value("user_radius", s.user_radius);
      s.geometric_los = ch.value("geometric_los", s.geometric_los);
    }
    if (j.contains("rate_targets")) {
      const json& r = j["rate_targets"];
      c.rate_targets = r.is_number() ? RVec::Constant(c.scenario.dims.K, r.get<double>()) : to_rvec(r);
    }
    if (j.contains("long_term")) {
      const json& l = j["long_term"];
      check_keys(l, {"B", "J", "T_iters", "tau", "lambda_cap", "rho", "gamma"}, "long_term");
      c.batch = l.value("B", c.batch);
      c.short_iters = l.value("J", c.short_iters);
      c.iterations = l.value("T_iters", c.iterations);
      c.tau = l.value("tau", c.tau);
      c.lambda_cap = l.value("lambda_cap", c.lambda_cap);
      if (l.contains("rho")) read_schedule(l["rho"], c.rho);
      if (l.contains("gamma")) read_schedule(l["gamma"], c.gamma);
    }
    if (j.contains("evaluation")) {
      const json& e = j["evaluation"];
      check_keys(e, {"slots", "T_s", "speed_kmh", "delay_ms", "quantize_bits"}, "evaluation");
      c.eval_slots = e.value("slots", c.eval_slots);
      c.slots_per_interval = e.value("T_s", c.slots_per_interval);
      c.speed_kmh = e.value("speed_kmh", c.speed_kmh);
      c.delay_ms = e.value("delay_ms", c.delay_ms);
      if (e.contains("quantize_bits")) {
        if (e["quantize_bits"].is_null())
          c.quantize_bits.reset();
        else
          c.quantize_bits = e["quantize_bits"].get<int>();
      }
    }
    if (j.contains("baselines")) {
      const json& b = j["baselines"];
      check_keys(b, {"p_ref_dbm", "ao_rounds", "ao_grid", "max_retries"}, "baselines");
      c.p_ref_dbm = b.value("p_ref_dbm", c.p_ref_dbm);
      c.ao_rounds = b.value("ao_rounds", c.ao_rounds);
      c.ao_grid = b.value("ao_grid", c.ao_grid);
      c.max_retries = b.value("max_retries", c.max_retries);
    }
    if (j.contains("schemes")) c.schemes = j["schemes"].get<std::vector<std::string>>();
    if (j.contains("seed")) {
      c.seed = j["seed"].get<std::uint64_t>();
      c.seeds = {c.seed};
    }
    if (j.contains("seeds")) c.seeds = j["seeds"].get<std::vector<std::uint64_t>>();
    if (j.contains("sweep")) {
      const json& s = j["sweep"];
      check_keys(s, {"axis", "values"}, "sweep");
      c.sweep_axis = parse_axis(s.value("axis", std::string("none")));
      c.sweep_values = s.value("values", std::vector<double>{});
    }
    if (j.contains("rate_table")) {
      const json& r = j["rate_table"];
      check_keys(r, {"equal", "unequal"}, "rate_table");
      if (r.contains("equal")) c.rate_table_equal = to_rvec(r["equal"]);
      if (r.contains("unequal")) c.rate_table_unequal = to_rvec(r["unequal"]);
    }
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), "config: cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return config_from_json(ss.str());
}

std::string config_to_json(const ExperimentConfig& c) {
  json j;
  j["preset"] = c.preset;
  j["system"] = {{"M", c.scenario.dims.M}, {"Ny", c.scenario.dims.Ny}, {"Nz", c.scenario.dims.Nz},
                 {"K", c.scenario.dims.K}};
  const auto& pl = c.scenario.pathloss;
  json users = json::array();
  for (const auto& u : pl.user_pos) users.push_back(from_pos(u));
  j["pathloss"] = {{"C0_db", pl.c0_db},       {"D0", pl.d0},   {"alpha_au", pl.alpha_au},
                   {"alpha_ai", pl.alpha_ai}, {"alpha_iu", pl.alpha_iu}, {"ap", from_pos(pl.ap_pos)},
                   {"irs", from_pos(pl.irs_pos)}, {"users", users}, {"d_a", pl.d_a},
                   {"d_i", pl.d_i},           {"fc", pl.fc}};
  const auto& s = c.scenario;
  j["channel"] = {{"beta_ai", s.beta_ai},         {"beta_au", s.beta_au},
                  {"beta_iu", s.beta_iu},         {"clusters", s.clusters},
                  {"noise_dbm", s.noise_dbm},     {"user_center", from_pos(s.user_center)},
                  {"user_radius", s.user_radius}, {"geometric_los", s.geometric_los}};
  j["rate_targets"] = from_rvec(c.rate_targets);
  j["long_term"] = {{"B", c.batch},           {"J", c.short_iters},
                    {"T_iters", c.iterations}, {"tau", c.tau},
                    {"lambda_cap", c.lambda_cap}, {"rho", write_schedule(c.rho)},
                    {"gamma", write_schedule(c.gamma)}};
  j["evaluation"] = {{"slots", c.eval_slots},
                     {"T_s", c.slots_per_interval},
                     {"speed_kmh", c.speed_kmh},
                     {"delay_ms", c.delay_ms},
                     {"quantize_bits", c.quantize_bits ? json(*c.quantize_bits) : json(nullptr)}};
  j["baselines"] = {{"p_ref_dbm", c.p_ref_dbm},
                    {"ao_rounds", c.ao_rounds},
                    {"ao_grid", c.ao_grid},
                    {"max_retries", c.max_retries}};
  j["schemes"] = c.schemes;
  j["seed"] = c.seed;
  j["seeds"] = c.seeds;
  j["sweep"] = {{"axis", axis_name(c.sweep_axis)}, {"values", c.sweep_values}};
  j["rate_table"] = {{"equal", from_rvec(c.rate_table_equal)}, {"unequal", from_rvec(c.rate_table_unequal)}};
  return j.dump(2);
}

std::string config_hash(const ExperimentConfig& cfg) {
  const std::string text = config_to_json(cfg);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace ttsbf::harness
