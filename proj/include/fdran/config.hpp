/**
 * \file fdran/config.hpp
 *
 * \brief Run configuration: built-in defaults and strict JSON ingestion.
 *
 * Every JSON section is optional and overrides the defaults field by field. Unknown keys are
 * rejected so that a typo never silently falls back to a default.
 */
#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "fdran/common.hpp"
#include "fdran/matching.hpp"
#include "fdran/netmodel.hpp"
#include "fdran/powerctl.hpp"
#include "fdran/powermodel.hpp"

namespace fdran {

using json = nlohmann::json;

inline const std::vector<std::string>& algorithm_names() {
  static const std::vector<std::string> names{"trimsm-slmdb", "trimsm-fipc", "trimsm-qopc", "trimsm-eipc", "recp",
                                              "llsf",         "tsap",        "nos",         "exhaustive"};
  return names;
}

inline bool known_algorithm(const std::string& a) {
  for (const auto& n : algorithm_names())
    if (n == a) return true;
  return false;
}

struct SweepSpec {
  std::string parameter;  // K, M, N, L or r_min_bps
  std::vector<double> values;
};

struct RunConfig {
  ScenarioParams scenario;
  FrameConfig frame;
  PowerConfig power;
  double r_min_bps = 20e6;
  double p_max_w = 0.1;
  SolverSettings solver;
  MatchingSettings matching;
  std::vector<std::string> algorithms{"trimsm-slmdb"};
  int drops = 1;
  std::uint64_t base_seed = 1;
  bool record_timing = false;
  std::optional<SweepSpec> sweep;

  void validate() const;
};

/// Illustrative component tables. The watt values are placeholders, not measured data; the
/// load exponents are all 0 or 1 so that the affine reduction applies.
inline BsPowerConfig default_bs_power() {
  BsPowerConfig bs;
  bs.ref_values = {{"N", 1.0}, {"B", 20.0}, {"Q", 24.0}, {"Se", 6.0}, {"Ld", 1.0}, {"St", 1.0}};
  bs.act_values = {{"N", 5.0}, {"B", 20.0}, {"Q", 24.0}, {"Se", 6.0}, {"Ld", 1.0}, {"St", 1.0}};
  bs.rf_components = {
      {"clock", 0.2, {}},
      {"synthesizer", 0.4, {{"N", 1.0}}},
      {"adc", 0.3, {{"N", 1.0}, {"B", 1.0}, {"Q", 1.0}}},
      {"lna_mixer", 0.5, {{"N", 1.0}, {"B", 0.5}}},
  };
  bs.bbu_components = {
      {"digital_frontend", 0.8, {{"N", 1.0}, {"B", 1.0}, {"Ld", 1.0}}},
      {"channel_estimation", 0.4, {{"N", 1.0}, {"B", 1.0}, {"St", 1.0}, {"Ld", 1.0}}},
      {"decoding", 1.2, {{"B", 1.0}, {"Se", 1.0}, {"St", 1.0}, {"Ld", 1.0}}},
      {"platform", 2.0, {}},
  };
  bs.sectors = 1;
  bs.loss_ms = 0.1;
  bs.loss_dc = 0.05;
  bs.loss_co = 0.0;
  bs.sleep_scale = 0.1;
  return bs;
}

inline RunConfig default_run_config() {
  RunConfig c;
  c.scenario = ScenarioParams{};
  c.frame = FrameConfig{};
  c.power.bs = default_bs_power();
  c.power.sys = SystemPowerParams{};
  return c;
}

namespace detail {

inline void check_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  require(j.is_object(), "config: '" + where + "' must be an object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (auto it = j.begin(); it != j.end(); ++it)
    require(ok.count(it.key()) != 0, "config: unknown key '" + it.key() + "' in '" + where + "'");
}

template <class T>
void read(const json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw Error("config: bad value for '" + where + "." + key + "': " + e.what());
  }
}

inline ParameterMap read_parameter_map(const json& j, const std::string& where) {
  require(j.is_object(), "config: '" + where + "' must be an object");
  ParameterMap out;
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (const auto& k : scaling_parameters()) known = known || k == it.key();
    require(known, "config: unknown scaling parameter '" + it.key() + "' in '" + where + "'");
    require(it.value().is_number(), "config: '" + where + "." + it.key() + "' must be a number");
    out[it.key()] = it.value().get<double>();
  }
  return out;
}

inline std::vector<SubComponentSpec> read_components(const json& j, const std::string& where) {
  require(j.is_array(), "config: '" + where + "' must be an array");
  std::vector<SubComponentSpec> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string w = where + "[" + std::to_string(i) + "]";
    check_keys(j[i], w, {"name", "p_ref_w", "scaling_exponents"});
    SubComponentSpec c;
    read(j[i], "name", c.name, w);
    read(j[i], "p_ref_w", c.p_ref_w, w);
    if (j[i].contains("scaling_exponents")) c.scaling_exponents = read_parameter_map(j[i]["scaling_exponents"], w);
    out.push_back(std::move(c));
  }
  return out;
}

inline json components_json(const std::vector<SubComponentSpec>& list) {
  json a = json::array();
  for (const auto& c : list) a.push_back({{"name", c.name}, {"p_ref_w", c.p_ref_w}, {"scaling_exponents", c.scaling_exponents}});
  return a;
}

}  // namespace detail

/// Overrides `base` with the fields present in `j`.
inline RunConfig parse_run_config(const json& j, RunConfig c = default_run_config()) {
  using detail::check_keys;
  using detail::read;
  check_keys(j, "config", {"scenario", "frame", "power", "qos", "solver", "matching", "algorithm", "algorithms",
                           "drops", "base_seed", "record_timing", "sweep"});
  if (j.contains("scenario")) {
    const auto& s = j["scenario"];
    check_keys(s, "scenario", {"M", "K", "N", "L", "area_side", "pathloss_intercept_db", "pathloss_exponent",
                               "shadowing_std_db", "seed"});
    read(s, "M", c.scenario.M, "scenario");
    read(s, "K", c.scenario.K, "scenario");
    read(s, "N", c.scenario.N, "scenario");
    read(s, "L", c.scenario.L, "scenario");
    read(s, "area_side", c.scenario.area_side, "scenario");
    read(s, "pathloss_intercept_db", c.scenario.pathloss_intercept_db, "scenario");
    read(s, "pathloss_exponent", c.scenario.pathloss_exponent, "scenario");
    read(s, "shadowing_std_db", c.scenario.shadowing_std_db, "scenario");
    read(s, "seed", c.scenario.seed, "scenario");
  }
  if (j.contains("frame")) {
    const auto& f = j["frame"];
    check_keys(f, "frame", {"tau_c", "tau_p", "bandwidth_hz", "noise_power_w", "noise_power_dbm", "pilot_power_w"});
    require(!(f.contains("noise_power_w") && f.contains("noise_power_dbm")),
            "config: give either frame.noise_power_w or frame.noise_power_dbm");
    read(f, "tau_c", c.frame.tau_c, "frame");
    read(f, "tau_p", c.frame.tau_p, "frame");
    read(f, "bandwidth_hz", c.frame.bandwidth_hz, "frame");
    read(f, "noise_power_w", c.frame.noise_power_w, "frame");
    if (f.contains("noise_power_dbm")) {
      double dbm = 0.0;
      read(f, "noise_power_dbm", dbm, "frame");
      c.frame.noise_power_w = dbm_to_watts(dbm);
    }
    read(f, "pilot_power_w", c.frame.pilot_power_w, "frame");
  }
  if (j.contains("power")) {
    const auto& p = j["power"];
    check_keys(p, "power", {"bs", "system"});
    if (p.contains("bs")) {
      const auto& b = p["bs"];
      check_keys(b, "power.bs", {"rf_components", "bbu_components", "ref_values", "act_values", "sectors", "loss_ms",
                                 "loss_dc", "loss_co", "sleep_scale"});
      if (b.contains("rf_components")) c.power.bs.rf_components = detail::read_components(b["rf_components"], "power.bs.rf_components");
      if (b.contains("bbu_components")) c.power.bs.bbu_components = detail::read_components(b["bbu_components"], "power.bs.bbu_components");
      if (b.contains("ref_values")) c.power.bs.ref_values = detail::read_parameter_map(b["ref_values"], "power.bs.ref_values");
      if (b.contains("act_values")) c.power.bs.act_values = detail::read_parameter_map(b["act_values"], "power.bs.act_values");
      read(b, "sectors", c.power.bs.sectors, "power.bs");
      read(b, "loss_ms", c.power.bs.loss_ms, "power.bs");
      read(b, "loss_dc", c.power.bs.loss_dc, "power.bs");
      read(b, "loss_co", c.power.bs.loss_co, "power.bs");
      read(b, "sleep_scale", c.power.bs.sleep_scale, "power.bs");
    }
    if (p.contains("system")) {
      const auto& s = p["system"];
      check_keys(s, "power.system", {"fronthaul_fix_w", "fronthaul_trf_w_per_bps", "kappa", "psi_d", "stacking_gain",
                                     "pooling_capacity", "pooling_power", "cooling_gain", "loss_co_ec", "ue_circuit_w",
                                     "ue_pa_slope", "r_ref_bps"});
      auto& y = c.power.sys;
      read(s, "fronthaul_fix_w", y.fronthaul_fix_w, "power.system");
      read(s, "fronthaul_trf_w_per_bps", y.fronthaul_trf_w_per_bps, "power.system");
      read(s, "kappa", y.kappa, "power.system");
      read(s, "psi_d", y.psi_d, "power.system");
      read(s, "stacking_gain", y.stacking_gain, "power.system");
      read(s, "pooling_capacity", y.pooling_capacity, "power.system");
      read(s, "pooling_power", y.pooling_power, "power.system");
      read(s, "cooling_gain", y.cooling_gain, "power.system");
      read(s, "loss_co_ec", y.loss_co_ec, "power.system");
      read(s, "ue_circuit_w", y.ue_circuit_w, "power.system");
      read(s, "ue_pa_slope", y.ue_pa_slope, "power.system");
      read(s, "r_ref_bps", y.r_ref_bps, "power.system");
    }
  }
  if (j.contains("qos")) {
    check_keys(j["qos"], "qos", {"r_min_bps", "p_max_w"});
    read(j["qos"], "r_min_bps", c.r_min_bps, "qos");
    read(j["qos"], "p_max_w", c.p_max_w, "qos");
  }
  if (j.contains("solver")) {
    const auto& s = j["solver"];
    check_keys(s, "solver", {"slm_tol", "dinkelbach_tol", "inner_tol", "max_outer", "max_dinkelbach", "max_newton",
                             "barrier_t0", "barrier_factor", "feasibility_tol", "qos_rate_tol", "stall_rounds"});
    auto& v = c.solver;
    read(s, "slm_tol", v.slm_tol, "solver");
    read(s, "dinkelbach_tol", v.dinkelbach_tol, "solver");
    read(s, "inner_tol", v.inner_tol, "solver");
    read(s, "max_outer", v.max_outer, "solver");
    read(s, "max_dinkelbach", v.max_dinkelbach, "solver");
    read(s, "max_newton", v.max_newton, "solver");
    read(s, "barrier_t0", v.barrier_t0, "solver");
    read(s, "barrier_factor", v.barrier_factor, "solver");
    read(s, "feasibility_tol", v.feasibility_tol, "solver");
    read(s, "qos_rate_tol", v.qos_rate_tol, "solver");
    read(s, "stall_rounds", v.stall_rounds, "solver");
  }
  if (j.contains("matching")) {
    check_keys(j["matching"], "matching", {"recp_delta", "max_sweeps"});
    read(j["matching"], "recp_delta", c.matching.recp_delta, "matching");
    read(j["matching"], "max_sweeps", c.matching.max_sweeps, "matching");
  }
  require(!(j.contains("algorithm") && j.contains("algorithms")), "config: give either 'algorithm' or 'algorithms'");
  if (j.contains("algorithm")) {
    std::string a;
    read(j, "algorithm", a, "config");
    c.algorithms = {a};
  }
  read(j, "algorithms", c.algorithms, "config");
  read(j, "drops", c.drops, "config");
  read(j, "base_seed", c.base_seed, "config");
  read(j, "record_timing", c.record_timing, "config");
  if (j.contains("sweep")) {
    check_keys(j["sweep"], "sweep", {"parameter", "values"});
    SweepSpec s;
    read(j["sweep"], "parameter", s.parameter, "sweep");
    read(j["sweep"], "values", s.values, "sweep");
    c.sweep = s;
  }
  c.validate();
  return c;
}

inline RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), "config: cannot open '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error("config: '" + path + "' is not valid JSON: " + e.what());
  }
  return parse_run_config(j);
}

inline json to_json(const RunConfig& c) {
  json j;
  const auto& s = c.scenario;
  j["scenario"] = {{"M", s.M}, {"K", s.K}, {"N", s.N}, {"L", s.L}, {"area_side", s.area_side},
                   {"pathloss_intercept_db", s.pathloss_intercept_db}, {"pathloss_exponent", s.pathloss_exponent},
                   {"shadowing_std_db", s.shadowing_std_db}, {"seed", s.seed}};
  const auto& f = c.frame;
  j["frame"] = {{"tau_c", f.tau_c}, {"tau_p", f.tau_p}, {"bandwidth_hz", f.bandwidth_hz},
                {"noise_power_w", f.noise_power_w}, {"pilot_power_w", f.pilot_power_w}};
  const auto& b = c.power.bs;
  j["power"]["bs"] = {{"rf_components", detail::components_json(b.rf_components)},
                      {"bbu_components", detail::components_json(b.bbu_components)},
                      {"ref_values", b.ref_values}, {"act_values", b.act_values}, {"sectors", b.sectors},
                      {"loss_ms", b.loss_ms}, {"loss_dc", b.loss_dc}, {"loss_co", b.loss_co},
                      {"sleep_scale", b.sleep_scale}};
  const auto& y = c.power.sys;
  j["power"]["system"] = {{"fronthaul_fix_w", y.fronthaul_fix_w}, {"fronthaul_trf_w_per_bps", y.fronthaul_trf_w_per_bps},
                          {"kappa", y.kappa}, {"psi_d", y.psi_d}, {"stacking_gain", y.stacking_gain},
                          {"pooling_capacity", y.pooling_capacity}, {"pooling_power", y.pooling_power},
                          {"cooling_gain", y.cooling_gain}, {"loss_co_ec", y.loss_co_ec},
                          {"ue_circuit_w", y.ue_circuit_w}, {"ue_pa_slope", y.ue_pa_slope}, {"r_ref_bps", y.r_ref_bps}};
  j["qos"] = {{"r_min_bps", c.r_min_bps}, {"p_max_w", c.p_max_w}};
  const auto& v = c.solver;
  j["solver"] = {{"slm_tol", v.slm_tol}, {"dinkelbach_tol", v.dinkelbach_tol}, {"inner_tol", v.inner_tol},
                 {"max_outer", v.max_outer}, {"max_dinkelbach", v.max_dinkelbach}, {"max_newton", v.max_newton},
                 {"barrier_t0", v.barrier_t0}, {"barrier_factor", v.barrier_factor},
                 {"feasibility_tol", v.feasibility_tol}, {"qos_rate_tol", v.qos_rate_tol},
                 {"stall_rounds", v.stall_rounds}};
  j["matching"] = {{"recp_delta", c.matching.recp_delta}, {"max_sweeps", c.matching.max_sweeps}};
  j["algorithms"] = c.algorithms;
  j["drops"] = c.drops;
  j["base_seed"] = c.base_seed;
  j["record_timing"] = c.record_timing;
  if (c.sweep) j["sweep"] = {{"parameter", c.sweep->parameter}, {"values", c.sweep->values}};
  return j;
}

namespace detail {

inline bool is_whole(double v) { return std::floor(v) == v; }

}  // namespace detail

/// Applies one sweep value to a copy of the config.
inline RunConfig with_sweep_value(RunConfig c, const std::string& parameter, double value) {
  if (parameter == "K" || parameter == "M" || parameter == "N" || parameter == "L") {
    require(detail::is_whole(value) && value >= 1.0, "sweep: '" + parameter + "' values must be positive integers");
    const int v = static_cast<int>(value);
    if (parameter == "K") c.scenario.K = v;
    if (parameter == "M") c.scenario.M = v;
    if (parameter == "N") c.scenario.N = v;
    if (parameter == "L") c.scenario.L = v;
  } else if (parameter == "r_min_bps") {
    require(value >= 0.0, "sweep: r_min_bps values must be >= 0");
    c.r_min_bps = value;
  } else {
    throw Error("sweep: unsupported parameter '" + parameter + "' (use K, M, N, L or r_min_bps)");
  }
  return c;
}

inline void RunConfig::validate() const {
  scenario.validate();
  frame.validate();
  require(scenario.K <= frame.tau_p, "config: orthogonal pilots need K <= tau_p");
  power.bs.validate_affine();
  power.sys.validate();
  for (const char* key : {"Ld"})
    require(power.bs.ref_values.count(key) && power.bs.act_values.count(key),
            std::string("config: power.bs needs ref and act values for '") + key + "'");
  require(r_min_bps >= 0.0, "config: qos.r_min_bps must be >= 0");
  require(p_max_w > 0.0, "config: qos.p_max_w must be > 0");
  solver.validate();
  require(matching.recp_delta > 0.0 && matching.recp_delta <= 100.0, "config: matching.recp_delta must lie in (0, 100]");
  require(matching.max_sweeps >= 1, "config: matching.max_sweeps must be >= 1");
  require(!algorithms.empty(), "config: no algorithm given");
  for (const auto& a : algorithms) require(known_algorithm(a), "config: unknown algorithm '" + a + "'");
  require(drops >= 1, "config: drops must be >= 1");
  if (sweep) {
    require(!sweep->values.empty(), "config: sweep.values is empty");
    RunConfig base = *this;
    base.sweep.reset();
    for (double v : sweep->values) with_sweep_value(base, sweep->parameter, v).validate();
  }
}

}  // namespace fdran
