/**
 * \file fdran/powermodel.hpp
 *
 * \brief Holistic uplink power consumption: UBSs, sleep mode, fronthaul, edge cloud and UEs.
 *
 * Two evaluation routes are provided on purpose. `network_power_direct` walks the component
 * tables UBS by UBS at its actual load; `build_affine_form` collapses the same model into
 * c0 + sum_k alpha_k R_k / R_ref + sum_k delta_k P_k, which is what the power controller
 * optimizes against.
 */
#pragma once

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fdran/common.hpp"
#include "fdran/netmodel.hpp"

namespace fdran {

/// Keys: N, B, Q, Se, Ld, St.
using ParameterMap = std::map<std::string, double>;

inline const std::vector<std::string>& scaling_parameters() {
  static const std::vector<std::string> keys{"N", "B", "Q", "Se", "Ld", "St"};
  return keys;
}

struct SubComponentSpec {
  std::string name;
  double p_ref_w = 0.0;
  ParameterMap scaling_exponents;

  double exponent(const std::string& key) const {
    auto it = scaling_exponents.find(key);
    return it == scaling_exponents.end() ? 0.0 : it->second;
  }
};

struct BsPowerConfig {
  std::vector<SubComponentSpec> rf_components;
  std::vector<SubComponentSpec> bbu_components;
  ParameterMap ref_values;
  ParameterMap act_values;
  int sectors = 1;
  double loss_ms = 0.1;
  double loss_dc = 0.05;
  double loss_co = 0.0;
  double sleep_scale = 0.1;

  double loss_divisor() const { return (1.0 - loss_ms) * (1.0 - loss_dc) * (1.0 - loss_co); }

  void validate() const {
    require(sectors >= 1, "power: sectors must be >= 1");
    for (double l : {loss_ms, loss_dc, loss_co}) require(l >= 0.0 && l < 1.0, "power: losses must lie in [0,1)");
    require(sleep_scale >= 0.0 && sleep_scale <= 1.0, "power: sleep_scale must lie in [0,1]");
    for (const auto* list : {&rf_components, &bbu_components})
      for (const auto& c : *list) {
        require(c.p_ref_w >= 0.0, "power: component '" + c.name + "' has negative reference power");
        for (const auto& [key, s] : c.scaling_exponents) {
          require(std::isfinite(s), "power: component '" + c.name + "' has a non-finite exponent");
          require(ref_values.count(key) != 0 && act_values.count(key) != 0,
                  "power: component '" + c.name + "' scales with unknown parameter '" + key + "'");
        }
      }
    for (const auto& [key, v] : ref_values) require(v > 0.0, "power: reference value for '" + key + "' must be > 0");
  }

  /// The affine reduction needs every load exponent to be 0 or 1.
  void validate_affine() const {
    validate();
    for (const auto* list : {&rf_components, &bbu_components})
      for (const auto& c : *list) {
        const double s = c.exponent("Ld");
        require(s == 0.0 || s == 1.0, "power: component '" + c.name +
                                          "' has load exponent " + std::to_string(s) +
                                          "; the affine reduction needs 0 or 1");
      }
  }
};

struct SystemPowerParams {
  double fronthaul_fix_w = 0.825;
  double fronthaul_trf_w_per_bps = 0.25e-9;
  double kappa = 1.0;
  double psi_d = 0.8;
  double stacking_gain = 2.0;
  double pooling_capacity = 5.0;
  double pooling_power = 2.0;
  double cooling_gain = 2.0;
  double loss_co_ec = 0.1;
  double ue_circuit_w = 1.31;
  double ue_pa_slope = 2.6;
  double r_ref_bps = 40e6;

  void validate() const {
    require(kappa >= 0.0 && kappa <= 1.0, "power: kappa must lie in [0,1]");
    require(psi_d >= 0.0 && psi_d <= 1.0, "power: psi_d must lie in [0,1]");
    require(ue_pa_slope >= 1.0, "power: ue_pa_slope must be >= 1");
    require(r_ref_bps > 0.0, "power: r_ref_bps must be > 0");
    require(stacking_gain > 0.0 && pooling_capacity > 0.0 && cooling_gain > 0.0,
            "power: stacking, pooling and cooling gains must be > 0");
    require(loss_co_ec >= 0.0 && loss_co_ec < 1.0, "power: loss_co_ec must lie in [0,1)");
    require(fronthaul_fix_w >= 0.0 && fronthaul_trf_w_per_bps >= 0.0 && ue_circuit_w >= 0.0 && pooling_power >= 0.0,
            "power: fronthaul, UE circuit and pooling powers must be >= 0");
  }
};

struct PowerConfig {
  BsPowerConfig bs;
  SystemPowerParams sys;
};

struct PowerBreakdown {
  double ubs_active_w = 0.0;
  double ubs_sleep_w = 0.0;
  double fronthaul_w = 0.0;
  double edge_cloud_w = 0.0;
  double ue_w = 0.0;
  double total_w = 0.0;
};

/// P_N = c0 + sum_k alpha_k R_k / R_ref + sum_k delta_k P_k, for one fixed association.
struct AffinePowerForm {
  double c0_w = 0.0;
  std::vector<double> alpha_per_k;
  std::vector<double> delta_per_k;
  double r_ref_bps = 1.0;

  // Parts of c0 and of alpha, kept so the total can be broken down by component.
  double ubs_active_fixed_w = 0.0;
  double ubs_sleep_w = 0.0;
  double fronthaul_fixed_w = 0.0;
  double edge_cloud_fixed_w = 0.0;
  double ue_circuit_w = 0.0;
  double alpha_ubs = 0.0;
  double alpha_fronthaul = 0.0;
  double alpha_edge_cloud = 0.0;

  double evaluate(const Eigen::VectorXd& p, const Eigen::VectorXd& rates) const {
    double total = c0_w;
    for (std::size_t k = 0; k < alpha_per_k.size(); ++k)
      total += alpha_per_k[k] * rates[static_cast<Eigen::Index>(k)] / r_ref_bps +
               delta_per_k[k] * p[static_cast<Eigen::Index>(k)];
    return total;
  }
};

/// Reference power scaled by prod_x (act_x / ref_x)^s_x; missing exponents mean no dependence.
inline double component_power(const SubComponentSpec& spec, const ParameterMap& act, const ParameterMap& ref) {
  double p = spec.p_ref_w;
  for (const auto& [key, s] : spec.scaling_exponents) {
    if (s == 0.0) continue;
    auto r = ref.find(key);
    auto a = act.find(key);
    require(r != ref.end() && a != act.end(), "component_power: missing value for '" + key + "'");
    require(r->second > 0.0, "component_power: reference value for '" + key + "' must be > 0");
    p *= std::pow(a->second / r->second, s);
  }
  return p;
}

namespace detail {

inline ParameterMap with_load(const BsPowerConfig& cfg, double load_fraction) {
  ParameterMap act = cfg.act_values;
  act["Ld"] = load_fraction * cfg.ref_values.at("Ld");
  return act;
}

inline double bbu_sum(const BsPowerConfig& cfg, const ParameterMap& act) {
  double s = 0.0;
  for (const auto& c : cfg.bbu_components) s += component_power(c, act, cfg.ref_values);
  return s;
}

inline double rf_sum(const BsPowerConfig& cfg, const ParameterMap& act) {
  double s = 0.0;
  for (const auto& c : cfg.rf_components) s += component_power(c, act, cfg.ref_values);
  return s;
}

/// Load fraction of the configured operating point (act Ld / ref Ld).
inline double operating_load(const BsPowerConfig& cfg) {
  return cfg.act_values.at("Ld") / cfg.ref_values.at("Ld");
}

}  // namespace detail

/// Power of one UBS at a given load fraction (Ld_act = load_fraction * Ld_ref).
inline double ubs_power(const BsPowerConfig& cfg, double load_fraction) {
  require(load_fraction >= 0.0, "ubs_power: load fraction must be >= 0");
  const auto act = detail::with_load(cfg, load_fraction);
  return cfg.sectors * (detail::rf_sum(cfg, act) + detail::bbu_sum(cfg, act)) / cfg.loss_divisor();
}

/// Share of UBS power spent in BBU processing that can be offloaded to the edge cloud,
/// evaluated at the configured operating point. UBSs are configured identically, so the
/// ratio does not depend on M; the sums over M are kept to mirror the definition.
inline double theta(const BsPowerConfig& cfg, const SystemPowerParams& sys, int M) {
  require(M >= 1, "theta: M must be >= 1");
  const double load = detail::operating_load(cfg);
  const auto act = detail::with_load(cfg, load);
  double bbu = 0.0, total = 0.0;
  for (int m = 0; m < M; ++m) {
    bbu += cfg.sectors * detail::bbu_sum(cfg, act) / cfg.loss_divisor();
    total += ubs_power(cfg, load);
  }
  require(total > 0.0, "theta: total UBS power is zero");
  return sys.psi_d * bbu / total;
}

/// Sleep-mode power after edge-cloud offloading, (1 - kappa theta) eta_s P^UBS(Ld = 0).
inline double sleep_power(const BsPowerConfig& cfg, const SystemPowerParams& sys, double theta_value) {
  return (1.0 - sys.kappa * theta_value) * cfg.sleep_scale * ubs_power(cfg, 0.0);
}

/// xi / M * ceil(M / (lambda zeta)).
inline double pooling_stacking_factor(const SystemPowerParams& sys, int M) {
  require(M >= 1, "pooling: M must be >= 1");
  const double units = std::ceil(static_cast<double>(M) / (sys.pooling_capacity * sys.stacking_gain) - 1e-12);
  return sys.pooling_power / M * units;
}

/// Edge-cloud cooling multiplier; exceeds 1 when the UBSs have no cooling of their own.
inline double cooling_factor(const BsPowerConfig& cfg, const SystemPowerParams& sys) {
  const double s = sys.loss_co_ec, rho = sys.cooling_gain;
  if (cfg.loss_co != 0.0) return s / rho + 1.0 - s;
  return s / ((1.0 - s) * rho) + 1.0;
}

/// Edge-cloud power from the unscaled per-UBS powers of all UBSs.
inline double edge_cloud_power(const BsPowerConfig& cfg, const SystemPowerParams& sys, int M,
                               const std::vector<double>& per_ubs_powers, double theta_value) {
  require(static_cast<int>(per_ubs_powers.size()) == M, "edge_cloud_power: need one power per UBS");
  double base = 0.0;
  for (double p : per_ubs_powers) base += p;
  return sys.kappa * theta_value * base * pooling_stacking_factor(sys, M) * cooling_factor(cfg, sys);
}

/// Per-UBS load fractions: each UE's R_k / R_ref split evenly over its serving UBSs, so that
/// the loads of the active UBSs sum to sum_k R_k / R_ref.
inline std::vector<double> ubs_loads(const Association& assoc, const Eigen::VectorXd& rates, double r_ref_bps) {
  std::vector<double> load(static_cast<std::size_t>(assoc.M()), 0.0);
  for (int k = 0; k < assoc.K(); ++k) {
    const auto serving = assoc.serving(k);
    if (serving.empty()) continue;
    const double share = rates[k] / r_ref_bps / static_cast<double>(serving.size());
    for (int m : serving) load[static_cast<std::size_t>(m)] += share;
  }
  return load;
}

/// Load-independent UBS power, from the components whose load exponent is zero.
inline double ubs_fixed_power(const BsPowerConfig& cfg) {
  const auto act = detail::with_load(cfg, 0.0);
  double s = 0.0;
  for (const auto* list : {&cfg.rf_components, &cfg.bbu_components})
    for (const auto& c : *list)
      if (c.exponent("Ld") == 0.0) s += component_power(c, act, cfg.ref_values);
  return cfg.sectors * s / cfg.loss_divisor();
}

/// Traffic coefficient P_trf: power per unit of load fraction, from the load-linear components.
inline double traffic_power_coefficient(const BsPowerConfig& cfg) {
  const auto act = detail::with_load(cfg, 1.0);
  double s = 0.0;
  for (const auto* list : {&cfg.rf_components, &cfg.bbu_components})
    for (const auto& c : *list)
      if (c.exponent("Ld") == 1.0) s += component_power(c, act, cfg.ref_values);
  return cfg.sectors * s / cfg.loss_divisor();
}

/// Network power evaluated straight from the component tables, UBS by UBS.
inline PowerBreakdown network_power_direct(const Eigen::VectorXd& p, const Eigen::VectorXd& rates,
                                           const Association& assoc, const PowerConfig& cfg) {
  const int M = assoc.M(), K = assoc.K();
  const auto& sys = cfg.sys;
  const double th = theta(cfg.bs, sys, M);
  const double scale = 1.0 - sys.kappa * th;
  const auto loads = ubs_loads(assoc, rates, sys.r_ref_bps);

  PowerBreakdown b;
  std::vector<double> base(static_cast<std::size_t>(M));
  const double idle = ubs_power(cfg.bs, 0.0);
  double sum_rates = 0.0;
  for (int k = 0; k < K; ++k) sum_rates += rates[k];
  for (int m = 0; m < M; ++m) {
    if (assoc.active(m)) {
      base[m] = ubs_power(cfg.bs, loads[m]);
      b.ubs_active_w += scale * base[m];
      b.fronthaul_w += sys.fronthaul_fix_w;
    } else {
      base[m] = idle;
      b.ubs_sleep_w += scale * cfg.bs.sleep_scale * idle;
    }
    // The traffic term of every fronthaul link carries the rates of all UEs.
    b.fronthaul_w += sys.fronthaul_trf_w_per_bps * sum_rates;
  }
  b.edge_cloud_w = edge_cloud_power(cfg.bs, sys, M, base, th);
  for (int k = 0; k < K; ++k) b.ue_w += sys.ue_circuit_w + sys.ue_pa_slope * p[k];
  b.total_w = b.ubs_active_w + b.ubs_sleep_w + b.fronthaul_w + b.edge_cloud_w + b.ue_w;
  return b;
}

/// Collapses the network power for a fixed association into its affine form.
inline AffinePowerForm build_affine_form(const Association& assoc, const PowerConfig& cfg) {
  cfg.bs.validate_affine();
  cfg.sys.validate();
  const int M = assoc.M(), K = assoc.K();
  const auto& sys = cfg.sys;
  const double th = theta(cfg.bs, sys, M);
  const double scale = 1.0 - sys.kappa * th;
  const double fixed = ubs_fixed_power(cfg.bs);
  const double trf = traffic_power_coefficient(cfg.bs);
  const double ec = sys.kappa * th * pooling_stacking_factor(sys, M) * cooling_factor(cfg.bs, sys);
  const int active = assoc.active_count();

  AffinePowerForm f;
  f.r_ref_bps = sys.r_ref_bps;
  f.ubs_active_fixed_w = scale * fixed * active;
  f.ubs_sleep_w = scale * cfg.bs.sleep_scale * fixed * (M - active);
  f.fronthaul_fixed_w = sys.fronthaul_fix_w * active;
  // Sleeping UBSs still count at their idle power in the edge-cloud base.
  f.edge_cloud_fixed_w = ec * fixed * M;
  f.ue_circuit_w = sys.ue_circuit_w * K;
  f.c0_w = f.ubs_active_fixed_w + f.ubs_sleep_w + f.fronthaul_fixed_w + f.edge_cloud_fixed_w + f.ue_circuit_w;

  f.alpha_ubs = scale * trf;
  f.alpha_fronthaul = M * sys.fronthaul_trf_w_per_bps * sys.r_ref_bps;
  f.alpha_edge_cloud = ec * trf;
  const double alpha = f.alpha_ubs + f.alpha_fronthaul + f.alpha_edge_cloud;
  f.alpha_per_k.assign(static_cast<std::size_t>(K), alpha);
  f.delta_per_k.assign(static_cast<std::size_t>(K), sys.ue_pa_slope);
  return f;
}

/// Breakdown reconstructed from the affine form.
inline PowerBreakdown network_power(const Eigen::VectorXd& p, const Eigen::VectorXd& rates,
                                    const AffinePowerForm& form) {
  double load = 0.0, tx = 0.0;
  for (std::size_t k = 0; k < form.alpha_per_k.size(); ++k) {
    load += rates[static_cast<Eigen::Index>(k)] / form.r_ref_bps;
    tx += form.delta_per_k[k] * p[static_cast<Eigen::Index>(k)];
  }
  PowerBreakdown b;
  b.ubs_active_w = form.ubs_active_fixed_w + form.alpha_ubs * load;
  b.ubs_sleep_w = form.ubs_sleep_w;
  b.fronthaul_w = form.fronthaul_fixed_w + form.alpha_fronthaul * load;
  b.edge_cloud_w = form.edge_cloud_fixed_w + form.alpha_edge_cloud * load;
  b.ue_w = form.ue_circuit_w + tx;
  b.total_w = b.ubs_active_w + b.ubs_sleep_w + b.fronthaul_w + b.edge_cloud_w + b.ue_w;
  return b;
}

/// Sum rate over network power, in bits per joule.
inline double energy_efficiency(const Eigen::VectorXd& p, const Eigen::VectorXd& rates, const AffinePowerForm& form) {
  const double pn = form.evaluate(p, rates);
  require(pn > 0.0, "energy_efficiency: network power must be positive");
  return rates.sum() / pn;
}

inline double energy_efficiency(const Eigen::VectorXd& p, const Association& assoc, const CoefficientTensor& tensor,
                                const FrameConfig& frame, const AffinePowerForm& form) {
  return energy_efficiency(p, uplink_rate(p, assoc, tensor, frame), form);
}

}  // namespace fdran
