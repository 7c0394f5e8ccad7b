#include <gtest/gtest.h>

#include <cmath>

#include "fdran/config.hpp"
#include "fdran/powermodel.hpp"

using namespace fdran;

namespace {

// Two components, one fixed and one load-linear, easy to evaluate by hand.
BsPowerConfig toy_bs() {
  BsPowerConfig bs;
  bs.ref_values = {{"N", 1.0}, {"B", 10.0}, {"Ld", 1.0}};
  bs.act_values = {{"N", 4.0}, {"B", 20.0}, {"Ld", 1.0}};
  bs.rf_components = {{"rf", 1.0, {{"N", 1.0}}}};
  bs.bbu_components = {{"bb", 0.5, {{"B", 1.0}, {"Ld", 1.0}}}, {"ctl", 2.0, {}}};
  bs.loss_ms = 0.2;
  bs.loss_dc = 0.5;
  return bs;
}

}  // namespace

TEST(Components, PowerLawScaling) {
  SubComponentSpec c{"x", 3.0, {{"N", 2.0}, {"B", 0.5}}};
  ParameterMap ref{{"N", 2.0}, {"B", 4.0}}, act{{"N", 6.0}, {"B", 16.0}};
  EXPECT_NEAR(component_power(c, act, ref), 3.0 * 9.0 * 2.0, 1e-12);
  SubComponentSpec fixed{"y", 1.5, {}};
  EXPECT_EQ(component_power(fixed, act, ref), 1.5);
}

TEST(Components, MissingParameterThrows) {
  SubComponentSpec c{"x", 1.0, {{"Q", 1.0}}};
  EXPECT_THROW(component_power(c, {{"N", 1.0}}, {{"N", 1.0}}), Error);
}

TEST(UbsPower, HandComputed) {
  const auto bs = toy_bs();
  // rf = 1 * 4, bb = 0.5 * 2 * load, ctl = 2; divisor 0.8 * 0.5.
  EXPECT_NEAR(ubs_power(bs, 0.0), (4.0 + 2.0) / 0.4, 1e-12);
  EXPECT_NEAR(ubs_power(bs, 0.5), (4.0 + 0.5 + 2.0) / 0.4, 1e-12);
  EXPECT_NEAR(ubs_fixed_power(bs), 6.0 / 0.4, 1e-12);
  EXPECT_NEAR(traffic_power_coefficient(bs), 1.0 / 0.4, 1e-12);
}

TEST(UbsPower, ThetaAtOperatingPoint) {
  auto bs = toy_bs();
  SystemPowerParams sys;
  // BBU share at Ld = 1: (1 + 2) / (4 + 1 + 2), times psi_d.
  EXPECT_NEAR(theta(bs, sys, 7), 0.8 * 3.0 / 7.0, 1e-12);
  bs.act_values["Ld"] = 0.5;
  EXPECT_NEAR(theta(bs, sys, 3), 0.8 * 2.5 / 6.5, 1e-12);
}

TEST(EdgeCloud, PoolingAndCooling) {
  SystemPowerParams sys;
  // xi / M * ceil(M / (lambda zeta)) with lambda = 5, zeta = 2, xi = 2.
  EXPECT_NEAR(pooling_stacking_factor(sys, 16), 2.0 / 16.0 * 2.0, 1e-15);
  EXPECT_NEAR(pooling_stacking_factor(sys, 10), 2.0 / 10.0 * 1.0, 1e-15);
  EXPECT_NEAR(pooling_stacking_factor(sys, 11), 2.0 / 11.0 * 2.0, 1e-15);
  BsPowerConfig bs = toy_bs();
  bs.loss_co = 0.0;
  EXPECT_NEAR(cooling_factor(bs, sys), 0.1 / (0.9 * 2.0) + 1.0, 1e-15);
  bs.loss_co = 0.05;
  EXPECT_NEAR(cooling_factor(bs, sys), 0.1 / 2.0 + 0.9, 1e-15);
}

TEST(NetworkPower, DirectHandComputed) {
  PowerConfig cfg{toy_bs(), SystemPowerParams{}};
  Association a(2, 1);
  a.set(0, 0, true);
  Eigen::VectorXd p(1), r(1);
  p << 0.05;
  r << 20e6;
  const auto b = network_power_direct(p, r, a, cfg);
  const double th = 0.8 * 3.0 / 7.0, scale = 1.0 - th;
  const double load = 0.5;  // 20e6 / 40e6
  const double active = (4.0 + load + 2.0) / 0.4, idle = 6.0 / 0.4;
  EXPECT_NEAR(b.ubs_active_w, scale * active, 1e-12);
  EXPECT_NEAR(b.ubs_sleep_w, scale * 0.1 * idle, 1e-12);
  EXPECT_NEAR(b.fronthaul_w, 0.825 + 2 * 0.25e-9 * 20e6, 1e-12);
  const double ec = th * (active + idle) * (2.0 / 2.0 * 1.0) * (0.1 / 1.8 + 1.0);
  EXPECT_NEAR(b.edge_cloud_w, ec, 1e-12);
  EXPECT_NEAR(b.ue_w, 1.31 + 2.6 * 0.05, 1e-12);
  EXPECT_NEAR(b.total_w, b.ubs_active_w + b.ubs_sleep_w + b.fronthaul_w + b.edge_cloud_w + b.ue_w, 1e-12);
}

TEST(NetworkPower, AffineMatchesDirectWithDefaults) {
  PowerConfig cfg{default_bs_power(), SystemPowerParams{}};
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const int M = 6, K = 4;
    Association a(M, K);
    for (int m = 0; m < M; ++m)
      for (int k = 0; k < K; ++k) a.set(m, k, uniform01(rng) < 0.4);
    Eigen::VectorXd p(K), r(K);
    for (int k = 0; k < K; ++k) {
      p[k] = 0.1 * uniform01(rng);
      r[k] = a.ue_degree(k) > 0 ? 80e6 * uniform01(rng) : 0.0;
    }
    const auto direct = network_power_direct(p, r, a, cfg);
    const auto form = build_affine_form(a, cfg);
    const auto affine = network_power(p, r, form);
    EXPECT_NEAR(form.evaluate(p, r) / direct.total_w, 1.0, 1e-12);
    EXPECT_NEAR(affine.edge_cloud_w, direct.edge_cloud_w, 1e-9 * direct.total_w);
    EXPECT_NEAR(affine.ubs_sleep_w, direct.ubs_sleep_w, 1e-9 * direct.total_w);
  }
}

TEST(NetworkPower, RejectsNonlinearLoadExponent) {
  PowerConfig cfg{toy_bs(), SystemPowerParams{}};
  cfg.bs.bbu_components[0].scaling_exponents["Ld"] = 0.5;
  Association a(1, 1);
  a.set(0, 0, true);
  EXPECT_THROW(build_affine_form(a, cfg), Error);
}

TEST(NetworkPower, ValidationRejectsBadValues) {
  SystemPowerParams sys;
  sys.kappa = 1.5;
  EXPECT_THROW(sys.validate(), Error);
  auto bs = toy_bs();
  bs.loss_ms = 1.0;
  EXPECT_THROW(bs.validate(), Error);
  bs = toy_bs();
  bs.rf_components.push_back({"odd", 1.0, {{"Q", 1.0}}});
  EXPECT_THROW(bs.validate(), Error);
}

TEST(NetworkPower, EnergyEfficiencyIsRateOverPower) {
  AffinePowerForm f;
  f.c0_w = 10.0;
  f.alpha_per_k = {2.0, 2.0};
  f.delta_per_k = {3.0, 3.0};
  f.r_ref_bps = 1e6;
  Eigen::VectorXd p(2), r(2);
  p << 0.1, 0.2;
  r << 1e6, 3e6;
  EXPECT_NEAR(energy_efficiency(p, r, f), 4e6 / (10.0 + 8.0 + 0.9), 1e-6);
}
