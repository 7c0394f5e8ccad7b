#include <gtest/gtest.h>

#include "fdran/config.hpp"

using namespace fdran;

TEST(Config, DefaultsValidate) {
  const auto c = default_run_config();
  EXPECT_NO_THROW(c.validate());
  EXPECT_EQ(c.scenario.M, 16);
  EXPECT_EQ(c.scenario.K, 5);
  EXPECT_EQ(c.frame.tau_c, 190);
  EXPECT_EQ(c.frame.tau_p, 10);
  EXPECT_DOUBLE_EQ(c.power.sys.fronthaul_fix_w, 0.825);
  EXPECT_DOUBLE_EQ(c.power.sys.ue_pa_slope, 2.6);
  EXPECT_DOUBLE_EQ(c.p_max_w, 0.1);
}

TEST(Config, OverridesFieldByField) {
  const auto c = parse_run_config(json::parse(R"({
    "scenario": {"M": 8, "K": 4},
    "frame": {"noise_power_dbm": -100},
    "qos": {"r_min_bps": 1e7},
    "algorithm": "trimsm-eipc",
    "drops": 3,
    "base_seed": 99
  })"));
  EXPECT_EQ(c.scenario.M, 8);
  EXPECT_EQ(c.scenario.N, 5);
  EXPECT_NEAR(c.frame.noise_power_w, 1e-13, 1e-25);
  EXPECT_EQ(c.algorithms, std::vector<std::string>{"trimsm-eipc"});
  EXPECT_EQ(c.drops, 3);
  EXPECT_EQ(c.base_seed, 99u);
}

TEST(Config, RejectsUnknownKeys) {
  EXPECT_THROW(parse_run_config(json::parse(R"({"scenaro": {}})")), Error);
  EXPECT_THROW(parse_run_config(json::parse(R"({"scenario": {"MM": 3}})")), Error);
  EXPECT_THROW(parse_run_config(json::parse(R"({"power": {"bs": {"ref_values": {"X": 1}}}})")), Error);
}

TEST(Config, RejectsBadValues) {
  EXPECT_THROW(parse_run_config(json::parse(R"({"drops": 0})")), Error);
  EXPECT_THROW(parse_run_config(json::parse(R"({"algorithm": "greedy"})")), Error);
  EXPECT_THROW(parse_run_config(json::parse(R"({"scenario": {"K": 11}})")), Error);
  EXPECT_THROW(parse_run_config(json::parse(R"({"scenario": {"M": "many"}})")), Error);
  EXPECT_THROW(parse_run_config(json::parse(R"({"frame": {"noise_power_w": 1e-13, "noise_power_dbm": -90}})")),
               Error);
  EXPECT_THROW(parse_run_config(json::parse(R"({"algorithm": "recp", "algorithms": ["recp"]})")), Error);
}

TEST(Config, SweepValuesChecked) {
  EXPECT_NO_THROW(parse_run_config(json::parse(R"({"sweep": {"parameter": "K", "values": [2, 4]}})")));
  EXPECT_THROW(parse_run_config(json::parse(R"({"sweep": {"parameter": "K", "values": [2.5]}})")), Error);
  EXPECT_THROW(parse_run_config(json::parse(R"({"sweep": {"parameter": "K", "values": [12]}})")), Error);
  EXPECT_THROW(parse_run_config(json::parse(R"({"sweep": {"parameter": "tau", "values": [1]}})")), Error);
  EXPECT_THROW(parse_run_config(json::parse(R"({"sweep": {"parameter": "M", "values": []}})")), Error);
}

TEST(Config, JsonRoundTrip) {
  auto c = default_run_config();
  c.scenario.M = 7;
  c.algorithms = {"recp", "nos"};
  c.sweep = SweepSpec{"r_min_bps", {1e6, 2e6}};
  const auto back = parse_run_config(to_json(c));
  EXPECT_EQ(to_json(back), to_json(c));
}

TEST(Config, ShippedDefaultsFileMatchesBuiltIns) {
  const auto c = load_run_config(std::string(FDRAN_SOURCE_DIR) + "/configs/table3_defaults.json");
  EXPECT_EQ(to_json(c), to_json(default_run_config()));
}

TEST(Config, MissingFileThrows) { EXPECT_THROW(load_run_config("/nonexistent/config.json"), Error); }
