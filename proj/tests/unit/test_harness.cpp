#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>

#include "fdran/harness.hpp"

using namespace fdran;

namespace {

RunConfig small_config() {
  auto c = default_run_config();
  c.scenario.M = 6;
  c.scenario.K = 3;
  c.drops = 3;
  c.base_seed = 77;
  c.algorithms = {"trimsm-eipc", "recp", "llsf"};
  return c;
}

ResultRecord record(const std::string& alg, double ee, bool feasible, double sweep = 0.0) {
  ResultRecord r;
  r.algorithm = alg;
  r.ee_bits_per_joule = ee;
  r.feasible = feasible;
  r.sweep_parameter = "K";
  r.sweep_value = sweep;
  r.active_ubs_count = 2;
  return r;
}

}  // namespace

TEST(Run, DeterministicAndWorkerIndependent) {
  const auto c = small_config();
  const auto a = run(c, 1);
  const auto b = run(c, 3);
  ASSERT_EQ(a.size(), 9u);
  EXPECT_EQ(a, b);
  EXPECT_EQ(to_csv(a), to_csv(run(c, 1)));
}

TEST(Run, OrderAndSeeds) {
  const auto recs = run(small_config(), 2);
  for (std::size_t i = 0; i < recs.size(); ++i) {
    EXPECT_EQ(recs[i].drop, static_cast<int>(i / 3));
    EXPECT_EQ(recs[i].algorithm, small_config().algorithms[i % 3]);
    EXPECT_EQ(recs[i].drop_seed, 77u ^ static_cast<std::uint64_t>(i / 3));
  }
}

TEST(Run, AlgorithmsShareTheDrop) {
  const auto c = small_config();
  const auto a = make_drop_context(c, drop_seed(c.base_seed, 1));
  const auto b = make_drop_context(c, drop_seed(c.base_seed, 1));
  EXPECT_EQ(a.tensor.mu, b.tensor.mu);
  EXPECT_EQ(a.tensor.omega_, b.tensor.omega_);
  EXPECT_EQ(a.power.bs.act_values.at("N"), c.scenario.N);
}

TEST(Run, RecordsAreSelfConsistent) {
  for (const auto& r : run(small_config(), 0)) {
    if (r.power.total_w <= 0.0) continue;
    EXPECT_NEAR(r.ee_bits_per_joule, r.sum_rate_bps / r.power.total_w, 1e-9 * r.ee_bits_per_joule);
    const double parts = r.power.ubs_active_w + r.power.ubs_sleep_w + r.power.fronthaul_w + r.power.edge_cloud_w +
                         r.power.ue_w;
    EXPECT_NEAR(parts, r.power.total_w, 1e-9 * r.power.total_w);
    EXPECT_EQ(r.wall_time_ms, 0.0);
  }
}

TEST(Run, ExhaustiveGuardIsFatal) {
  auto c = small_config();
  c.algorithms = {"exhaustive"};
  EXPECT_THROW(run(c), Error);
  c.scenario.M = 4;
  c.scenario.K = 3;
  c.scenario.L = 2;
  c.drops = 1;
  EXPECT_NO_THROW(run(c));
}

TEST(Sweep, OneRowPerPointAndAlgorithm) {
  auto c = small_config();
  c.algorithms = {"recp"};
  c.sweep = SweepSpec{"K", {2, 4}};
  const auto recs = run_sweep(c, 0);
  ASSERT_EQ(recs.size(), 6u);
  const auto rows = aggregate(recs, c);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].sweep_value, 2.0);
  EXPECT_EQ(rows[1].sweep_value, 4.0);
  for (const auto& row : rows) EXPECT_LE(row.records, 3);
  // Same drop seeds at every sweep point.
  EXPECT_EQ(recs[0].drop_seed, recs[3].drop_seed);
}

TEST(Aggregate, InfeasibleExcludedFromEe) {
  std::vector<ResultRecord> recs{record("a", 0.0, false), record("a", 0.0, false)};
  recs[0].qos_violation_count = 1;
  const auto rows = aggregate(recs, [](const ResultRecord&) { return 4; });
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_FALSE(rows[0].ee_mean.has_value());
  EXPECT_EQ(rows[0].infeasible_count, 2);
  EXPECT_DOUBLE_EQ(rows[0].qos_violation_percent, 100.0 * 1.0 / 8.0);
  EXPECT_NE(aggregate_to_csv(rows).find(",2,,,"), std::string::npos);
}

TEST(Aggregate, ConstantRecords) {
  std::vector<ResultRecord> recs(5, record("a", 3.5e6, true));
  const auto rows = aggregate(recs, [](const ResultRecord&) { return 3; });
  EXPECT_DOUBLE_EQ(*rows[0].ee_mean, 3.5e6);
  EXPECT_DOUBLE_EQ(*rows[0].ee_median, 3.5e6);
  EXPECT_DOUBLE_EQ(rows[0].active_ubs_mean, 2.0);
  EXPECT_EQ(rows[0].infeasible_count, 0);
}

TEST(Cdf, SortedAscendingPerAlgorithm) {
  std::vector<ResultRecord> recs{record("a", 3.0, true), record("b", 9.0, true), record("a", 1.0, true),
                                 record("a", 2.0, false), record("a", 2.0, true)};
  const auto cdf = ee_cdf(recs);
  ASSERT_EQ(cdf.size(), 4u);
  EXPECT_EQ(cdf[0].ee, 1.0);
  EXPECT_EQ(cdf[1].ee, 2.0);
  EXPECT_EQ(cdf[2].ee, 3.0);
  EXPECT_DOUBLE_EQ(cdf[2].probability, 1.0);
  EXPECT_EQ(cdf[3].algorithm, "b");
}

TEST(Persist, EmptyCsvIsHeaderOnly) {
  const auto text = to_csv({});
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 1);
  EXPECT_EQ(text.rfind("drop,drop_seed,algorithm,", 0), 0u);
  EXPECT_TRUE(from_csv(text).empty());
}

TEST(Persist, CsvAndJsonRoundTrip) {
  auto recs = run(small_config(), 0);
  recs[0].wall_time_ms = 1.0 / 3.0;
  recs[1].drop_seed = 0xFFFFFFFFFFFFFFFFull;
  EXPECT_EQ(from_csv(to_csv(recs)), recs);
  EXPECT_EQ(records_from_json(records_to_json(recs)), recs);
}

TEST(Persist, FileIo) {
  const auto path = std::filesystem::temp_directory_path() / "fdran_records_test.csv";
  const auto recs = run(small_config(), 0);
  write_text(path.string(), to_csv(recs));
  EXPECT_EQ(from_csv(read_text(path.string())), recs);
  std::filesystem::remove(path);
  EXPECT_THROW(write_text("/nonexistent/dir/out.csv", "x"), Error);
  EXPECT_THROW(from_csv("bogus\n"), Error);
}
