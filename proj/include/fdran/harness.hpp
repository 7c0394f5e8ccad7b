/**
 * \file fdran/harness.hpp
 *
 * \brief Experiment runner: seeded drops, algorithm dispatch, sweeps, aggregation and
 * CSV/JSON persistence of per-drop records.
 */
#pragma once

#include <algorithm>
#include <chrono>
#include <cinttypes>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "fdran/common.hpp"
#include "fdran/config.hpp"
#include "fdran/matching.hpp"

namespace fdran {

struct ResultRecord {
  int drop = 0;
  std::uint64_t drop_seed = 0;
  std::string algorithm;
  std::string sweep_parameter;  // empty outside sweeps
  double sweep_value = 0.0;
  double ee_bits_per_joule = 0.0;
  double sum_rate_bps = 0.0;
  PowerBreakdown power;
  int active_ubs_count = 0;
  int qos_violation_count = 0;
  int swap_count = 0;
  int slm_iterations = 0;
  double wall_time_ms = 0.0;
  bool feasible = false;

  bool operator==(const ResultRecord& o) const {
    return drop == o.drop && drop_seed == o.drop_seed && algorithm == o.algorithm &&
           sweep_parameter == o.sweep_parameter && sweep_value == o.sweep_value &&
           ee_bits_per_joule == o.ee_bits_per_joule && sum_rate_bps == o.sum_rate_bps &&
           power.ubs_active_w == o.power.ubs_active_w && power.ubs_sleep_w == o.power.ubs_sleep_w &&
           power.fronthaul_w == o.power.fronthaul_w && power.edge_cloud_w == o.power.edge_cloud_w &&
           power.ue_w == o.power.ue_w && power.total_w == o.power.total_w &&
           active_ubs_count == o.active_ubs_count && qos_violation_count == o.qos_violation_count &&
           swap_count == o.swap_count && slm_iterations == o.slm_iterations && wall_time_ms == o.wall_time_ms &&
           feasible == o.feasible;
  }
};

inline std::uint64_t drop_seed(std::uint64_t base_seed, int drop) {
  return base_seed ^ static_cast<std::uint64_t>(drop);
}

/// Drop context shared by every algorithm of one drop.
inline ProblemContext make_drop_context(const RunConfig& cfg, std::uint64_t seed) {
  ScenarioParams sc = cfg.scenario;
  sc.seed = seed;
  PowerConfig power = cfg.power;
  power.bs.act_values["N"] = static_cast<double>(sc.N);
  return make_context(sc, cfg.frame, power, cfg.r_min_bps, cfg.p_max_w, cfg.solver);
}

/// Fatal guard checks that would otherwise fail inside a drop.
inline void check_guards(const RunConfig& cfg) {
  for (const auto& a : cfg.algorithms)
    if (a == "exhaustive")
      require(cfg.scenario.M * cfg.scenario.K <= kExhaustiveMaxLinks,
              "exhaustive search needs M*K <= " + std::to_string(kExhaustiveMaxLinks) + ", got M*K = " +
                  std::to_string(cfg.scenario.M * cfg.scenario.K));
}

inline SolutionReport dispatch(const std::string& algorithm, const ProblemContext& ctx, const MatchingSettings& mcfg) {
  if (algorithm.rfind("trimsm-", 0) == 0) return trimsm(ctx, parse_power_mode(algorithm.substr(7)), mcfg);
  if (algorithm == "recp") return evaluate_fixed(ctx, recp_init(ctx.corr, ctx.L(), ctx.N(), mcfg.recp_delta));
  if (algorithm == "llsf") return evaluate_fixed(ctx, llsf_assoc(ctx.corr, ctx.L(), ctx.N()));
  if (algorithm == "tsap") return evaluate_fixed(ctx, tsap_assoc(ctx.corr, ctx.L(), ctx.N()));
  if (algorithm == "nos") return nos_assoc(ctx, PowerMode::eipc, mcfg);
  if (algorithm == "exhaustive") return exhaustive_search(ctx);
  throw Error("unknown algorithm '" + algorithm + "'");
}

inline ResultRecord make_record(const SolutionReport& rep, const ProblemContext& ctx) {
  ResultRecord r;
  r.feasible = !rep.infeasible;
  r.power = rep.power.breakdown;
  r.sum_rate_bps = rep.power.rates.size() > 0 ? rep.power.rates.sum() : 0.0;
  r.ee_bits_per_joule = rep.power.breakdown.total_w > 0.0 ? r.sum_rate_bps / rep.power.breakdown.total_w : 0.0;
  r.active_ubs_count = rep.matching.assoc.active_count();
  const double tol = ctx.solver.qos_rate_tol;
  for (int k = 0; k < ctx.K(); ++k) {
    const double rate = k < rep.power.rates.size() ? rep.power.rates[k] : 0.0;
    if (rate < ctx.qos.r_min_bps[k] * (1.0 - tol)) ++r.qos_violation_count;
  }
  r.swap_count = rep.swap_count;
  r.slm_iterations = rep.power.diagnostics.outer_iterations;
  return r;
}

namespace detail {

/// Records of one drop, in the order of cfg.algorithms.
inline std::vector<ResultRecord> run_drop(const RunConfig& cfg, int d) {
  const std::uint64_t seed = drop_seed(cfg.base_seed, d);
  const ProblemContext ctx = make_drop_context(cfg, seed);
  std::vector<ResultRecord> out;
  for (const auto& a : cfg.algorithms) {
    const auto t0 = std::chrono::steady_clock::now();
    const SolutionReport rep = dispatch(a, ctx, cfg.matching);
    const auto t1 = std::chrono::steady_clock::now();
    ResultRecord r = make_record(rep, ctx);
    r.drop = d;
    r.drop_seed = seed;
    r.algorithm = a;
    if (cfg.record_timing) r.wall_time_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace detail

/// One record per (drop, algorithm), ordered by drop then algorithm. Drops run on up to
/// `workers` threads (0 picks the hardware concurrency); the output does not depend on it.
inline std::vector<ResultRecord> run(const RunConfig& cfg, unsigned workers = 0) {
  cfg.validate();
  check_guards(cfg);
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, static_cast<unsigned>(cfg.drops));
  std::vector<std::vector<ResultRecord>> per_drop(static_cast<std::size_t>(cfg.drops));
  std::vector<std::string> errors(workers);
  auto body = [&](unsigned w) {
    try {
      for (int d = static_cast<int>(w); d < cfg.drops; d += static_cast<int>(workers))
        per_drop[static_cast<std::size_t>(d)] = detail::run_drop(cfg, d);
    } catch (const std::exception& e) {
      errors[w] = e.what();
    }
  };
  if (workers == 1) {
    body(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(body, w);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors)
    if (!e.empty()) throw Error(e);
  std::vector<ResultRecord> out;
  for (auto& v : per_drop)
    for (auto& r : v) out.push_back(std::move(r));
  return out;
}

/// Runs every sweep point, tagging records with the axis value.
inline std::vector<ResultRecord> run_sweep(const RunConfig& cfg, unsigned workers = 0) {
  require(cfg.sweep.has_value(), "sweep: config has no sweep axis");
  cfg.validate();
  std::vector<ResultRecord> out;
  for (double v : cfg.sweep->values) {
    RunConfig point = with_sweep_value(cfg, cfg.sweep->parameter, v);
    point.sweep.reset();
    for (auto& r : run(point, workers)) {
      r.sweep_parameter = cfg.sweep->parameter;
      r.sweep_value = v;
      out.push_back(std::move(r));
    }
  }
  return out;
}

struct AggregateRow {
  std::string sweep_parameter;
  double sweep_value = 0.0;
  std::string algorithm;
  int records = 0;
  int infeasible_count = 0;
  std::optional<double> ee_mean;    // over feasible records only
  std::optional<double> ee_median;
  double active_ubs_mean = 0.0;     // over all records
  double qos_violation_percent = 0.0;  // violating UEs over all UE slots
  double swap_count_mean = 0.0;
};

inline double median_of(std::vector<double> v) {
  require(!v.empty(), "median of an empty set");
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

/// Groups by (sweep value, algorithm) in first-seen order. `ues_per_record` maps a record to
/// its UE count, needed for the violation percentage.
template <class UeCount>
std::vector<AggregateRow> aggregate(const std::vector<ResultRecord>& records, UeCount ues_per_record) {
  std::vector<AggregateRow> rows;
  std::vector<std::vector<const ResultRecord*>> groups;
  for (const auto& r : records) {
    std::size_t g = 0;
    while (g < rows.size() &&
           !(rows[g].sweep_parameter == r.sweep_parameter && rows[g].sweep_value == r.sweep_value &&
             rows[g].algorithm == r.algorithm))
      ++g;
    if (g == rows.size()) {
      AggregateRow row;
      row.sweep_parameter = r.sweep_parameter;
      row.sweep_value = r.sweep_value;
      row.algorithm = r.algorithm;
      rows.push_back(row);
      groups.emplace_back();
    }
    groups[g].push_back(&r);
  }
  for (std::size_t g = 0; g < rows.size(); ++g) {
    auto& row = rows[g];
    std::vector<double> ee;
    double active = 0.0, swaps = 0.0, viol = 0.0, slots = 0.0;
    for (const auto* r : groups[g]) {
      ++row.records;
      if (r->feasible) ee.push_back(r->ee_bits_per_joule);
      else ++row.infeasible_count;
      active += r->active_ubs_count;
      swaps += r->swap_count;
      viol += r->qos_violation_count;
      slots += static_cast<double>(ues_per_record(*r));
    }
    if (!ee.empty()) {
      double s = 0.0;
      for (double e : ee) s += e;
      row.ee_mean = s / static_cast<double>(ee.size());
      row.ee_median = median_of(ee);
    }
    row.active_ubs_mean = active / row.records;
    row.swap_count_mean = swaps / row.records;
    row.qos_violation_percent = slots > 0.0 ? 100.0 * viol / slots : 0.0;
  }
  return rows;
}

/// Aggregation with the UE count taken from the config (and the sweep axis when it is K).
inline std::vector<AggregateRow> aggregate(const std::vector<ResultRecord>& records, const RunConfig& cfg) {
  return aggregate(records, [&](const ResultRecord& r) {
    return r.sweep_parameter == "K" ? static_cast<int>(r.sweep_value) : cfg.scenario.K;
  });
}

struct CdfPoint {
  std::string algorithm;
  double ee = 0.0;
  double probability = 0.0;
};

/// Empirical CDF of feasible EE values per algorithm, ascending in EE.
inline std::vector<CdfPoint> ee_cdf(const std::vector<ResultRecord>& records) {
  std::vector<std::string> algs;
  for (const auto& r : records)
    if (std::find(algs.begin(), algs.end(), r.algorithm) == algs.end()) algs.push_back(r.algorithm);
  std::vector<CdfPoint> out;
  for (const auto& a : algs) {
    std::vector<double> ee;
    for (const auto& r : records)
      if (r.algorithm == a && r.feasible) ee.push_back(r.ee_bits_per_joule);
    std::sort(ee.begin(), ee.end());
    for (std::size_t i = 0; i < ee.size(); ++i)
      out.push_back({a, ee[i], static_cast<double>(i + 1) / static_cast<double>(ee.size())});
  }
  return out;
}

// ---- persistence ----

inline const std::vector<std::string>& record_columns() {
  static const std::vector<std::string> cols{
      "drop",          "drop_seed",         "algorithm",           "sweep_parameter", "sweep_value",
      "ee_bits_per_joule", "sum_rate_bps",  "p_ubs_active_w",      "p_ubs_sleep_w",   "p_fronthaul_w",
      "p_edge_cloud_w", "p_ue_w",           "p_total_w",           "active_ubs_count", "qos_violation_count",
      "swap_count",    "slm_iterations",    "wall_time_ms",        "feasible"};
  return cols;
}

namespace detail {

inline std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline double parse_double(const std::string& s) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw Error("csv: bad number '" + s + "'");
  }
  require(used == s.size(), "csv: bad number '" + s + "'");
  return v;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(line);
  while (std::getline(in, cur, ',')) out.push_back(cur);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace detail

inline std::string to_csv(const std::vector<ResultRecord>& records) {
  using detail::fmt_double;
  std::ostringstream out;
  const auto& cols = record_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << '\n';
  for (const auto& r : records) {
    require(r.algorithm.find(',') == std::string::npos && r.sweep_parameter.find(',') == std::string::npos,
            "csv: field contains a comma");
    out << r.drop << ',' << r.drop_seed << ',' << r.algorithm << ',' << r.sweep_parameter << ','
        << fmt_double(r.sweep_value) << ',' << fmt_double(r.ee_bits_per_joule) << ',' << fmt_double(r.sum_rate_bps)
        << ',' << fmt_double(r.power.ubs_active_w) << ',' << fmt_double(r.power.ubs_sleep_w) << ','
        << fmt_double(r.power.fronthaul_w) << ',' << fmt_double(r.power.edge_cloud_w) << ','
        << fmt_double(r.power.ue_w) << ',' << fmt_double(r.power.total_w) << ',' << r.active_ubs_count << ','
        << r.qos_violation_count << ',' << r.swap_count << ',' << r.slm_iterations << ','
        << fmt_double(r.wall_time_ms) << ',' << (r.feasible ? 1 : 0) << '\n';
  }
  return out.str();
}

inline std::vector<ResultRecord> from_csv(const std::string& text) {
  using detail::parse_double;
  std::istringstream in(text);
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), "csv: missing header");
  const auto& cols = record_columns();
  require(detail::split_csv_line(line) == cols, "csv: unexpected header");
  std::vector<ResultRecord> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = detail::split_csv_line(line);
    require(f.size() == cols.size(), "csv: wrong field count in '" + line + "'");
    ResultRecord r;
    try {
      r.drop = std::stoi(f[0]);
      r.drop_seed = std::stoull(f[1]);
      r.active_ubs_count = std::stoi(f[13]);
      r.qos_violation_count = std::stoi(f[14]);
      r.swap_count = std::stoi(f[15]);
      r.slm_iterations = std::stoi(f[16]);
    } catch (const std::exception&) {
      throw Error("csv: bad integer in '" + line + "'");
    }
    r.algorithm = f[2];
    r.sweep_parameter = f[3];
    r.sweep_value = parse_double(f[4]);
    r.ee_bits_per_joule = parse_double(f[5]);
    r.sum_rate_bps = parse_double(f[6]);
    r.power.ubs_active_w = parse_double(f[7]);
    r.power.ubs_sleep_w = parse_double(f[8]);
    r.power.fronthaul_w = parse_double(f[9]);
    r.power.edge_cloud_w = parse_double(f[10]);
    r.power.ue_w = parse_double(f[11]);
    r.power.total_w = parse_double(f[12]);
    r.wall_time_ms = parse_double(f[17]);
    require(f[18] == "0" || f[18] == "1", "csv: feasible must be 0 or 1");
    r.feasible = f[18] == "1";
    out.push_back(std::move(r));
  }
  return out;
}

inline json to_json(const ResultRecord& r) {
  return {{"drop", r.drop},
          {"drop_seed", r.drop_seed},
          {"algorithm", r.algorithm},
          {"sweep_parameter", r.sweep_parameter},
          {"sweep_value", r.sweep_value},
          {"ee_bits_per_joule", r.ee_bits_per_joule},
          {"sum_rate_bps", r.sum_rate_bps},
          {"p_ubs_active_w", r.power.ubs_active_w},
          {"p_ubs_sleep_w", r.power.ubs_sleep_w},
          {"p_fronthaul_w", r.power.fronthaul_w},
          {"p_edge_cloud_w", r.power.edge_cloud_w},
          {"p_ue_w", r.power.ue_w},
          {"p_total_w", r.power.total_w},
          {"active_ubs_count", r.active_ubs_count},
          {"qos_violation_count", r.qos_violation_count},
          {"swap_count", r.swap_count},
          {"slm_iterations", r.slm_iterations},
          {"wall_time_ms", r.wall_time_ms},
          {"feasible", r.feasible}};
}

inline std::string records_to_json(const std::vector<ResultRecord>& records) {
  json a = json::array();
  for (const auto& r : records) a.push_back(to_json(r));
  return a.dump(2) + "\n";
}

inline std::vector<ResultRecord> records_from_json(const std::string& text) {
  json a;
  try {
    a = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(std::string("json: ") + e.what());
  }
  require(a.is_array(), "json: expected an array of records");
  std::vector<ResultRecord> out;
  try {
    for (const auto& o : a) {
      ResultRecord r;
      r.drop = o.at("drop").get<int>();
      r.drop_seed = o.at("drop_seed").get<std::uint64_t>();
      r.algorithm = o.at("algorithm").get<std::string>();
      r.sweep_parameter = o.at("sweep_parameter").get<std::string>();
      r.sweep_value = o.at("sweep_value").get<double>();
      r.ee_bits_per_joule = o.at("ee_bits_per_joule").get<double>();
      r.sum_rate_bps = o.at("sum_rate_bps").get<double>();
      r.power.ubs_active_w = o.at("p_ubs_active_w").get<double>();
      r.power.ubs_sleep_w = o.at("p_ubs_sleep_w").get<double>();
      r.power.fronthaul_w = o.at("p_fronthaul_w").get<double>();
      r.power.edge_cloud_w = o.at("p_edge_cloud_w").get<double>();
      r.power.ue_w = o.at("p_ue_w").get<double>();
      r.power.total_w = o.at("p_total_w").get<double>();
      r.active_ubs_count = o.at("active_ubs_count").get<int>();
      r.qos_violation_count = o.at("qos_violation_count").get<int>();
      r.swap_count = o.at("swap_count").get<int>();
      r.slm_iterations = o.at("slm_iterations").get<int>();
      r.wall_time_ms = o.at("wall_time_ms").get<double>();
      r.feasible = o.at("feasible").get<bool>();
      out.push_back(std::move(r));
    }
  } catch (const json::exception& e) {
    throw Error(std::string("json: bad record: ") + e.what());
  }
  return out;
}

inline std::string aggregate_to_csv(const std::vector<AggregateRow>& rows) {
  using detail::fmt_double;
  std::ostringstream out;
  out << "sweep_parameter,sweep_value,algorithm,records,infeasible_count,ee_mean,ee_median,active_ubs_mean,"
         "qos_violation_percent,swap_count_mean\n";
  for (const auto& r : rows)
    out << r.sweep_parameter << ',' << fmt_double(r.sweep_value) << ',' << r.algorithm << ',' << r.records << ','
        << r.infeasible_count << ',' << (r.ee_mean ? fmt_double(*r.ee_mean) : "") << ','
        << (r.ee_median ? fmt_double(*r.ee_median) : "") << ',' << fmt_double(r.active_ubs_mean) << ','
        << fmt_double(r.qos_violation_percent) << ',' << fmt_double(r.swap_count_mean) << '\n';
  return out.str();
}

inline std::string aggregate_to_json(const std::vector<AggregateRow>& rows) {
  json a = json::array();
  for (const auto& r : rows)
    a.push_back({{"sweep_parameter", r.sweep_parameter},
                 {"sweep_value", r.sweep_value},
                 {"algorithm", r.algorithm},
                 {"records", r.records},
                 {"infeasible_count", r.infeasible_count},
                 {"ee_mean", r.ee_mean ? json(*r.ee_mean) : json(nullptr)},
                 {"ee_median", r.ee_median ? json(*r.ee_median) : json(nullptr)},
                 {"active_ubs_mean", r.active_ubs_mean},
                 {"qos_violation_percent", r.qos_violation_percent},
                 {"swap_count_mean", r.swap_count_mean}});
  return a.dump(2) + "\n";
}

inline std::string cdf_to_csv(const std::vector<CdfPoint>& cdf) {
  std::ostringstream out;
  out << "algorithm,ee_bits_per_joule,cdf\n";
  for (const auto& p : cdf)
    out << p.algorithm << ',' << detail::fmt_double(p.ee) << ',' << detail::fmt_double(p.probability) << '\n';
  return out.str();
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), "cannot open '" + path + "' for writing");
  out << text;
  out.flush();
  require(static_cast<bool>(out), "write to '" + path + "' failed");
}

inline std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), "cannot open '" + path + "'");
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace fdran
