// Command-line front end: run, sweep, oracle-check, validate-config.

#include <cstdint>
#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "fdran/config.hpp"
#include "fdran/harness.hpp"

namespace {

struct Options {
  std::string config;
  std::string algorithm;
  std::optional<int> drops;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string format = "csv";
  unsigned workers = 0;
  std::string records_out;  // sweep only
  std::string cdf_out;
};

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

fdran::RunConfig load(const Options& o, fdran::RunConfig base) {
  fdran::RunConfig c = o.config.empty() ? base : fdran::load_run_config(o.config);
  if (!o.algorithm.empty()) c.algorithms = split_list(o.algorithm);
  if (o.drops) c.drops = *o.drops;
  if (o.seed) c.base_seed = *o.seed;
  c.validate();
  return c;
}

void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") std::cout << text;
  else fdran::write_text(path, text);
}

std::string format_records(const std::vector<fdran::ResultRecord>& recs, const std::string& format) {
  return format == "json" ? fdran::records_to_json(recs) : fdran::to_csv(recs);
}

int cmd_run(const Options& o) {
  const auto cfg = load(o, fdran::default_run_config());
  const auto recs = fdran::run(cfg, o.workers);
  emit(o.out, format_records(recs, o.format));
  if (!o.cdf_out.empty()) fdran::write_text(o.cdf_out, fdran::cdf_to_csv(fdran::ee_cdf(recs)));
  return 0;
}

int cmd_sweep(const Options& o) {
  const auto cfg = load(o, fdran::default_run_config());
  if (!cfg.sweep) throw fdran::Error("sweep: config has no 'sweep' section");
  const auto recs = fdran::run_sweep(cfg, o.workers);
  const auto rows = fdran::aggregate(recs, cfg);
  emit(o.out, o.format == "json" ? fdran::aggregate_to_json(rows) : fdran::aggregate_to_csv(rows));
  if (!o.records_out.empty()) fdran::write_text(o.records_out, format_records(recs, o.format));
  if (!o.cdf_out.empty()) fdran::write_text(o.cdf_out, fdran::cdf_to_csv(fdran::ee_cdf(recs)));
  return 0;
}

// Tiny instances: swap matching against the exhaustive optimum on the same drops.
int cmd_oracle(const Options& o) {
  fdran::RunConfig base = fdran::default_run_config();
  base.scenario.M = 4;
  base.scenario.K = 3;
  base.scenario.L = 2;
  base.scenario.N = 2;
  base.drops = 10;
  fdran::RunConfig cfg = load(o, base);
  cfg.algorithms = {"trimsm-slmdb", "exhaustive"};
  cfg.sweep.reset();
  const auto recs = fdran::run(cfg, o.workers);

  std::vector<double> ratios;
  int violations = 0;
  std::printf("%6s %20s %14s %14s %8s\n", "drop", "seed", "trimsm_ee", "exhaustive_ee", "ratio");
  for (std::size_t i = 0; i + 1 < recs.size(); i += 2) {
    const auto& t = recs[i];
    const auto& x = recs[i + 1];
    if (!x.feasible) {
      std::printf("%6d %20llu %14s %14s %8s\n", t.drop, static_cast<unsigned long long>(t.drop_seed), "-",
                  "infeasible", "-");
      continue;
    }
    const double ratio = t.feasible ? t.ee_bits_per_joule / x.ee_bits_per_joule : 0.0;
    ratios.push_back(ratio);
    // Both sides score associations with the same solver, so exceeding the optimum is a bug.
    if (t.feasible && t.ee_bits_per_joule > x.ee_bits_per_joule * (1.0 + 1e-9)) ++violations;
    std::printf("%6d %20llu %14.6g %14.6g %8.4f\n", t.drop, static_cast<unsigned long long>(t.drop_seed),
                t.ee_bits_per_joule, x.ee_bits_per_joule, ratio);
  }
  if (ratios.empty()) {
    std::printf("no feasible drops\n");
  } else {
    std::printf("feasible drops: %zu, median ratio: %.4f\n", ratios.size(), fdran::median_of(ratios));
  }
  if (violations > 0) {
    std::fprintf(stderr, "oracle-check: %d drop(s) beat the exhaustive optimum\n", violations);
    return 3;
  }
  return 0;
}

int cmd_validate(const Options& o) {
  if (o.config.empty()) throw fdran::Error("validate-config needs --config");
  const auto cfg = load(o, fdran::default_run_config());
  fdran::check_guards(cfg);
  if (cfg.sweep)
    for (double v : cfg.sweep->values) fdran::check_guards(fdran::with_sweep_value(cfg, cfg.sweep->parameter, v));
  std::cout << "ok\n";
  return 0;
}

void add_common(CLI::App* sub, Options& o, bool outputs) {
  sub->add_option("--config", o.config, "JSON run configuration")->check(CLI::ExistingFile);
  sub->add_option("--algorithm", o.algorithm, "algorithm selector, or a comma-separated list");
  sub->add_option("--drops", o.drops, "number of drops")->check(CLI::PositiveNumber);
  sub->add_option("--seed", o.seed, "base seed");
  sub->add_option("--workers", o.workers, "worker threads (0 = hardware concurrency)");
  if (outputs) {
    sub->add_option("--out", o.out, "output path (stdout if omitted)");
    sub->add_option("--format", o.format, "output format")->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--cdf", o.cdf_out, "also write the EE CDF as CSV");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Uplink FD-RAN energy-efficiency simulator"};
  app.require_subcommand(1);
  Options o;
  auto* run = app.add_subcommand("run", "run seeded drops and write one record per drop and algorithm");
  add_common(run, o, true);
  auto* sweep = app.add_subcommand("sweep", "run the configured sweep and write aggregated rows");
  add_common(sweep, o, true);
  sweep->add_option("--records", o.records_out, "also write the per-drop records");
  auto* oracle = app.add_subcommand("oracle-check", "compare swap matching with exhaustive search on tiny drops");
  add_common(oracle, o, false);
  auto* validate = app.add_subcommand("validate-config", "check a configuration file and exit");
  add_common(validate, o, false);

  CLI11_PARSE(app, argc, argv);
  try {
    if (run->parsed()) return cmd_run(o);
    if (sweep->parsed()) return cmd_sweep(o);
    if (oracle->parsed()) return cmd_oracle(o);
    if (validate->parsed()) return cmd_validate(o);
  } catch (const fdran::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
