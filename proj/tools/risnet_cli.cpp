// risnet: coverage, rate, sensitivity, planning and Monte Carlo validation
// for BS + RIS cellular deployments.

#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "commands.hpp"
#include "config.hpp"
#include "output.hpp"

using namespace risnet::app;

int main(int argc, char** argv) {
  CLI::App app{"Coverage, rate and deployment planning for RIS-assisted cellular networks"};
  app.require_subcommand(1, 1);

  std::string config_path, out_path;
  long seed = -1;
  int threads = 1;
  bool fd_check = false;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "scenario file (JSON)")->check(CLI::ExistingFile);
    sub->add_option("--out", out_path, "output file (default: stdout)");
    sub->add_option("--seed", seed, "override the Monte Carlo seed")->check(CLI::NonNegativeNumber);
    sub->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
  };
  auto* coverage = app.add_subcommand("coverage", "coverage probability over thresholds and distances (CSV)");
  auto* rate = app.add_subcommand("rate", "ergodic rate over the density sweep (CSV)");
  auto* sens = app.add_subcommand("sensitivity", "rate derivatives and investment gains (CSV)");
  auto* plan = app.add_subcommand("plan", "round-by-round investment trajectory (CSV)");
  auto* sim = app.add_subcommand("simulate", "Monte Carlo coverage and rate (CSV)");
  auto* val = app.add_subcommand("validate", "analytic vs Monte Carlo report (JSON)");
  for (auto* s : {coverage, rate, sens, plan, sim, val}) add_common(s);
  sens->add_flag("--fd-check", fd_check, "add central finite-difference columns");

  CLI11_PARSE(app, argc, argv);

  ScenarioConfig cfg;
  try {
    if (!config_path.empty()) cfg = load_config(config_path);
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }
  if (seed >= 0) cfg.mc.seed = static_cast<std::uint64_t>(seed);
  RunOptions opt{threads, fd_check};

  CommandResult res;
  try {
    if (*coverage) res = cmd_coverage(cfg, opt);
    else if (*rate) res = cmd_rate(cfg, opt);
    else if (*sens) res = cmd_sensitivity(cfg, opt);
    else if (*plan) res = cmd_plan(cfg, opt);
    else if (*sim) res = cmd_simulate(cfg, opt);
    else res = cmd_validate(cfg, opt);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  std::ofstream file;
  if (!out_path.empty()) {
    file.open(out_path);
    if (!file) {
      std::cerr << "cannot write '" << out_path << "'\n";
      return 2;
    }
  }
  std::ostream& os = out_path.empty() ? std::cout : file;
  if (res.table) write_csv(os, *res.table);
  if (res.report) write_json(os, *res.report);
  if (res.failures > 0) std::cerr << res.failures << " point(s) failed; see the status column\n";
  return res.failures > 0 ? 1 : 0;
}
